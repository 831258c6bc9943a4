"""Ascending-ladder matrices for the skip-free-downward additive process.

Solves the nonlinear matrix equation

    -K (I, L) = int_0^inf exp(u K) (I, L) (C(du) + D(du)) diag(v)^-1

for the minimal ML matrix K (|S-| x |S-|) and nonnegative L (|S-| x |S+|)
by successive substitution from below, together with the dual subrate /
substochastic pair obtained by the diag(pi) similarity transform, the
null right eigenvector of K, and the ladder-height distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_sylvester

from .errors import DriftPositive, EmptyMinus, NoConvergence, NotMinusState
from .model import MapModel

__all__ = [
    "LadderSolution",
    "solve_ladder",
    "solve_descent",
    "descent_residual",
    "dual_ladder",
    "k_eigenvector",
    "ladder_height_matrix",
    "ladder_height",
]

STEP_TOL = 1e-13
MAX_SWEEPS = 200_000


@dataclass(frozen=True)
class LadderSolution:
    K: np.ndarray
    L: np.ndarray
    kminus: np.ndarray | None
    Qdual: np.ndarray
    Rdual: np.ndarray
    residual: float


def _ascent_W(model: MapModel, L: np.ndarray) -> np.ndarray:
    """(I, L) spread over the original state columns."""
    part = model.partition
    W = np.zeros((len(part.minus), model.n))
    W[:, part.minus] = np.eye(len(part.minus))
    if part.plus:
        W[:, part.plus] = L
    return W


def _jump_integral_left(model: MapModel, K: np.ndarray, W: np.ndarray) -> np.ndarray:
    """int exp(u K) W D(du): the jump part of the right side of the equation."""
    E = np.zeros_like(W)
    for (k, j), f in model.F.items():
        E[:, j] += model.D[k, j] * (f.matrix_tail(0.0, K) @ W[:, k])
    return E


def solve_ladder(model: MapModel) -> LadderSolution:
    """Minimal (K, L) by monotone substitution, with dual pair and k-."""
    part = model.partition
    minus, plus = list(part.minus), list(part.plus)
    if not minus:
        raise EmptyMinus("no state has negative drift")
    m = len(minus)
    v_minus = model.v[minus]
    v_plus = model.v[plus]
    C = model.C

    K = np.diag(np.diag(C)[minus] / np.abs(v_minus))
    L = np.zeros((m, len(plus)))
    # coefficient of the Sylvester update for L; spectrum in the open right half plane
    M_plus = -C[np.ix_(plus, plus)] / v_plus[None, :] if plus else None

    for _ in range(MAX_SWEEPS):
        W = _ascent_W(model, L)
        E = _jump_integral_left(model, K, W)
        B = (W @ C + E) / model.v[None, :]
        K_next = -B[:, minus]
        if plus:
            rhs = (C[np.ix_(minus, plus)] + E[:, plus]) / v_plus[None, :]
            L_next = solve_sylvester(-K_next, M_plus, rhs)
        else:
            L_next = L
        step = max(np.max(np.abs(K_next - K)), np.max(np.abs(L_next - L)) if plus else 0.0)
        K, L = K_next, L_next
        if step < STEP_TOL:
            break
    else:
        raise NoConvergence("ladder fixed point did not converge")

    W = _ascent_W(model, L)
    B = (W @ C + _jump_integral_left(model, K, W)) / model.v[None, :]
    residual = float(np.max(np.abs(K @ W + B)))

    pi = model.stationary_dist()
    Qdual, Rdual = dual_ladder(model, K, L)
    kminus = None
    if model.mean_drift() <= 0:
        kminus = k_eigenvector(K, pi[minus])
    return LadderSolution(K=K, L=L, kminus=kminus, Qdual=Qdual, Rdual=Rdual, residual=residual)


def dual_ladder(model: MapModel, K: np.ndarray, L: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """diag(pi)-similarity transforms: the dual subrate and substochastic pair."""
    part = model.partition
    pi = model.stationary_dist()
    pi_minus = pi[list(part.minus)]
    Qdual = (K.T * pi_minus[None, :]) / pi_minus[:, None]
    if part.plus:
        pi_plus = pi[list(part.plus)]
        Rdual = (L.T * pi_minus[None, :]) / pi_plus[:, None]
    else:
        Rdual = np.zeros((0, len(part.minus)))
    return Qdual, Rdual


def k_eigenvector(K: np.ndarray, pi_minus: np.ndarray) -> np.ndarray:
    """Positive right null vector of K normalized so that pi- k- = 1."""
    w, V = np.linalg.eig(K)
    idx = int(np.argmin(np.abs(w)))
    if abs(w[idx]) > 1e-8:
        raise DriftPositive("K has no zero eigenvalue; the drift is positive")
    k = np.real(V[:, idx])
    k = k / (pi_minus @ k)
    if np.min(k) <= 0:
        raise DriftPositive("null vector of K is not positive")
    return k


def _tail_outer_integral(model: MapModel, K: np.ndarray, W: np.ndarray, x: float) -> np.ndarray:
    """int_x^inf [ int_w^inf exp((y-w)K) (I, L) D(dy) ] dw."""
    out = np.zeros_like(W)
    for (k, j), f in model.F.items():
        out[:, j] += model.D[k, j] * (f.matrix_tail_integral(x, K) @ W[:, k])
    return out


def ladder_height_matrix(model: MapModel, ladder: LadderSolution, x: float) -> np.ndarray:
    """J(x): |S-| x n matrix of P(M(tau0+) = j, Y(tau0+) <= x | M(0) = i), i in S-."""
    part = model.partition
    minus, plus = list(part.minus), list(part.plus)
    W = _ascent_W(model, ladder.L)
    jump_part = _tail_outer_integral(model, ladder.K, W, 0.0)
    if x != np.inf:
        jump_part = jump_part - _tail_outer_integral(model, ladder.K, W, x)
    smooth = np.zeros((len(minus), model.n))
    if plus:
        smooth[:, plus] = ladder.L * model.v[plus][None, :]
    return (jump_part + smooth) / (-model.v[minus])[:, None]


def ladder_height(model: MapModel, ladder: LadderSolution, i: int, j: int, x: float) -> float:
    part = model.partition
    if i not in part.minus:
        raise NotMinusState(f"state {i} has nonnegative drift")
    row = part.minus.index(i)
    return float(ladder_height_matrix(model, ladder, x)[row, j])


def solve_descent(model: MapModel) -> tuple[np.ndarray, np.ndarray, float]:
    """Minimal (Q, R) of the descent-form equation

        -(I; R) Q = diag(v)^-1 int (C(du) + D(du)) (I; R) exp(u Q),

    the first-passage generator of the level moving down through the
    S- states (rate matrix when the mean drift is <= 0).  Returns
    (Q, R, residual).
    """
    part = model.partition
    minus, plus = list(part.minus), list(part.plus)
    if not minus:
        raise EmptyMinus("no state has negative drift")
    m = len(minus)
    v_plus = model.v[plus]
    C = model.C

    def V_of(R):
        V = np.zeros((model.n, m))
        V[minus, :] = np.eye(m)
        if plus:
            V[plus, :] = R
        return V

    def jump_integral_right(Q, V):
        E = np.zeros((model.n, m))
        for (i, j), f in model.F.items():
            E[i, :] += model.D[i, j] * (V[j, :] @ f.matrix_tail(0.0, Q))
        return E

    Q = np.diag(np.diag(C)[minus] / np.abs(model.v[minus]))
    R = np.zeros((len(plus), m))
    A_plus = -C[np.ix_(plus, plus)] / v_plus[:, None] if plus else None

    for _ in range(MAX_SWEEPS):
        V = V_of(R)
        E = jump_integral_right(Q, V)
        B = (C @ V + E) / model.v[:, None]
        Q_next = -B[minus, :]
        if plus:
            rhs = (C[np.ix_(plus, minus)] + E[plus, :]) / v_plus[:, None]
            R_next = solve_sylvester(A_plus, -Q_next, rhs)
        else:
            R_next = R
        step = max(np.max(np.abs(Q_next - Q)), np.max(np.abs(R_next - R)) if plus else 0.0)
        Q, R = Q_next, R_next
        if step < STEP_TOL:
            break
    else:
        raise NoConvergence("descent fixed point did not converge")

    V = V_of(R)
    B = (C @ V + jump_integral_right(Q, V)) / model.v[:, None]
    residual = float(np.max(np.abs(V @ Q + B)))
    return Q, R, residual


def descent_residual(model: MapModel, Q: np.ndarray, R: np.ndarray) -> float:
    """Residual of the descent-form equation at a candidate pair (Q, R)."""
    part = model.partition
    minus, plus = list(part.minus), list(part.plus)
    m = len(minus)
    V = np.zeros((model.n, m))
    V[minus, :] = np.eye(m)
    if plus:
        V[plus, :] = R
    E = np.zeros((model.n, m))
    for (i, j), f in model.F.items():
        E[i, :] += model.D[i, j] * (V[j, :] @ f.matrix_tail(0.0, Q))
    B = (model.C @ V + E) / model.v[:, None]
    return float(np.max(np.abs(V @ Q + B)))
