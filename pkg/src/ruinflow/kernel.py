"""Semi-Markov kernel of the up-crossing chain and the first-crossing bound.

For a level x > 0 the hitting probabilities solve the Markov renewal
equation  Psi(x) = Gbar(x) + int_0^x H(dy) Psi(x - y)  where

* ``H`` is the (level-indexed, absolutely continuous) kernel collecting
  one up-step of the embedded chain: from a down-drift state the ladder
  step, from an up-drift state the next transition of the background
  chain smoothed over the exponential holding time;
* ``Gbar(x)`` collects the ways the process crosses the remaining gap x
  in a single step (a straight climb or one jump).

Everything is evaluated in closed form through the mixture transforms;
``H_hat``/``T_of_theta`` give the moment generating function of H and
``Gbar_transform`` the weighted integral of Gbar at the decay rate,
both used as independent cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainExceeded, SingularBlock
from .ladder import LadderSolution, _ascent_W, _tail_outer_integral, solve_ladder
from .model import MapModel

__all__ = [
    "KernelContext",
    "make_context",
    "H_at",
    "H_density",
    "Gbar_at",
    "T_of_theta",
    "H_hat",
    "Gbar_transform",
]


@dataclass(frozen=True)
class KernelContext:
    model: MapModel
    ladder: LadderSolution
    minus: tuple[int, ...]
    plus: tuple[int, ...]
    W: np.ndarray = field(repr=False)  # (I, L) over original columns
    q: np.ndarray = field(repr=False)  # c(i)/v(i); only meaningful on up states


def make_context(model: MapModel, ladder: LadderSolution | None = None) -> KernelContext:
    if ladder is None:
        ladder = solve_ladder(model)
    part = model.partition
    q = np.zeros(model.n)
    plus = list(part.plus)
    if plus:
        q[plus] = model.c[plus] / model.v[plus]
    return KernelContext(
        model=model,
        ladder=ladder,
        minus=part.minus,
        plus=part.plus,
        W=_ascent_W(model, ladder.L),
        q=q,
    )


def _up_step_cdf(model: MapModel, k: int, j: int, x: float, qk: float) -> float:
    """int_0^x (1 - exp(-qk (x-y))) U_kj(dy) with U = C delta_0 + D F."""
    acc = 0.0
    if k != j and model.C[k, j] > 0:
        acc += model.C[k, j] * (1.0 - np.exp(-qk * x))
    if model.D[k, j] > 0:
        f = model.F[(k, j)]
        acc += model.D[k, j] * (f.cdf(x) - f.smoothed_mgf(x, qk))
    return acc


def _up_step_density(model: MapModel, k: int, j: int, y: float, qk: float) -> float:
    """(d/dx of the above) / qk = exp(-qk y) C_kj + D_kj smoothed mgf."""
    acc = 0.0
    if k != j and model.C[k, j] > 0:
        acc += model.C[k, j] * np.exp(-qk * y)
    if model.D[k, j] > 0:
        acc += model.D[k, j] * model.F[(k, j)].smoothed_mgf(y, qk)
    return acc


def _jump_climb_tail(model: MapModel, K: np.ndarray, W: np.ndarray, w: float) -> np.ndarray:
    """G(w) = int_w^inf exp((y-w) K) (I, L) D(dy), an |S-| x n matrix."""
    out = np.zeros_like(W)
    for (k, j), f in model.F.items():
        out[:, j] += model.D[k, j] * (f.matrix_tail(w, K) @ W[:, k])
    return out


def H_at(ctx: KernelContext, x: float) -> np.ndarray:
    """Kernel mass H(x) on [0, x], an n x n matrix (H(0) = 0)."""
    model = ctx.model
    n = model.n
    H = np.zeros((n, n))
    if x <= 0.0:
        return H
    for i in ctx.plus:
        qi = ctx.q[i]
        for j in range(n):
            H[i, j] = _up_step_cdf(model, i, j, x, qi) / model.c[i]
    if ctx.minus:
        K, L = ctx.ladder.K, ctx.ladder.L
        climb = _tail_outer_integral(model, K, ctx.W, 0.0) - _tail_outer_integral(
            model, K, ctx.W, x
        )
        block = climb.copy()
        for col, k in enumerate(ctx.plus):
            qk = ctx.q[k]
            scale = model.v[k] / model.c[k]
            for j in range(n):
                block[:, j] += L[:, col] * scale * _up_step_cdf(model, k, j, x, qk)
        H[list(ctx.minus), :] = block / (-model.v[list(ctx.minus)])[:, None]
    return H


def H_density(ctx: KernelContext, y: float) -> np.ndarray:
    """Density H'(y) of the absolutely continuous kernel."""
    model = ctx.model
    n = model.n
    hd = np.zeros((n, n))
    if y < 0.0:
        return hd
    for i in ctx.plus:
        qi = ctx.q[i]
        for j in range(n):
            hd[i, j] = _up_step_density(model, i, j, y, qi) / model.v[i]
    if ctx.minus:
        K, L = ctx.ladder.K, ctx.ladder.L
        block = _jump_climb_tail(model, K, ctx.W, y)
        for col, k in enumerate(ctx.plus):
            qk = ctx.q[k]
            for j in range(n):
                block[:, j] += L[:, col] * _up_step_density(model, k, j, y, qk)
        hd[list(ctx.minus), :] = block / (-model.v[list(ctx.minus)])[:, None]
    return hd


def Gbar_at(ctx: KernelContext, x: float) -> np.ndarray:
    """One-step crossing matrix Gbar(x): cross the remaining gap x in
    the current excursion (straight climb or a single jump past it)."""
    model = ctx.model
    n = model.n
    G = np.zeros((n, n))
    for i in ctx.plus:
        qi = ctx.q[i]
        G[i, i] = np.exp(-qi * x)
        for j in range(n):
            if model.D[i, j] > 0:
                f = model.F[(i, j)]
                G[i, j] += model.D[i, j] / model.v[i] * f.smoothed_tail_integral(x, qi)
    if ctx.minus:
        K, L = ctx.ladder.K, ctx.ladder.L
        block = _tail_outer_integral(model, K, ctx.W, x)
        for col, k in enumerate(ctx.plus):
            qk = ctx.q[k]
            block[:, k] += L[:, col] * model.v[k] * np.exp(-qk * x)
            for j in range(n):
                if model.D[k, j] > 0:
                    f = model.F[(k, j)]
                    block[:, j] += L[:, col] * model.D[k, j] * f.smoothed_tail_integral(x, qk)
        G[list(ctx.minus), :] = block / (-model.v[list(ctx.minus)])[:, None]
    return G


def _check_domain(ctx: KernelContext, theta: float) -> None:
    model = ctx.model
    limit = model.theta_max
    if ctx.plus:
        limit = min(limit, float(np.min(ctx.q[list(ctx.plus)])))
    if not (0.0 < theta < limit):
        raise DomainExceeded(
            f"theta={theta} outside the transform domain (0, {limit})"
        )


def T_of_theta(ctx: KernelContext, theta: float) -> np.ndarray:
    """Resolvent-style factor of the kernel transform, original indexing."""
    _check_domain(ctx, theta)
    model = ctx.model
    minus, plus = list(ctx.minus), list(ctx.plus)
    K, L = ctx.ladder.K, ctx.ladder.L
    T = np.zeros((model.n, model.n))
    try:
        res = np.linalg.inv(theta * np.eye(len(minus)) - K)
    except np.linalg.LinAlgError as exc:
        raise SingularBlock(str(exc)) from exc
    T[np.ix_(minus, minus)] = res
    if plus:
        v_plus = model.v[plus]
        denom = model.c[plus] - theta * v_plus
        if np.min(np.abs(denom)) < 1e-300:
            raise SingularBlock("c - theta v vanishes on an up state")
        T[np.ix_(minus, plus)] = res @ L + L * (v_plus / denom)[None, :]
        T[np.ix_(plus, plus)] = np.diag(-v_plus / denom)
    return T


def H_hat(ctx: KernelContext, theta: float) -> np.ndarray:
    """Transform int exp(theta y) H(dy) = I - diag(v)^-1 T(theta) A(theta)."""
    from .spectral import A_of_theta

    model = ctx.model
    T = T_of_theta(ctx, theta)
    A = A_of_theta(model, theta)
    return np.eye(model.n) - (T @ A) / model.v[:, None]


def Gbar_transform(ctx: KernelContext, alpha: float) -> np.ndarray:
    """Closed form of int_0^inf exp(alpha x) Gbar(x) dx at the decay rate.

    Requires a negative mean drift (uses the null vector of K)."""
    from .spectral import A_of_theta

    _check_domain(ctx, alpha)
    model = ctx.model
    minus, plus = list(ctx.minus), list(ctx.plus)
    K, L = ctx.ladder.K, ctx.ladder.L
    kminus = ctx.ladder.kminus
    if kminus is None:
        raise SingularBlock("transform needs the null vector of K (drift <= 0)")
    n = model.n
    A = A_of_theta(model, alpha)
    CD = model.C + model.D
    W = ctx.W
    pi = model.stationary_dist()
    pi_minus = pi[minus]

    out = np.zeros((n, n))
    if plus:
        denom = model.c[plus] - alpha * model.v[plus]
        out[plus, :] = (A - CD)[plus, :] / (alpha * denom)[:, None]

    m = len(minus)
    try:
        res = np.linalg.inv(alpha * np.eye(m) - K)
        kp = np.outer(kminus, pi_minus)
        res_kp = np.linalg.inv(kp - K)
    except np.linalg.LinAlgError as exc:
        raise SingularBlock(str(exc)) from exc

    term = res @ W @ A
    if plus:
        Zl = np.zeros((m, n))
        Zl[:, plus] = L * (model.v[plus] / denom)[None, :]
        term = term + Zl @ (A - CD)
    pi_full = pi_minus @ W
    term = term - np.outer(kminus, pi_full @ (np.diag(model.v) + model.jump_mean_matrix()))
    term = term - res_kp @ W @ CD
    out[minus, :] = term / (-alpha * model.v[minus])[:, None]
    return out
