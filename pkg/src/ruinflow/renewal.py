"""Exact hitting probabilities and their exponential asymptotics.

``solve_hitting`` marches the Markov renewal equation

    Psi(x) = Gbar(x) + int_0^x H(dy) Psi(x - y)

on a uniform grid (trapezoid rule on the closed-form kernel density,
implicit in the left endpoint), producing Psi_ij(x) = P(hit level x in
background state j | start at level 0 in state i, stationary-increment
start convention).

``asymptotics`` assembles the exponential-decay description

    Psi_ij(x) ~ P_ij * exp(-alpha x),    x -> infinity,

with alpha the positive zero of the Perron exponent and the prefactor
matrix built from the eigenvectors at alpha, the null vector of the
ladder exponent and the mean-shift constants eta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadGrid, HorizonTooShort, SingularBlock
from .kernel import H_density, Gbar_at, KernelContext, T_of_theta, H_hat, make_context
from .ladder import solve_descent
from .model import MapModel
from .spectral import SpectralPoint, decay_rate, kappa_prime, perron

__all__ = [
    "HittingTable",
    "AsymptoticResult",
    "MatchReport",
    "FluidTail",
    "solve_hitting",
    "nu_vector",
    "asymptotics",
    "asymptote_match",
    "fluid_tail",
    "twisted_row_sums",
]


@dataclass(frozen=True)
class HittingTable:
    x: np.ndarray
    psi: np.ndarray  # shape (len(x), n, n)
    step: float

    @property
    def total(self) -> np.ndarray:
        """P(level is ever hit | start state), one column per grid point's row sum."""
        return self.psi.sum(axis=2)


@dataclass(frozen=True)
class AsymptoticResult:
    alpha: float
    mu: np.ndarray
    h: np.ndarray
    eta_alpha: float
    eta_zero: float
    nu: np.ndarray
    gamma: np.ndarray
    prefactor_full: np.ndarray
    prefactor_total: np.ndarray
    prefactor_continuous: np.ndarray


@dataclass(frozen=True)
class MatchReport:
    window_lo: float
    window_hi: float
    max_abs_dev: float
    max_rel_dev_total: float


@dataclass(frozen=True)
class FluidTail:
    alpha: float
    beta: np.ndarray
    coefficients: np.ndarray
    descent_residual: float


def solve_hitting(model: MapModel, xmax: float, step: float,
                  ctx: KernelContext | None = None) -> HittingTable:
    """March the renewal equation on the grid 0, step, ..., xmax."""
    if step <= 0 or xmax <= 0:
        raise BadGrid("step and xmax must be positive")
    ratio = xmax / step
    N = int(round(ratio))
    if N < 1 or abs(ratio - N) > 1e-9 * max(1.0, N):
        raise BadGrid(f"xmax={xmax} is not an integer multiple of step={step}")
    if ctx is None:
        ctx = make_context(model)
    n = model.n
    hd = np.empty((N + 1, n, n))
    gb = np.empty((N + 1, n, n))
    for k in range(N + 1):
        y = k * step
        hd[k] = H_density(ctx, y)
        gb[k] = Gbar_at(ctx, y)
    psi = np.empty((N + 1, n, n))
    psi[0] = gb[0]
    lhs = np.eye(n) - 0.5 * step * hd[0]
    try:
        lhs_inv = np.linalg.inv(lhs)
    except np.linalg.LinAlgError as exc:
        raise SingularBlock(str(exc)) from exc
    for k in range(1, N + 1):
        rhs = gb[k] + 0.5 * step * (hd[k] @ psi[0])
        if k > 1:
            rhs = rhs + step * np.einsum("lab,lbc->ac", hd[1:k], psi[k - 1:0:-1])
        psi[k] = lhs_inv @ rhs
    return HittingTable(x=np.arange(N + 1) * step, psi=psi, step=step)


def nu_vector(ctx: KernelContext, point: SpectralPoint) -> np.ndarray:
    """Left invariant row nu = -mu T(alpha)^-1 diag(v) of the twisted chain."""
    T = T_of_theta(ctx, point.theta)
    try:
        y = np.linalg.solve(T.T, point.mu)
    except np.linalg.LinAlgError as exc:
        raise SingularBlock(str(exc)) from exc
    return -(y * ctx.model.v)


def _gamma_matrix(ctx: KernelContext, alpha: float) -> np.ndarray:
    """Mean-shifted defect matrix entering the full prefactor; rows live
    on the down-drift states, up-drift rows vanish."""
    model = ctx.model
    minus = list(ctx.minus)
    K = ctx.ladder.K
    kminus = ctx.ladder.kminus
    pi = model.stationary_dist()
    pi_minus = pi[minus]
    W = ctx.W
    n, m = model.n, len(minus)
    CD = model.C + model.D
    kp = np.outer(kminus, pi_minus)
    try:
        res_kp = np.linalg.inv(kp - K)
    except np.linalg.LinAlgError as exc:
        raise SingularBlock(str(exc)) from exc
    pi_full = pi_minus @ W
    block = -np.outer(kminus, pi_full @ (np.diag(model.v) + model.jump_mean_matrix()))
    block = block - (alpha * np.eye(m) - kp) @ res_kp @ W @ CD / alpha
    gamma = np.zeros((n, n))
    gamma[minus, :] = block
    return gamma


def asymptotics(model: MapModel, ctx: KernelContext | None = None) -> AsymptoticResult:
    """Decay rate and all prefactors of Psi(x) ~ P exp(-alpha x)."""
    if ctx is None:
        ctx = make_context(model)
    kminus = ctx.ladder.kminus
    alpha = decay_rate(model)
    point = perron(model, alpha, kminus=kminus)
    eta_alpha = kappa_prime(model, point)
    eta_zero = model.mean_drift()  # kappa'(0) under the same normalization
    nu = nu_vector(ctx, point)
    gamma = _gamma_matrix(ctx, alpha)
    CD = model.C + model.D
    pre_full = np.outer(point.h, point.mu @ (gamma - CD / alpha)) / eta_alpha
    pre_total = -eta_zero * point.h / eta_alpha
    plus = list(ctx.plus)
    weights = np.zeros(model.n)
    if plus:
        mu_minus = point.mu[list(ctx.minus)]
        mu_plus = point.mu[plus]
        weights[plus] = (mu_plus - mu_minus @ ctx.ladder.L) * model.v[plus]
    pre_cont = np.outer(point.h, weights) / eta_alpha
    return AsymptoticResult(
        alpha=alpha,
        mu=point.mu,
        h=point.h,
        eta_alpha=eta_alpha,
        eta_zero=eta_zero,
        nu=nu,
        gamma=gamma,
        prefactor_full=pre_full,
        prefactor_total=pre_total,
        prefactor_continuous=pre_cont,
    )


def asymptote_match(table: HittingTable, result: AsymptoticResult,
                    window: float = 0.2) -> MatchReport:
    """Compare exp(alpha x) Psi(x) with the prefactor over the last part
    of the grid; the horizon must span at least 5 decay lengths."""
    xmax = float(table.x[-1])
    if xmax < 5.0 / result.alpha:
        raise HorizonTooShort(
            f"xmax={xmax} is below five decay lengths {5.0 / result.alpha:.3g}"
        )
    lo = (1.0 - window) * xmax
    mask = table.x >= lo
    scaled = np.exp(result.alpha * table.x[mask])[:, None, None] * table.psi[mask]
    dev = np.abs(scaled - result.prefactor_full[None, :, :])
    tot = scaled.sum(axis=2)
    rel = np.abs(tot - result.prefactor_total[None, :]) / np.abs(
        result.prefactor_total[None, :]
    )
    return MatchReport(
        window_lo=float(lo),
        window_hi=xmax,
        max_abs_dev=float(dev.max()),
        max_rel_dev_total=float(rel.max()),
    )


def fluid_tail(model: MapModel) -> FluidTail:
    """Tail coefficients of the stationary buffer content V:

        P(V > x, M = i)  ~  coefficients[i] * exp(-alpha x).
    """
    Q, R, residual = solve_descent(model)
    minus = list(model.partition.minus)
    m = len(minus)
    A = Q.T.copy()
    A[-1, :] = 1.0
    b = np.zeros(m)
    b[-1] = 1.0
    try:
        beta = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularBlock(str(exc)) from exc
    ctx = make_context(model)
    alpha = decay_rate(model)
    point = perron(model, alpha, kminus=ctx.ladder.kminus)
    eta_alpha = kappa_prime(model, point)
    eta_zero = model.mean_drift()
    coeff = -eta_zero * point.mu * float(beta @ point.h[minus]) / eta_alpha
    return FluidTail(alpha=alpha, beta=beta, coefficients=coeff,
                     descent_residual=residual)


def twisted_row_sums(ctx: KernelContext, alpha: float, h: np.ndarray) -> np.ndarray:
    """Row sums of diag(h)^-1 H_hat(alpha) diag(h); all equal 1 at the decay rate."""
    return (H_hat(ctx, alpha) @ h) / h
