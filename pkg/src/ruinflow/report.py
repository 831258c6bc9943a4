"""One-shot invariant suite: every internal identity the solver relies on,
evaluated on a given model and returned as a flat structured record.

The quadrature helpers here are deliberately independent of the
closed-form transforms: they integrate the kernel density / crossing
bound numerically, so agreement certifies the analytic path end to end.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from .kernel import (
    Gbar_at,
    Gbar_transform,
    H_density,
    H_hat,
    KernelContext,
    T_of_theta,
    make_context,
)
from .ladder import descent_residual, solve_descent
from .mixtures import Atom
from .model import MapModel
from .renewal import asymptotics, nu_vector, twisted_row_sums
from .spectral import A_of_theta, decay_rate, perron

__all__ = [
    "envelope_rate",
    "Hhat_by_quadrature",
    "Gbar_transform_by_quadrature",
    "invariant_report",
]


def envelope_rate(model: MapModel) -> float:
    """Exponential envelope rate of the kernel tails: every entry of the
    kernel density and of Gbar is O(exp(-rate * x)) beyond the largest atom."""
    rates = []
    plus = list(model.partition.plus)
    if plus:
        rates.append(float(np.min(model.c[plus] / model.v[plus])))
    for f in model.F.values():
        if math.isfinite(f.mgf_abscissa):
            rates.append(f.mgf_abscissa)
    return min(rates) if rates else math.inf


def _largest_atom(model: MapModel) -> float:
    locs = [
        c.location
        for f in model.F.values()
        for _, c in f.components
        if isinstance(c, Atom)
    ]
    return max(locs, default=0.0)


def _entrywise_quad(fn, n: int, upper: float, breakpoints) -> np.ndarray:
    out = np.zeros((n, n))
    pts = [b for b in breakpoints if 0.0 < b < upper]
    for i in range(n):
        for j in range(n):
            val, _ = quad(lambda y: fn(y)[i, j], 0.0, upper,
                          points=pts or None, limit=300)
            out[i, j] = val
    return out


def _upper_limit(model: MapModel, theta: float) -> float:
    gap = envelope_rate(model) - theta
    if not math.isfinite(gap) or gap <= 0:
        # atoms only: support of every kernel measure is bounded
        return _largest_atom(model) + 1.0
    return _largest_atom(model) + 40.0 / gap


def Hhat_by_quadrature(ctx: KernelContext, theta: float) -> np.ndarray:
    """int_0^inf exp(theta y) H'(y) dy, integrated numerically."""
    model = ctx.model
    upper = _upper_limit(model, theta)
    atoms = [
        c.location
        for f in model.F.values()
        for _, c in f.components
        if isinstance(c, Atom)
    ]
    return _entrywise_quad(
        lambda y: math.exp(theta * y) * H_density(ctx, y), model.n, upper, atoms
    )


def Gbar_transform_by_quadrature(ctx: KernelContext, alpha: float) -> np.ndarray:
    """int_0^inf exp(alpha x) Gbar(x) dx, integrated numerically."""
    model = ctx.model
    upper = _upper_limit(model, alpha)
    atoms = [
        c.location
        for f in model.F.values()
        for _, c in f.components
        if isinstance(c, Atom)
    ]
    return _entrywise_quad(
        lambda x: math.exp(alpha * x) * Gbar_at(ctx, x), model.n, upper, atoms
    )


def invariant_report(model: MapModel, n_theta: int = 10,
                     with_quadrature: bool = True) -> dict:
    """All internal identities as residuals; used by the CLI --report flag."""
    ctx = make_context(model)
    lad = ctx.ladder
    part = model.partition
    minus, plus = list(part.minus), list(part.plus)
    pi = model.stationary_dist()
    rec: dict[str, float] = {}
    rec["drift"] = model.mean_drift()
    rec["stationary_residual"] = float(np.max(np.abs(pi @ (model.C + model.D))))
    rec["ladder_residual"] = lad.residual

    if lad.kminus is not None:
        rec["ladder_null_left"] = float(np.max(np.abs(pi[minus] @ lad.K)))
        if plus:
            rec["ladder_mass_balance"] = float(
                np.max(np.abs(pi[minus] @ lad.L - pi[plus]))
            )
        rec["ladder_null_right"] = float(np.max(np.abs(lad.K @ lad.kminus)))

    # dual pair solves the descent-form equation of the reversed model
    rec["dual_consistency"] = descent_residual(model.dual(), lad.Qdual, lad.Rdual)

    theta_cap = model.theta_max
    if plus:
        theta_cap = min(theta_cap, float(np.min(model.c[plus] / model.v[plus])))

    if rec["drift"] < 0:
        alpha = decay_rate(model)
        rec["alpha"] = alpha
        point = perron(model, alpha, kminus=lad.kminus)
        res = asymptotics(model, ctx)
        rec["eta_alpha"] = res.eta_alpha
        rec["kappa_at_alpha_residual"] = float(
            np.max(np.abs(point.mu @ A_of_theta(model, alpha)))
        )
        rec["twisted_row_sum_dev"] = float(
            np.max(np.abs(twisted_row_sums(ctx, alpha, point.h) - 1.0))
        )
        nu = res.nu
        rec["nu_invariance"] = float(np.max(np.abs(nu @ H_hat(ctx, alpha) - nu)))
        rec["nu_alpha_identity"] = abs(
            float(nu[minus] @ (lad.kminus / (-model.v[minus]))) - alpha
        )
        rec["prefactor_row_sum_dev"] = float(
            np.max(np.abs(res.prefactor_full.sum(axis=1) - res.prefactor_total))
        )
        rec["envelope_rate"] = envelope_rate(model)
        rec["envelope_margin"] = rec["envelope_rate"] - alpha

        thetas = np.linspace(0.1, 0.9, n_theta) * min(theta_cap, 4.0 * alpha)
        wh = 0.0
        for th in thetas:
            A = A_of_theta(model, th)
            T = T_of_theta(ctx, th)
            lhs = np.linalg.solve(T, np.diag(model.v) @ (np.eye(model.n) - H_hat(ctx, th)))
            wh = max(wh, float(np.max(np.abs(A - lhs))))
        rec["wiener_hopf_residual"] = wh

        if with_quadrature:
            th = 0.5 * min(theta_cap, 2.0 * alpha)
            Hc = H_hat(ctx, th)
            Hq = Hhat_by_quadrature(ctx, th)
            rec["hhat_vs_quadrature"] = float(
                np.max(np.abs(Hc - Hq)) / max(1.0, np.max(np.abs(Hc)))
            )
            Gc = Gbar_transform(ctx, alpha)
            Gq = Gbar_transform_by_quadrature(ctx, alpha)
            rec["gbar_transform_vs_quadrature"] = float(
                np.max(np.abs(Gc - Gq)) / max(1.0, np.max(np.abs(Gc)))
            )

        Q, R, dres = solve_descent(model)
        rec["descent_residual"] = dres
        rec["descent_generator_row_sums"] = float(np.max(np.abs(Q.sum(axis=1))))
    return rec
