"""Perron-root machinery for the ML matrix family C + D-hat(theta) + theta diag(v).

kappa(theta) is the dominant real eigenvalue of that family: convex,
kappa(0) = 0 and kappa'(0) equals the mean drift.  Under a negative
drift and light-tailed jumps, kappa has a unique positive zero alpha,
the exponential decay rate of the upper-level hitting probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AbscissaExceeded, DriftNonNegative, NoRoot
from .model import MapModel

__all__ = ["SpectralPoint", "A_of_theta", "perron", "kappa_prime", "decay_rate"]


@dataclass(frozen=True)
class SpectralPoint:
    theta: float
    kappa: float
    mu: np.ndarray
    h: np.ndarray
    normalization: str


def A_of_theta(model: MapModel, theta: float) -> np.ndarray:
    """C + D-hat(theta) + theta diag(v)."""
    if theta >= model.theta_max:
        raise AbscissaExceeded(f"theta={theta} >= mgf abscissa {model.theta_max}")
    return model.C + model.D_hat(theta) + theta * np.diag(model.v)


def _power_pair(A: np.ndarray, tol: float = 1e-13, max_iter: int = 20_000):
    """Dominant eigentriple of an ML matrix by power iteration on the
    nonnegative shift A + s I; s exceeds the whole matrix magnitude so the
    shifted matrix is primitive with a safe spectral gap."""
    n = A.shape[0]
    if n == 1:
        return float(A[0, 0]), np.ones(1), np.ones(1)
    s = 1.0 + np.max(np.abs(A))
    B = A + s * np.eye(n)
    scale = np.max(np.abs(B))
    h = np.full(n, 1.0 / n)
    mu = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        h_new = B @ h
        mu_new = mu @ B
        rho = float(h @ h_new / (h @ h))
        h_new /= np.linalg.norm(h_new)
        mu_new /= np.linalg.norm(mu_new)
        res = max(
            np.max(np.abs(B @ h_new - rho * h_new)),
            np.max(np.abs(mu_new @ B - rho * mu_new)),
        )
        h, mu = h_new, mu_new
        if res < tol * scale:
            break
    else:
        # strongly non-normal A (one dominant off-diagonal entry makes the
        # shifted matrix nearly defective): fall back to a dense solve
        return _eig_pair(A)
    kappa = float(mu @ A @ h / (mu @ h))
    return kappa, mu, h


def _eig_pair(A: np.ndarray):
    """Dominant eigentriple by a dense eigendecomposition (the dominant
    eigenvalue of an ML matrix is real with sign-constant eigenvectors)."""
    w, V = np.linalg.eig(A)
    idx = int(np.argmax(w.real))
    wl, U = np.linalg.eig(A.T)
    idxl = int(np.argmin(np.abs(wl - w[idx])))
    h = np.abs(np.real(V[:, idx]))
    mu = np.abs(np.real(U[:, idxl]))
    return float(w[idx].real), mu, h


def perron(model: MapModel, theta: float, kminus: np.ndarray | None = None) -> SpectralPoint:
    """Dominant eigenpair of A(theta) with positive eigenvectors.

    With ``kminus`` given, mu is scaled so that mu^- k^- = 1 and then h so
    that mu h = 1; otherwise mu sums to one and mu h = 1.
    """
    A = A_of_theta(model, theta)
    kappa, mu, h = _power_pair(A)
    mu = np.abs(mu)
    h = np.abs(h)
    if kminus is not None:
        minus = list(model.partition.minus)
        mu = mu / (mu[minus] @ kminus)
        tag = "mu-.k-=1, mu.h=1"
    else:
        mu = mu / mu.sum()
        tag = "mu.e=1, mu.h=1"
    h = h / (mu @ h)
    return SpectralPoint(theta=theta, kappa=kappa, mu=mu, h=h, normalization=tag)


def kappa_prime(model: MapModel, point: SpectralPoint) -> float:
    """kappa'(theta) = mu (diag(v) + D-hat'(theta)) h under mu h = 1."""
    inner = np.diag(model.v) + model.D_hat_prime(point.theta)
    return float(point.mu @ inner @ point.h / (point.mu @ point.h))


def _kappa(model: MapModel, theta: float) -> float:
    A = A_of_theta(model, theta)
    kappa, _, _ = _power_pair(A)
    return kappa


def decay_rate(model: MapModel, kminus: np.ndarray | None = None,
               tol: float = 1e-13) -> float:
    """The unique alpha > 0 with kappa(alpha) = 0 (drift must be negative)."""
    if model.mean_drift() >= 0:
        raise DriftNonNegative("decay rate requires a negative mean drift")
    theta_max = model.theta_max
    hi = None
    if math.isfinite(theta_max):
        probe = theta_max * (1.0 - 1e-8)
        if _kappa(model, probe) > 0:
            hi = probe
    if hi is None:
        # geometric expansion; atoms-only or jump-free models may have no root
        t = 1e-2
        limit = theta_max if math.isfinite(theta_max) else 2.0 ** 40
        while t < limit:
            t = min(t * 2.0, limit * (1.0 - 1e-8) if math.isfinite(theta_max) else t * 1.0)
            if _kappa(model, t) > 0:
                hi = t
                break
            if not math.isfinite(theta_max):
                t *= 2.0
            else:
                break
        if hi is None:
            raise NoRoot("kappa stays nonpositive on the admissible interval")
    lo = min(1e-8, hi * 1e-6)
    if _kappa(model, lo) >= 0:
        lo = 0.0
    # bisection, robust under convexity
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo < tol:
            break
        if _kappa(model, mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
