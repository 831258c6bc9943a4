"""Jump-size distributions as finite mixtures of atoms, exponentials and Erlangs.

The family is dense in the distributions on (0, inf) and keeps every
integral the solver needs in closed form: moment generating functions,
matrix-weighted tails  int_w^inf exp((y-w)K) F(dy)  and their outer
integrals over w, plus the exponentially smoothed truncations that appear
in the semi-Markov kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import AbscissaExceeded, BadMixture, SpectralClash

__all__ = ["Atom", "Exponential", "Erlang", "JumpMixture"]


@dataclass(frozen=True)
class Atom:
    location: float


@dataclass(frozen=True)
class Exponential:
    rate: float


@dataclass(frozen=True)
class Erlang:
    shape: int
    rate: float


def _int_pow_exp_smoothed(p: int, lam: float, q: float, x: float) -> float:
    """exp(-q*x) * int_0^x y^p exp(-(lam-q)*y) dy, stable for any sign of lam-q."""
    if x <= 0.0:
        return 0.0
    s = lam - q
    if abs(s) * x < 1e-6:
        # series in s avoids cancellation near lam == q
        total = 0.0
        term_pow = x ** (p + 1)
        sm = 1.0
        for m in range(12):
            total += sm * term_pow / (math.factorial(m) * (p + m + 1))
            sm *= -s
            term_pow *= x
        return math.exp(-q * x) * total
    head = math.exp(-q * x)
    tail = math.exp(-lam * x) * sum((s * x) ** r / math.factorial(r) for r in range(p + 1))
    return math.factorial(p) / s ** (p + 1) * (head - tail)


def _upper_pow_exp(p: int, lam: float, x: float) -> float:
    """int_x^inf w^p exp(-lam*w) dw for integer p >= 0."""
    if x <= 0.0:
        return math.factorial(p) / lam ** (p + 1)
    acc = sum((lam * x) ** r / math.factorial(r) for r in range(p + 1))
    return math.factorial(p) / lam ** (p + 1) * math.exp(-lam * x) * acc


def _phi1(Z: np.ndarray) -> np.ndarray:
    """phi_1(Z) = sum_m Z^m / (m+1)!  =  int_0^1 exp(t Z) dt."""
    n = Z.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = Z
    block[:n, n:] = np.eye(n)
    return expm(block)[:n, n:]


def _resolvent_powers(K: np.ndarray, lam: float, kmax: int) -> list[np.ndarray]:
    """[(lam I - K)^-1, ..., (lam I - K)^-kmax]; requires spectra(K) < lam."""
    if np.max(np.linalg.eigvals(K).real) >= lam:
        raise SpectralClash(
            f"spectral abscissa of the matrix exponent is not below the rate {lam}"
        )
    inv = np.linalg.inv(lam * np.eye(K.shape[0]) - K)
    powers = [inv]
    for _ in range(kmax - 1):
        powers.append(powers[-1] @ inv)
    return powers


@dataclass(frozen=True)
class JumpMixture:
    """Finite mixture of strictly positive jump sizes.

    ``components`` is a tuple of (weight, component) pairs; weights are
    nonnegative and sum to one, and all mass sits strictly above zero.
    """

    components: tuple[tuple[float, Atom | Exponential | Erlang], ...]

    def __post_init__(self):
        problems = []
        if not self.components:
            problems.append("mixture has no components")
        total = 0.0
        for w, comp in self.components:
            total += w
            if w < 0:
                problems.append(f"negative weight {w}")
            if isinstance(comp, Atom):
                if comp.location <= 0:
                    problems.append(f"atom location {comp.location} must be > 0")
            elif isinstance(comp, Exponential):
                if comp.rate <= 0:
                    problems.append(f"exponential rate {comp.rate} must be > 0")
            elif isinstance(comp, Erlang):
                if comp.rate <= 0:
                    problems.append(f"erlang rate {comp.rate} must be > 0")
                if not isinstance(comp.shape, int) or comp.shape < 1:
                    problems.append(f"erlang shape {comp.shape} must be an integer >= 1")
            else:
                problems.append(f"unknown component {comp!r}")
        if self.components and abs(total - 1.0) > 1e-12:
            problems.append(f"weights sum to {total}, not 1")
        if problems:
            raise BadMixture("; ".join(problems), diagnostics=problems)

    # -- convenience constructors -------------------------------------------------

    @staticmethod
    def atom(location: float) -> "JumpMixture":
        return JumpMixture(((1.0, Atom(location)),))

    @staticmethod
    def exponential(rate: float) -> "JumpMixture":
        return JumpMixture(((1.0, Exponential(rate)),))

    @staticmethod
    def erlang(shape: int, rate: float) -> "JumpMixture":
        return JumpMixture(((1.0, Erlang(shape, rate)),))

    # -- scalar transforms --------------------------------------------------------

    @property
    def mgf_abscissa(self) -> float:
        """Smallest rate among Exponential/Erlang components (inf if atoms only)."""
        rates = [c.rate for _, c in self.components if isinstance(c, (Exponential, Erlang))]
        return min(rates) if rates else math.inf

    def mean(self) -> float:
        acc = 0.0
        for w, c in self.components:
            if isinstance(c, Atom):
                acc += w * c.location
            elif isinstance(c, Exponential):
                acc += w / c.rate
            else:
                acc += w * c.shape / c.rate
        return acc

    def mgf(self, theta: float) -> float:
        if theta >= self.mgf_abscissa:
            raise AbscissaExceeded(f"theta={theta} >= abscissa {self.mgf_abscissa}")
        acc = 0.0
        for w, c in self.components:
            if isinstance(c, Atom):
                acc += w * math.exp(theta * c.location)
            elif isinstance(c, Exponential):
                acc += w * c.rate / (c.rate - theta)
            else:
                acc += w * (c.rate / (c.rate - theta)) ** c.shape
        return acc

    def mgf_prime(self, theta: float) -> float:
        if theta >= self.mgf_abscissa:
            raise AbscissaExceeded(f"theta={theta} >= abscissa {self.mgf_abscissa}")
        acc = 0.0
        for w, c in self.components:
            if isinstance(c, Atom):
                acc += w * c.location * math.exp(theta * c.location)
            elif isinstance(c, Exponential):
                acc += w * c.rate / (c.rate - theta) ** 2
            else:
                acc += w * c.shape * c.rate ** c.shape / (c.rate - theta) ** (c.shape + 1)
        return acc

    def cdf(self, x: float) -> float:
        if x < 0.0:
            return 0.0
        acc = 0.0
        for w, c in self.components:
            if isinstance(c, Atom):
                acc += w if x >= c.location else 0.0
            elif isinstance(c, Exponential):
                acc += w * (1.0 - math.exp(-c.rate * x))
            else:
                tail = math.exp(-c.rate * x) * sum(
                    (c.rate * x) ** m / math.factorial(m) for m in range(c.shape)
                )
                acc += w * (1.0 - tail)
        return acc

    # -- matrix-weighted transforms -----------------------------------------------

    def matrix_tail(self, w: float, K: np.ndarray) -> np.ndarray:
        """int_w^inf exp((y-w) K) F(dy); an atom exactly at y == w is included."""
        K = np.atleast_2d(np.asarray(K, dtype=float))
        out = np.zeros_like(K)
        for weight, c in self.components:
            if isinstance(c, Atom):
                if c.location >= w:
                    out += weight * expm((c.location - w) * K)
            elif isinstance(c, Exponential):
                (inv,) = _resolvent_powers(K, c.rate, 1)
                out += weight * math.exp(-c.rate * w) * c.rate * inv
            else:
                k, lam = c.shape, c.rate
                powers = _resolvent_powers(K, lam, k)
                coeff = lam ** k / math.factorial(k - 1)
                for m in range(k):
                    out += (
                        weight
                        * math.exp(-lam * w)
                        * math.comb(k - 1, m)
                        * w ** (k - 1 - m)
                        * coeff
                        * math.factorial(m)
                        * powers[m]
                    )
        return out

    def matrix_tail_integral(self, x: float, K: np.ndarray) -> np.ndarray:
        """int_x^inf [ int_w^inf exp((y-w) K) F(dy) ] dw, closed form."""
        K = np.atleast_2d(np.asarray(K, dtype=float))
        out = np.zeros_like(K)
        for weight, c in self.components:
            if isinstance(c, Atom):
                span = c.location - x
                if span > 0.0:
                    out += weight * span * _phi1(span * K)
            elif isinstance(c, Exponential):
                (inv,) = _resolvent_powers(K, c.rate, 1)
                out += weight * math.exp(-c.rate * x) * inv
            else:
                k, lam = c.shape, c.rate
                powers = _resolvent_powers(K, lam, k)
                coeff = lam ** k / math.factorial(k - 1)
                for m in range(k):
                    out += (
                        weight
                        * math.comb(k - 1, m)
                        * coeff
                        * math.factorial(m)
                        * _upper_pow_exp(k - 1 - m, lam, x)
                        * powers[m]
                    )
        return out

    # -- exponentially smoothed truncations ----------------------------------------

    def smoothed_mgf(self, x: float, q: float) -> float:
        """exp(-q*x) * int_[0,x] exp(q*y) F(dy)."""
        if x < 0.0:
            return 0.0
        acc = 0.0
        for w, c in self.components:
            if isinstance(c, Atom):
                if c.location <= x:
                    acc += w * math.exp(-q * (x - c.location))
            elif isinstance(c, Exponential):
                acc += w * c.rate * _int_pow_exp_smoothed(0, c.rate, q, x)
            else:
                k, lam = c.shape, c.rate
                acc += w * lam ** k / math.factorial(k - 1) * _int_pow_exp_smoothed(k - 1, lam, q, x)
        return acc

    def smoothed_tail_integral(self, x: float, q: float) -> float:
        """exp(-q*x) * int_0^x exp(q*z) (1 - F(z)) dz."""
        if x <= 0.0:
            return 0.0
        acc = 0.0
        for w, c in self.components:
            if isinstance(c, Atom):
                cut = min(x, c.location)
                acc += w * (math.exp(-q * (x - cut)) - math.exp(-q * x)) / q
            elif isinstance(c, Exponential):
                acc += w * _int_pow_exp_smoothed(0, c.rate, q, x)
            else:
                k, lam = c.shape, c.rate
                for m in range(k):
                    acc += w * lam ** m / math.factorial(m) * _int_pow_exp_smoothed(m, lam, q, x)
        return acc

    # -- sampling -------------------------------------------------------------------

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        weights = np.array([w for w, _ in self.components])
        choice = rng.choice(len(weights), size=size, p=weights / weights.sum())
        out = np.empty(size)
        for idx, (_, c) in enumerate(self.components):
            mask = choice == idx
            m = int(mask.sum())
            if m == 0:
                continue
            if isinstance(c, Atom):
                out[mask] = c.location
            elif isinstance(c, Exponential):
                out[mask] = rng.exponential(1.0 / c.rate, size=m)
            else:
                out[mask] = rng.gamma(c.shape, 1.0 / c.rate, size=m)
        return out
