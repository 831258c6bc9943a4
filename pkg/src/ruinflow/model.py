"""Markov additive process with signed linear drift and upward jumps.

A model is the tuple (C, D, F, v): C holds the no-jump transition rates,
D the jump-transition rates with jump-size mixtures F[(i, j)], and v the
per-state drift rates.  The background generator is C + D with the
conservation identity C_ii = -(sum_{j != i} C_ij + sum_j D_ij).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import (
    BadMixture,
    NonConservativeRows,
    ParseError,
    Reducible,
    SingularSolve,
    ValidationError,
    ZeroRate,
)
from .mixtures import Atom, Erlang, Exponential, JumpMixture

__all__ = ["MapModel", "Partition", "validate", "load_model", "model_from_dict"]

ROW_TOL = 1e-10


@dataclass(frozen=True)
class Partition:
    """Index sets of the down-drift (v < 0) and up-drift (v > 0) states.

    Both lists are ascending in the original state index; every block
    matrix in the package uses this ordering.
    """

    minus: tuple[int, ...]
    plus: tuple[int, ...]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float).copy()
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class MapModel:
    n: int
    v: np.ndarray
    C: np.ndarray
    D: np.ndarray
    F: dict[tuple[int, int], JumpMixture] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "v", _freeze(self.v))
        object.__setattr__(self, "C", _freeze(self.C))
        object.__setattr__(self, "D", _freeze(self.D))
        diagnostics = _check(self.n, self.v, self.C, self.D, self.F)
        for cls in (NonConservativeRows, ZeroRate, Reducible, BadMixture):
            hits = [msg for kind, msg in diagnostics if kind is cls]
            if hits:
                raise cls("; ".join(hits), diagnostics=[m for _, m in diagnostics])
        if diagnostics:
            raise ValidationError(
                "; ".join(m for _, m in diagnostics),
                diagnostics=[m for _, m in diagnostics],
            )

    # -- structure ------------------------------------------------------------------

    @property
    def c(self) -> np.ndarray:
        """Total transition rate out of each state, c(i) = -C_ii."""
        return -np.diag(self.C)

    @property
    def partition(self) -> Partition:
        v = self.v
        return Partition(
            minus=tuple(int(i) for i in np.flatnonzero(v < 0)),
            plus=tuple(int(i) for i in np.flatnonzero(v > 0)),
        )

    @property
    def theta_max(self) -> float:
        """Joint mgf abscissa of all jump mixtures (inf when atoms only / no jumps)."""
        return min((f.mgf_abscissa for f in self.F.values()), default=math.inf)

    # -- basic operations -------------------------------------------------------------

    def stationary_dist(self) -> np.ndarray:
        """pi with pi (C+D) = 0, pi e = 1, pi > 0."""
        Q = self.C + self.D
        A = Q.T.copy()
        A[-1, :] = 1.0
        b = np.zeros(self.n)
        b[-1] = 1.0
        try:
            pi = np.linalg.solve(A, b)
        except np.linalg.LinAlgError as exc:
            raise SingularSolve(str(exc)) from exc
        if np.max(np.abs(pi @ Q)) > 1e-10 or np.min(pi) <= 0:
            raise SingularSolve("stationary solve left a large residual")
        return pi

    def jump_mean_matrix(self) -> np.ndarray:
        """int y D(dy): entrywise D_ij * mean(F_ij)."""
        M = np.zeros((self.n, self.n))
        for (i, j), f in self.F.items():
            M[i, j] = self.D[i, j] * f.mean()
        return M

    def mean_drift(self) -> float:
        """E(Y(1)) = pi diag(v) e + pi (int y D(dy)) e."""
        pi = self.stationary_dist()
        return float(pi @ self.v + pi @ self.jump_mean_matrix() @ np.ones(self.n))

    def D_hat(self, theta: float) -> np.ndarray:
        """D-hat(theta): entrywise D_ij * mgf(F_ij, theta)."""
        M = np.zeros((self.n, self.n))
        for (i, j), f in self.F.items():
            M[i, j] = self.D[i, j] * f.mgf(theta)
        return M

    def D_hat_prime(self, theta: float) -> np.ndarray:
        M = np.zeros((self.n, self.n))
        for (i, j), f in self.F.items():
            M[i, j] = self.D[i, j] * f.mgf_prime(theta)
        return M

    def dual(self) -> "MapModel":
        """Time-reversed, sign-flipped model: diag(pi)^-1 A' diag(pi) on C and D."""
        pi = self.stationary_dist()
        scale = pi[None, :] / pi[:, None]
        F_dual = {(j, i): f for (i, j), f in self.F.items()}
        return MapModel(
            n=self.n,
            v=self.v,
            C=scale * self.C.T,
            D=scale * self.D.T,
            F=F_dual,
        )


def _check(n, v, C, D, F) -> list[tuple[type, str]]:
    problems: list[tuple[type, str]] = []
    if v.shape != (n,) or C.shape != (n, n) or D.shape != (n, n):
        problems.append((ValidationError, "array shapes inconsistent with state count"))
        return problems
    for i in np.flatnonzero(v == 0.0):
        problems.append((ZeroRate, f"v({i}) = 0"))
    off = C - np.diag(np.diag(C))
    if np.min(off) < 0:
        problems.append((ValidationError, "negative off-diagonal entry in C"))
    if np.min(D) < 0:
        problems.append((ValidationError, "negative entry in D"))
    rows = np.diag(C) + (off.sum(axis=1) + D.sum(axis=1))
    for i in np.flatnonzero(np.abs(rows) > ROW_TOL):
        problems.append(
            (NonConservativeRows, f"row {i}: C_ii + sum of rates = {rows[i]:.3e}")
        )
    # reachability on positive off-diagonal entries of C + D (D_ii self-loops ignored)
    adj = ((off + D - np.diag(np.diag(D))) > 0).astype(int)
    ncomp, _ = connected_components(adj, directed=True, connection="strong")
    if n > 1 and ncomp > 1:
        problems.append((Reducible, "C + D is not irreducible"))
    for (i, j), f in F.items():
        if not (0 <= i < n and 0 <= j < n):
            problems.append((BadMixture, f"jump ({i},{j}) out of range"))
        elif D[i, j] <= 0:
            problems.append((BadMixture, f"jump mixture given for D[{i},{j}] = 0"))
        elif not isinstance(f, JumpMixture):
            problems.append((BadMixture, f"jump ({i},{j}) is not a JumpMixture"))
    if D.shape == (n, n):
        for i, j in zip(*np.nonzero(D > 0)):
            if (int(i), int(j)) not in F:
                problems.append((BadMixture, f"missing jump mixture for D[{i},{j}] > 0"))
    return problems


# -- model files ---------------------------------------------------------------------

_KIND_FIELDS = {
    "atom": ("location",),
    "exp": ("rate",),
    "exponential": ("rate",),
    "erlang": ("shape", "rate"),
}


def _mixture_from_records(records, where: str) -> JumpMixture:
    comps = []
    for rec in records:
        unknown = set(rec) - {"weight", "kind", "params"}
        if unknown:
            raise ParseError(f"{where}: unknown keys {sorted(unknown)}")
        kind = rec.get("kind")
        params = rec.get("params", {})
        if kind not in _KIND_FIELDS:
            raise ParseError(f"{where}: unknown mixture kind {kind!r}")
        if set(params) != set(_KIND_FIELDS[kind]):
            raise ParseError(
                f"{where}: kind {kind!r} takes params {list(_KIND_FIELDS[kind])}"
            )
        if kind == "atom":
            comp = Atom(float(params["location"]))
        elif kind in ("exp", "exponential"):
            comp = Exponential(float(params["rate"]))
        else:
            comp = Erlang(int(params["shape"]), float(params["rate"]))
        comps.append((float(rec.get("weight", 1.0)), comp))
    return JumpMixture(tuple(comps))


def model_from_dict(raw: dict) -> MapModel:
    """Build and validate a model from the documented key-value schema."""
    if not isinstance(raw, dict):
        raise ParseError("model description must be a mapping")
    unknown = set(raw) - {"states", "v", "C", "D", "jumps"}
    if unknown:
        raise ParseError(f"unknown top-level keys {sorted(unknown)}")
    try:
        n = int(raw["states"])
        v = np.asarray(raw["v"], dtype=float)
        C = np.asarray(raw["C"], dtype=float)
        D = np.asarray(raw.get("D", np.zeros((n, n))), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad model fields: {exc}") from exc
    F = {}
    for k, rec in enumerate(raw.get("jumps", [])):
        unknown = set(rec) - {"from", "to", "mixture"}
        if unknown:
            raise ParseError(f"jumps[{k}]: unknown keys {sorted(unknown)}")
        try:
            i, j = int(rec["from"]), int(rec["to"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"jumps[{k}]: {exc}") from exc
        F[(i, j)] = _mixture_from_records(rec.get("mixture", []), f"jumps[{k}]")
    return MapModel(n=n, v=v, C=C, D=D, F=F)


def validate(raw: dict) -> MapModel:
    """Alias of :func:`model_from_dict`; raises a ValidationError subclass on defects."""
    return model_from_dict(raw)


def load_model(path) -> MapModel:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from exc
    return model_from_dict(raw)
