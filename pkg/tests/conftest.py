"""Shared fixtures: the two classical reference models, the fixed mixed
3-state cross-oracle model, and a deterministic factory of randomized
drift-negative 3-state models with mixed jump families."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from ruinflow.mixtures import Atom, Erlang, Exponential, JumpMixture
from ruinflow.model import MapModel

REPO_ROOT = Path(__file__).resolve().parents[1]
MODELS_DIR = REPO_ROOT / "models"


def make_cl() -> MapModel:
    """1-state classical risk model: v=-1, claim rate 0.5, Exp(1) claims.

    Closed form: psi(x) = 0.5 exp(-0.5 x)."""
    return MapModel(
        n=1,
        v=np.array([-1.0]),
        C=np.array([[-0.5]]),
        D=np.array([[0.5]]),
        F={(0, 0): JumpMixture.exponential(1.0)},
    )


def make_onoff() -> MapModel:
    """2-state jump-free on-off fluid: v=(-1, 1), switch rates 1 and 2."""
    return MapModel(
        n=2,
        v=np.array([-1.0, 1.0]),
        C=np.array([[-1.0, 1.0], [2.0, -2.0]]),
        D=np.zeros((2, 2)),
        F={},
    )


def make_mix3() -> MapModel:
    """Fixed mixed 3-state model (two down states, one up state, smooth
    exponential/Erlang jump mixtures) used by the cross-oracle tests."""
    C = np.array([[-3.0, 1.0, 0.8],
                  [0.7, -3.2, 1.3],
                  [1.5, 1.1, -3.1]])
    D = np.array([[1.2, 0.0, 0.0],
                  [0.0, 0.0, 1.2],
                  [0.0, 0.5, 0.0]])
    F = {
        (0, 0): JumpMixture(((0.5, Exponential(3.0)), (0.5, Erlang(2, 5.0)))),
        (1, 2): JumpMixture.erlang(2, 6.0),
        (2, 1): JumpMixture.exponential(4.0),
    }
    return MapModel(n=3, v=np.array([-2.0, -1.0, 1.0]), C=C, D=D, F=F)


def _random_mixture(rng: np.random.Generator) -> JumpMixture:
    kind = rng.integers(0, 3)
    if kind == 0:
        return JumpMixture.atom(float(rng.uniform(0.2, 1.2)))
    if kind == 1:
        return JumpMixture.exponential(float(rng.uniform(1.5, 4.0)))
    return JumpMixture.erlang(int(rng.integers(2, 4)), float(rng.uniform(2.5, 6.0)))


def make_random_model(seed: int) -> MapModel:
    """Deterministic randomized 3-state model: both drift signs present,
    negative mean drift, 2-3 jump transitions with mixed atom/Exp/Erlang
    distributions."""
    for attempt in range(100):
        rng = np.random.default_rng([seed, attempt])
        n = 3
        signs = np.array([-1.0, -1.0, 1.0])
        rng.shuffle(signs)
        v = signs * rng.uniform(0.6, 2.0, size=n)
        C = rng.uniform(0.2, 1.5, size=(n, n))
        np.fill_diagonal(C, 0.0)
        D = np.zeros((n, n))
        F = {}
        for _ in range(int(rng.integers(2, 4))):
            i, j = int(rng.integers(0, n)), int(rng.integers(0, n))
            if D[i, j] > 0:
                continue
            D[i, j] = rng.uniform(0.2, 0.8)
            F[(i, j)] = _random_mixture(rng)
        np.fill_diagonal(C, -(C.sum(axis=1) + D.sum(axis=1)))
        try:
            model = MapModel(n=n, v=v, C=C, D=D, F=F)
        except Exception:
            continue
        if model.mean_drift() < -0.05 and model.partition.minus and model.partition.plus:
            return model
    raise RuntimeError(f"no admissible random model for seed {seed}")


@pytest.fixture(scope="session")
def cl_model() -> MapModel:
    return make_cl()


@pytest.fixture(scope="session")
def onoff_model() -> MapModel:
    return make_onoff()


@pytest.fixture(scope="session")
def mix3_model() -> MapModel:
    return make_mix3()


@pytest.fixture(scope="session")
def random_models() -> list[MapModel]:
    return [make_random_model(s) for s in range(10)]
