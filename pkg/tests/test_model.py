"""Model validation, stationary structure and the time-reversed dual."""

import numpy as np
import pytest

from ruinflow.errors import (
    BadMixture,
    NonConservativeRows,
    ParseError,
    Reducible,
    ZeroRate,
)
from ruinflow.mixtures import JumpMixture
from ruinflow.model import MapModel, model_from_dict

from conftest import make_random_model


def _onoff_dict():
    return {
        "states": 2,
        "v": [-1.0, 1.0],
        "C": [[-1.0, 1.0], [2.0, -2.0]],
        "D": [[0.0, 0.0], [0.0, 0.0]],
        "jumps": [],
    }


# -- validation -------------------------------------------------------------------------


def test_nonconservative_row_named():
    raw = _onoff_dict()
    raw["C"][1][1] = -1.5
    with pytest.raises(NonConservativeRows) as exc:
        model_from_dict(raw)
    assert "row 1" in str(exc.value)


def test_zero_drift_rate_rejected():
    raw = _onoff_dict()
    raw["v"][0] = 0.0
    with pytest.raises(ZeroRate):
        model_from_dict(raw)


def test_reducible_chain_rejected():
    with pytest.raises(Reducible):
        MapModel(
            n=2,
            v=np.array([-1.0, 1.0]),
            C=np.array([[0.0, 0.0], [1.0, -1.0]]),
            D=np.zeros((2, 2)),
            F={},
        )


def test_jump_bookkeeping_must_match_rates():
    # positive jump rate without a distribution
    with pytest.raises(BadMixture):
        MapModel(
            n=1, v=np.array([-1.0]), C=np.array([[-0.5]]),
            D=np.array([[0.5]]), F={},
        )
    # distribution attached to a zero jump rate
    with pytest.raises(BadMixture):
        MapModel(
            n=1, v=np.array([-1.0]), C=np.array([[0.0]]),
            D=np.zeros((1, 1)), F={(0, 0): JumpMixture.exponential(1.0)},
        )


def test_unknown_keys_rejected():
    raw = _onoff_dict()
    raw["extra"] = 1
    with pytest.raises(ParseError):
        model_from_dict(raw)
    raw = _onoff_dict()
    raw["jumps"] = [{"from": 0, "to": 1, "oops": 1, "mixture": []}]
    with pytest.raises(ParseError):
        model_from_dict(raw)


def test_unknown_mixture_kind_rejected():
    raw = _onoff_dict()
    raw["D"][0][1] = 0.5
    raw["C"][0][0] = -1.5
    raw["jumps"] = [
        {"from": 0, "to": 1,
         "mixture": [{"weight": 1.0, "kind": "pareto", "params": {"rate": 1.0}}]}
    ]
    with pytest.raises(ParseError):
        model_from_dict(raw)


# -- structure --------------------------------------------------------------------------


def test_partition_and_rates(mix3_model):
    part = mix3_model.partition
    assert part.minus == (0, 1) and part.plus == (2,)
    assert np.allclose(mix3_model.c, [3.0, 3.2, 3.1])
    assert mix3_model.theta_max == 3.0


def test_stationary_distribution(onoff_model, cl_model):
    pi = onoff_model.stationary_dist()
    assert pi == pytest.approx([2.0 / 3.0, 1.0 / 3.0], abs=1e-14)
    assert cl_model.stationary_dist() == pytest.approx([1.0])


def test_stationary_solves_balance(random_models):
    for m in random_models:
        pi = m.stationary_dist()
        assert np.min(pi) > 0
        assert pi.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(pi @ (m.C + m.D))) < 1e-12


def test_mean_drift_values(cl_model, onoff_model):
    assert cl_model.mean_drift() == pytest.approx(-0.5, abs=1e-14)
    assert onoff_model.mean_drift() == pytest.approx(-1.0 / 3.0, abs=1e-14)


def test_jump_transform_at_zero_is_rate_matrix(mix3_model):
    assert np.allclose(mix3_model.D_hat(0.0), mix3_model.D)


# -- dual -------------------------------------------------------------------------------


def test_dual_is_an_involution(random_models):
    for m in random_models[:4]:
        dd = m.dual().dual()
        assert np.max(np.abs(dd.C - m.C)) < 1e-12
        assert np.max(np.abs(dd.D - m.D)) < 1e-12
        assert set(dd.F) == set(m.F)


def test_dual_preserves_stationary_law_and_drift(random_models):
    for m in random_models[:4]:
        d = m.dual()
        assert np.max(np.abs(d.stationary_dist() - m.stationary_dist())) < 1e-12
        assert d.mean_drift() == pytest.approx(m.mean_drift(), abs=1e-12)


def test_random_factory_is_deterministic():
    a, b = make_random_model(3), make_random_model(3)
    assert np.array_equal(a.C, b.C) and np.array_equal(a.v, b.v)
