"""First up-crossing (ladder) matrices: fixed-point residuals, null-vector
structure, dual pair consistency and the crossing-law distribution."""

import numpy as np
import pytest

from ruinflow.errors import EmptyMinus, NotMinusState
from ruinflow.ladder import (
    descent_residual,
    dual_ladder,
    k_eigenvector,
    ladder_height,
    ladder_height_matrix,
    solve_descent,
    solve_ladder,
)
from ruinflow.model import MapModel


def test_classical_model_exactly(cl_model):
    lad = solve_ladder(cl_model)
    assert abs(lad.K[0, 0]) < 1e-12
    assert lad.kminus == pytest.approx([1.0], abs=1e-12)
    J = ladder_height_matrix(cl_model, lad, np.inf)
    assert J[0, 0] == pytest.approx(0.5, abs=1e-12)
    for x in (0.5, 1.0, 3.0):
        # exponential claims: crossing law 0.5 * (1 - exp(-x))
        assert ladder_height(cl_model, lad, 0, 0, x) == pytest.approx(
            0.5 * (1.0 - np.exp(-x)), abs=1e-12
        )


def test_onoff_model_exactly(onoff_model):
    lad = solve_ladder(onoff_model)
    assert abs(lad.K[0, 0]) < 1e-12
    assert lad.L[0, 0] == pytest.approx(0.5, abs=1e-12)
    assert lad.kminus == pytest.approx([1.5], abs=1e-10)
    assert abs(lad.Qdual[0, 0]) < 1e-12
    assert lad.Rdual[0, 0] == pytest.approx(1.0, abs=1e-12)
    # jump-free: the whole crossing mass sits on the up state at height 0
    J = ladder_height_matrix(onoff_model, lad, 0.0)
    assert J[0, 1] == pytest.approx(0.5, abs=1e-12)
    assert J[0, 0] == pytest.approx(0.0, abs=1e-14)


def test_fixed_point_residual_small(random_models):
    for m in random_models:
        lad = solve_ladder(m)
        assert lad.residual < 1e-11


def test_null_vector_and_mass_balance(random_models):
    for m in random_models:
        lad = solve_ladder(m)
        pi = m.stationary_dist()
        part = m.partition
        # left null vector of K is the restricted stationary law
        assert np.max(np.abs(pi[list(part.minus)] @ lad.K)) < 1e-10
        # crossing mass balance onto the up states
        assert np.max(
            np.abs(pi[list(part.minus)] @ lad.L - pi[list(part.plus)])
        ) < 1e-10
        # positive right null vector, normalized against the stationary law
        assert np.max(np.abs(lad.K @ lad.kminus)) < 1e-10
        assert np.min(lad.kminus) > 0
        assert pi[list(part.minus)] @ lad.kminus == pytest.approx(1.0, abs=1e-12)


def test_dual_pair_solves_reversed_descent_equation(random_models):
    for m in random_models:
        lad = solve_ladder(m)
        assert descent_residual(m.dual(), lad.Qdual, lad.Rdual) < 1e-9


def test_descent_of_model_equals_dual_of_reversed_ladder(random_models):
    for m in random_models[:5]:
        Q, R, res = solve_descent(m)
        assert res < 1e-11
        lad_d = solve_ladder(m.dual())
        Qd, Rd = dual_ladder(m.dual(), lad_d.K, lad_d.L)
        assert np.max(np.abs(Q - Qd)) < 1e-9
        assert np.max(np.abs(R - Rd)) < 1e-9


def test_descent_generator_conservative_under_negative_drift(random_models):
    for m in random_models[:5]:
        Q, R, _ = solve_descent(m)
        assert np.max(np.abs(Q.sum(axis=1))) < 1e-10
        assert np.min(R) > -1e-12
        assert np.max(R.sum(axis=1)) <= 1.0 + 1e-10


def test_crossing_law_monotone_and_defective(mix3_model):
    lad = solve_ladder(mix3_model)
    xs = np.linspace(0.0, 4.0, 9)
    prev = np.zeros((2, 3))
    for x in xs:
        J = ladder_height_matrix(mix3_model, lad, float(x))
        assert np.min(J - prev) > -1e-12  # entrywise nondecreasing
        prev = J
    Jinf = ladder_height_matrix(mix3_model, lad, np.inf)
    assert np.max(Jinf.sum(axis=1)) < 1.0  # defective under negative drift
    assert np.max(np.abs(prev - Jinf)) < 0.05


def test_nonnegative_ladder_mass(random_models):
    for m in random_models:
        lad = solve_ladder(m)
        assert np.min(lad.L) > -1e-12
        Jinf = ladder_height_matrix(m, lad, np.inf)
        assert np.min(Jinf) > -1e-12
        assert np.max(Jinf.sum(axis=1)) < 1.0 + 1e-12


def test_up_state_queries_rejected(mix3_model):
    lad = solve_ladder(mix3_model)
    with pytest.raises(NotMinusState):
        ladder_height(mix3_model, lad, 2, 0, 1.0)


def test_all_up_model_rejected():
    m = MapModel(
        n=2,
        v=np.array([1.0, 2.0]),
        C=np.array([[-1.0, 1.0], [1.0, -1.0]]),
        D=np.zeros((2, 2)),
        F={},
    )
    with pytest.raises(EmptyMinus):
        solve_ladder(m)


def test_positive_drift_has_no_null_vector():
    from ruinflow.errors import DriftPositive

    K = np.array([[-1.0, 0.2], [0.1, -0.8]])  # nonsingular subrate block
    with pytest.raises(DriftPositive):
        k_eigenvector(K, np.array([0.5, 0.5]))
