"""Renewal marching, exponential asymptotics and the stationary buffer tail."""

import numpy as np
import pytest

from ruinflow.errors import BadGrid, HorizonTooShort
from ruinflow.kernel import make_context
from ruinflow.renewal import (
    asymptote_match,
    asymptotics,
    fluid_tail,
    nu_vector,
    solve_hitting,
    twisted_row_sums,
)
from ruinflow.spectral import perron


def test_classical_hitting_curve(cl_model):
    table = solve_hitting(cl_model, 10.0, 0.01)
    exact = 0.5 * np.exp(-0.5 * table.x)
    assert np.max(np.abs(table.psi[:, 0, 0] - exact)) < 1e-5


def test_grid_validation(cl_model):
    with pytest.raises(BadGrid):
        solve_hitting(cl_model, 10.0, -0.1)
    with pytest.raises(BadGrid):
        solve_hitting(cl_model, 1.0, 0.3)


def test_probabilities_well_formed(mix3_model):
    table = solve_hitting(mix3_model, 6.0, 0.01)
    assert np.min(table.psi) > -1e-10
    tot = table.total
    assert np.max(tot) <= 1.0 + 1e-10
    # total hit probability decreases with the level, per start state
    assert np.max(np.diff(tot, axis=0)) < 1e-10


def test_onoff_boundary_hit_probability(onoff_model):
    table = solve_hitting(onoff_model, 1.0, 0.5)
    psi0 = table.psi[0]
    # down state reaches the boundary with the crossing mass, up state surely
    assert psi0[0].sum() == pytest.approx(0.5, abs=1e-10)
    assert psi0[1].sum() == pytest.approx(1.0, abs=1e-10)
    # crossing-intensity-weighted start reproduces the up/down rate ratio
    pi = onoff_model.stationary_dist()
    v = onoff_model.v
    a_minus = -v[0] * pi[0]
    a_plus = v[1] * pi[1]
    weighted = (-v[0]) * pi[0] * psi0[0].sum() / a_minus
    assert weighted == pytest.approx(a_plus / a_minus, abs=1e-10)


def test_asymptotics_prefactor_consistency(random_models):
    for m in random_models[:5]:
        res = asymptotics(m)
        assert np.max(
            np.abs(res.prefactor_full.sum(axis=1) - res.prefactor_total)
        ) < 1e-9
        assert res.eta_alpha > 0
        assert res.eta_zero == pytest.approx(m.mean_drift(), abs=1e-12)
        # continuous-crossing part never exceeds the full prefactor
        assert np.min(res.prefactor_full - res.prefactor_continuous) > -1e-9


def test_invariant_row_of_twisted_chain(mix3_model):
    ctx = make_context(mix3_model)
    res = asymptotics(mix3_model, ctx)
    assert np.max(np.abs(twisted_row_sums(ctx, res.alpha, res.h) - 1.0)) < 1e-8
    point = perron(mix3_model, res.alpha, kminus=ctx.ladder.kminus)
    nu = nu_vector(ctx, point)
    minus = list(mix3_model.partition.minus)
    ident = nu[minus] @ (ctx.ladder.kminus / (-mix3_model.v[minus]))
    assert ident == pytest.approx(res.alpha, abs=1e-9)


def test_classical_asymptote_match(cl_model):
    res = asymptotics(cl_model)
    table = solve_hitting(cl_model, 12.0, 0.01)
    rep = asymptote_match(table, res)
    assert rep.max_rel_dev_total < 1e-3
    with pytest.raises(HorizonTooShort):
        asymptote_match(solve_hitting(cl_model, 2.0, 0.01), res)


def test_onoff_fluid_coefficients(onoff_model):
    ft = fluid_tail(onoff_model)
    assert ft.alpha == pytest.approx(1.0, abs=1e-10)
    assert ft.beta == pytest.approx([1.0], abs=1e-12)
    assert ft.coefficients == pytest.approx([1.0 / 3.0, 1.0 / 3.0], abs=1e-10)


def test_fluid_coefficients_positive_and_bounded(random_models):
    for m in random_models[:5]:
        ft = fluid_tail(m)
        assert np.min(ft.coefficients) > 0
        assert ft.beta.sum() == pytest.approx(1.0, abs=1e-12)
        assert ft.descent_residual < 1e-11


def test_step_refinement_converges(cl_model):
    coarse = solve_hitting(cl_model, 4.0, 0.04)
    fine = solve_hitting(cl_model, 4.0, 0.01)
    exact = 0.5 * np.exp(-0.5 * 4.0)
    err_c = abs(coarse.psi[-1, 0, 0] - exact)
    err_f = abs(fine.psi[-1, 0, 0] - exact)
    # trapezoid march: quartering the step cuts the error ~16x
    assert err_f < err_c / 8.0
