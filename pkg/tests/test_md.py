import numpy as np
import pytest

import mirrorlab as ml
from mirrorlab.exceptions import (InvalidOrderError, NumericalFailureError,
                                  StepGateError, UnsupportedDiagnosticError)
from mirrorlab.problems import Objective


def norm_sq_objective(dim):
    return Objective(
        dim=dim,
        value=lambda x: 0.5 * float(np.asarray(x) @ np.asarray(x)),
        gradient=lambda x: np.asarray(x, dtype=float).copy(),
        lipschitz_L=1.0,
        known_min_value=0.0,
        known_minimizer=np.zeros(dim),
        name="half-norm-sq",
    )


def test_md_step_euclidean_hand_example():
    obj = norm_sq_objective(2)
    emap = ml.make_euclidean_map(2)
    state = ml.md_init(np.array([1.0, 0.0]), obj, emap, 0.1)
    new = ml.md_step(state, obj, emap)
    assert np.allclose(new.x, [0.9, 0.0])
    assert new.k == 1


def test_md_fixed_point_at_stationarity():
    obj = norm_sq_objective(3)
    emap = ml.make_euclidean_map(3)
    state = ml.md_init(np.zeros(3), obj, emap, 0.5)
    new = ml.md_step(state, obj, emap)
    assert np.array_equal(new.x, state.x)


def test_md_step_gate_at_construction():
    obj = norm_sq_objective(2)
    emap = ml.make_euclidean_map(2)
    ml.md_init(np.ones(2), obj, emap, 1.9)          # below 2/L: accepted
    with pytest.raises(StepGateError):
        ml.md_init(np.ones(2), obj, emap, 2.0)      # at 2/L: rejected
    with pytest.raises(StepGateError):
        ml.md_init(np.ones(2), obj, emap, 0.0)


def test_md_rejects_higher_order_map():
    obj = norm_sq_objective(2)
    p3 = ml.make_pth_power_map(2, 3)
    state = ml.md_init(np.ones(2), obj, p3, 0.1)
    with pytest.raises(InvalidOrderError):
        ml.md_step(state, obj, p3)


def test_md_nonfinite_gradient_raises_with_iterate():
    bad = Objective(dim=2, value=lambda x: 0.0,
                    gradient=lambda x: np.array([np.nan, 0.0]),
                    lipschitz_L=1.0, known_min_value=0.0,
                    known_minimizer=np.zeros(2))
    emap = ml.make_euclidean_map(2)
    state = ml.md_init(np.ones(2), bad, emap, 0.1)
    with pytest.raises(NumericalFailureError) as err:
        ml.md_step(state, bad, emap)
    assert np.allclose(err.value.iterate, state.x)


def test_md_matches_gradient_descent_bitwise():
    obj = ml.make_quadratic(6, seed=31)
    emap = ml.make_euclidean_map(6)
    x0 = obj.spread_start()
    s = 1.0 / obj.lipschitz_L
    state = ml.md_init(x0, obj, emap, s)
    x_gd = x0.copy()
    for _ in range(100):
        state = ml.md_step(state, obj, emap)
        x_gd = x_gd - s * obj.gradient(x_gd)
        assert np.max(np.abs(state.x - x_gd)) <= 1e-12


def test_md_entropy_matches_multiplicative_weights():
    obj = ml.make_simplex_quadratic(6, seed=32)
    ent = ml.make_entropy_map(6)
    x0 = np.ones(6) / 6
    s = 1.0 / obj.lipschitz_L
    state = ml.md_init(x0, obj, ent, s)
    x_mw = x0.copy()
    for _ in range(100):
        state = ml.md_step(state, obj, ent)
        w = x_mw * np.exp(-ent.sigma * s * obj.gradient(x_mw))
        x_mw = w / w.sum()
        assert np.max(np.abs(state.x - x_mw)) <= 1e-10
    assert ent.feasible_set.contains(state.x, tol=1e-12)


def test_md_lyapunov_initial_value_is_primal_divergence():
    obj = norm_sq_objective(2)
    emap = ml.make_euclidean_map(2)
    x0 = np.array([1.0, 0.0])
    state = ml.md_init(x0, obj, emap, 0.1)
    zstar = emap.to_dual(obj.known_minimizer)
    e0 = ml.md_lyapunov(state, obj, emap, zstar)
    assert e0 == pytest.approx(0.5)
    assert e0 == pytest.approx(emap.primal_bregman(obj.known_minimizer, x0))


def test_md_lyapunov_zero_at_minimizer():
    obj = norm_sq_objective(2)
    emap = ml.make_euclidean_map(2)
    state = ml.md_init(np.zeros(2), obj, emap, 0.1)
    assert ml.md_lyapunov(state, obj, emap, np.zeros(2)) == 0.0


def test_md_lyapunov_needs_minimizer():
    obj = Objective(dim=2, value=lambda x: 0.0,
                    gradient=lambda x: np.zeros(2), lipschitz_L=1.0)
    emap = ml.make_euclidean_map(2)
    state = ml.md_init(np.ones(2), obj, emap, 0.1)
    with pytest.raises(UnsupportedDiagnosticError):
        ml.md_lyapunov(state, obj, emap, np.zeros(2))


def test_md_certified_decrease_at_stationary_point():
    obj = norm_sq_objective(2)
    emap = ml.make_euclidean_map(2)
    state = ml.md_init(np.zeros(2), obj, emap, 0.1)
    new = ml.md_step(state, obj, emap)
    diff, bound = ml.md_certified_decrease(state, new, obj, emap, np.zeros(2))
    assert diff == 0.0 and bound == 0.0


def test_md_certified_decrease_audit_on_desk_run():
    obj = ml.make_quadratic(4, seed=33)
    emap = ml.make_euclidean_map(4)
    s = 1.0 / obj.lipschitz_L
    zstar = emap.to_dual(obj.known_minimizer)
    state = ml.md_init(obj.spread_start(), obj, emap, s)
    for k in range(200):
        new = ml.md_step(state, obj, emap)
        diff, bound = ml.md_certified_decrease(state, new, obj, emap, zstar)
        assert diff <= bound + 1e-12 * (1 + abs(diff))
        # at s = 1/L the certified bound collapses to -(k sigma / 2) ||dx||^2
        step_sq = float(np.sum((new.x - state.x) ** 2))
        assert diff <= -0.5 * k * emap.sigma * step_sq + 1e-12
        state = new


def test_md_energy_monotone_and_rate_bound():
    obj = ml.make_quadratic(8, seed=7)
    emap = ml.make_euclidean_map(8)
    x0 = obj.spread_start()
    s = 1.0 / obj.lipschitz_L
    res = ml.run_md(obj, emap, x0, s, 2000)
    values = res.trace.values
    assert np.all(np.diff(values) <= 1e-9 * (1 + np.abs(values[:-1])))
    d0 = emap.primal_bregman(obj.known_minimizer, x0)
    k = np.arange(1, 2001)
    bound = d0 / (k * emap.sigma * s)
    assert np.all(res.columns["f_gap"][1:] <= bound + 1e-9 * (1 + bound))


def test_md_trace_shape_and_columns():
    obj = ml.make_quadratic(3, seed=34)
    emap = ml.make_euclidean_map(3)
    res = ml.run_md(obj, emap, obj.spread_start(), 0.5 / obj.lipschitz_L, 50)
    assert len(res.trace) == 51
    assert set(res.columns) == {"k", "f_gap", "lyapunov", "certified_bound",
                                "step_norm_sq"}
    assert res.final_state.trace is res.trace
    assert res.xs.shape == (51, 3)
