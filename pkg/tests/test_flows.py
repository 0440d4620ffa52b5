import numpy as np
import pytest
from scipy.linalg import expm

import mirrorlab as ml
from mirrorlab.exceptions import UnsupportedDiagnosticError
from mirrorlab.problems import Objective


def norm_sq_objective(dim):
    return Objective(
        dim=dim,
        value=lambda x: 0.5 * float(np.asarray(x) @ np.asarray(x)),
        gradient=lambda x: np.asarray(x, dtype=float).copy(),
        lipschitz_L=1.0,
        known_min_value=0.0,
        known_minimizer=np.zeros(dim),
    )


def test_mirror_flow_exponential_decay_1d():
    obj = norm_sq_objective(1)
    emap = ml.make_euclidean_map(1)
    states = ml.integrate_mirror_flow(np.array([1.0]), obj, emap, 4.0, 1e-9,
                                      sample_times=[1.0, 2.0, 4.0])
    for st in states:
        assert abs(st.X[0] - np.exp(-st.t)) < 1e-6


def test_mirror_flow_constant_at_stationary_start():
    obj = norm_sq_objective(3)
    emap = ml.make_euclidean_map(3)
    states = ml.integrate_mirror_flow(np.zeros(3), obj, emap, 5.0, 1e-8,
                                      sample_times=[1.0, 5.0])
    for st in states:
        assert np.allclose(st.X, 0.0)
        assert np.allclose(st.dX, 0.0)


def test_mirror_flow_entropy_stays_on_simplex():
    c = np.array([0.3, -0.2, 0.9, 0.1])
    obj = Objective(dim=4, value=lambda x: float(c @ x),
                    gradient=lambda x: c.copy(), lipschitz_L=1.0)
    ent = ml.make_entropy_map(4)
    states = ml.integrate_mirror_flow(np.ones(4) / 4, obj, ent, 20.0, 1e-8,
                                      sample_times=np.linspace(0.5, 20, 40))
    for st in states:
        assert abs(st.X.sum() - 1.0) <= 1e-10
        assert st.X.min() >= -1e-10


def test_mirror_flow_matches_matrix_exponential():
    obj = ml.make_quadratic(6, seed=61)
    emap = ml.make_euclidean_map(6)
    x0 = obj.spread_start()
    xs, a = obj.known_minimizer, obj.matrix
    for t in (1.0, 3.0, 10.0):
        st = ml.integrate_mirror_flow(x0, obj, emap, t, 1e-10,
                                      sample_times=[t])[0]
        analytic = xs + expm(-a * t) @ (x0 - xs)
        assert np.linalg.norm(st.X - analytic) < 1e-6


def test_mirror_flow_requires_interior_start():
    obj = norm_sq_objective(3)
    ent = ml.make_entropy_map(3)
    with pytest.raises(ValueError):
        ml.integrate_mirror_flow(np.array([0.0, 0.5, 0.5]), obj, ent, 1.0, 1e-8)


def test_accelerated_flow_stationary_start_is_constant():
    obj = norm_sq_objective(2)
    emap = ml.make_euclidean_map(2)
    states = ml.integrate_accelerated_flow(np.zeros(2), obj, emap, 0.1, 10.0,
                                           1e-8, sample_times=[0.0, 2.0, 10.0])
    for st in states:
        assert np.allclose(st.X, 0.0)
        assert np.allclose(st.Z, 0.0)


def test_accelerated_flow_initial_conditions():
    obj = norm_sq_objective(2)
    emap = ml.make_euclidean_map(2)
    x0 = np.array([1.0, -1.0])
    st0 = ml.integrate_accelerated_flow(x0, obj, emap, 0.3, 1.0, 1e-9,
                                        sample_times=[0.0])[0]
    assert np.allclose(st0.X, x0)
    assert np.allclose(emap.dual_map(st0.Z), x0)
    assert np.allclose(st0.dX, 0.0)


def test_low_resolution_flow_matches_independent_system():
    # sqrt_s = 0 must reproduce the classical regularized system with rate
    # coefficient 2 integrated separately.
    from scipy.integrate import solve_ivp

    obj = ml.make_quadratic(4, seed=62)
    emap = ml.make_euclidean_map(4)
    x0 = obj.spread_start()
    delta, r = 1e-3, 2.0
    grid = np.linspace(0.5, 8.0, 16)

    def rhs(t, y):
        x, z = y[:4], y[4:]
        dx = (r / max(t, delta)) * (z - x)
        dz = -(t / r) * obj.gradient(x)
        return np.concatenate([dx, dz])

    ref = solve_ivp(rhs, (0, 8.0), np.concatenate([x0, x0]), rtol=1e-10,
                    atol=1e-10, dense_output=True)
    states = ml.integrate_accelerated_flow(x0, obj, emap, 0.0, 8.0, 1e-10,
                                           delta=delta, sample_times=grid)
    for st in states:
        assert np.linalg.norm(st.X - ref.sol(st.t)[:4]) < 1e-7


def test_mirror_monitor_initial_value_and_trivial_zero():
    obj = ml.make_quadratic(5, seed=63)
    emap = ml.make_euclidean_map(5)
    x0 = obj.spread_start()
    zstar = emap.to_dual(obj.known_minimizer)
    st = ml.FlowState(t=0.0, X=x0, Z=emap.to_dual(x0), dX=np.zeros(5),
                      sqrt_s=0.0, delta=0.0)
    e0, _ = ml.continuous_lyapunov_mirror(st, obj, emap, zstar)
    assert e0 == pytest.approx(emap.primal_bregman(obj.known_minimizer, x0))
    st_min = ml.FlowState(t=2.0, X=obj.known_minimizer, Z=zstar,
                          dX=np.zeros(5), sqrt_s=0.0, delta=0.0)
    e, _ = ml.continuous_lyapunov_mirror(st_min, obj, emap, zstar)
    assert e == pytest.approx(0.0, abs=1e-15)


def test_accelerated_monitor_initial_value():
    obj = ml.make_quadratic(5, seed=64)
    emap = ml.make_euclidean_map(5)
    x0 = obj.spread_start()
    zstar = emap.to_dual(obj.known_minimizer)
    st = ml.FlowState(t=0.0, X=x0, Z=emap.to_dual(x0), dX=np.zeros(5),
                      sqrt_s=1.0, delta=1e-3)
    e0, b0 = ml.continuous_lyapunov_accelerated(st, obj, emap, zstar)
    assert e0 == pytest.approx(4 * emap.primal_bregman(obj.known_minimizer, x0))
    assert b0 == 0.0


def test_monitor_requires_minimizer():
    obj = Objective(dim=2, value=lambda x: 0.0,
                    gradient=lambda x: np.zeros(2), lipschitz_L=1.0)
    emap = ml.make_euclidean_map(2)
    st = ml.FlowState(t=1.0, X=np.zeros(2), Z=np.zeros(2), dX=np.zeros(2),
                      sqrt_s=0.0, delta=0.0)
    with pytest.raises(UnsupportedDiagnosticError):
        ml.continuous_lyapunov_mirror(st, obj, emap, np.zeros(2))


def test_mirror_flow_trajectory_audit_and_rate():
    obj = ml.make_quadratic(8, seed=7)
    emap = ml.make_euclidean_map(8)
    x0 = obj.spread_start()
    res = ml.run_mirror_flow(obj, emap, x0, t_end=50.0, tol=1e-9, samples=500)
    ts, e = res.columns["t"], res.columns["lyapunov"]
    # energy non-increasing
    assert np.all(np.diff(e) <= 1e-8 * (1 + np.abs(e[:-1])))
    # finite-difference decrease against the trapezoid of the certified rate
    rates = -ts * emap.sigma * res.columns["velocity_norm_sq"]
    de_dt = np.diff(e) / np.diff(ts)
    assert np.all(de_dt <= 0.5 * (rates[:-1] + rates[1:]) + 1e-6)
    # optimality-gap rate at every sample
    d0 = emap.primal_bregman(obj.known_minimizer, x0)
    bound = d0 / (ts * emap.sigma)
    assert np.all(res.columns["f_gap"] <= bound + 1e-9 * (1 + bound))
    # velocity decay exponent over t in [1, 100]-style window
    vm = ml.running_min(res.columns["velocity_norm_sq"])
    est = ml.fit_rate(vm, ts, window=(1.0, 50.0))
    assert est.slope <= -2.0 + 0.2


def test_accelerated_flow_trajectory_audit_and_rate():
    obj = ml.make_quadratic(8, seed=7)
    emap = ml.make_euclidean_map(8)
    x0 = obj.spread_start()
    res = ml.run_accelerated_flow(obj, emap, x0, sqrt_s=1.0, t_end=50.0,
                                  tol=1e-9, samples=500)
    ts, e = res.columns["t"], res.columns["lyapunov"]
    assert np.all(np.diff(e) <= 1e-8 * (1 + np.abs(e[:-1])))
    rates = -ts ** 2 * emap.sigma * res.columns["grad_norm_sq"]
    de_dt = np.diff(e) / np.diff(ts)
    assert np.all(de_dt <= 0.5 * (rates[:-1] + rates[1:]) + 1e-6)
    d0 = emap.primal_bregman(obj.known_minimizer, x0)
    bound = 4 * d0 / (ts ** 2 * emap.sigma)
    assert np.all(res.columns["f_gap"] <= bound + 1e-9 * (1 + bound))
    gm = ml.running_min(res.columns["grad_norm_sq"])
    est = ml.fit_rate(gm, ts, window=(1.0, 50.0))
    assert est.slope <= -3.0 + 0.25


def test_low_resolution_trace_audit_uses_scaled_bound():
    obj = ml.make_quadratic(6, seed=65)
    emap = ml.make_euclidean_map(6)
    res = ml.run_accelerated_flow(obj, emap, obj.spread_start(), sqrt_s=0.0,
                                  t_end=30.0, tol=1e-9, samples=300)
    assert np.all(res.trace.certified_bounds == 0.0)
    report = ml.audit_lyapunov(res.trace, tolerance=1e-6)
    assert report.violations == 0


def test_integrator_order():
    # fitted per-halving error reduction across a tolerance ladder is >= 2x;
    # individual halvings are noisy under the adaptive step controller.
    obj = ml.make_quadratic(8, seed=7)
    emap = ml.make_euclidean_map(8)
    x0 = obj.spread_start()
    ref = ml.integrate_mirror_flow(x0, obj, emap, 20.0, 1e-13,
                                   sample_times=[20.0])[0].X
    tols = np.array([1e-3 * 0.5 ** i for i in range(16)])
    errs = np.array([
        np.linalg.norm(ml.integrate_mirror_flow(x0, obj, emap, 20.0, tol,
                                                sample_times=[20.0])[0].X - ref)
        for tol in tols])
    slope = np.polyfit(np.log(tols), np.log(errs), 1)[0]
    assert 2.0 ** slope >= 2.0


def test_flow_tracks_iterates_within_sqrt_s_envelope():
    # step s = 0.0025: iterates vs flow samples at t_k = (k+1) sqrt(s) stay
    # within 10 sqrt(s) (1 + ||x0||) over 200 steps
    obj = ml.make_quadratic(8, seed=7)
    emap = ml.make_euclidean_map(8)
    x0 = obj.spread_start()
    s = 0.0025
    root_s = np.sqrt(s)
    n = 200
    t_k = (np.arange(n + 1) + 1.0) * root_s
    run = ml.run_amd_unconstrained(obj, emap, x0, s, n)
    states = ml.integrate_accelerated_flow(x0, obj, emap, root_s, t_k[-1],
                                           1e-10, sample_times=t_k)
    dev = np.linalg.norm(run.xs - np.array([st.X for st in states]), axis=1)
    assert dev.max() <= 10 * root_s * (1 + np.linalg.norm(x0))


def test_flow_run_columns():
    obj = ml.make_quadratic(3, seed=66)
    emap = ml.make_euclidean_map(3)
    res = ml.run_mirror_flow(obj, emap, obj.spread_start(), 5.0, 1e-8,
                             samples=50)
    assert set(res.columns) == {"t", "f_gap", "lyapunov", "certified_bound",
                                "grad_norm_sq", "velocity_norm_sq"}
    assert len(res.trace) == 50
    assert res.columns["t"][0] > 0.0
