import numpy as np
import pytest

import mirrorlab as ml
from mirrorlab.exceptions import InvalidDimensionError, InvalidOrderError
from mirrorlab.problems import objective_gap


def all_maps(dim):
    return [ml.make_euclidean_map(dim), ml.make_entropy_map(dim),
            ml.make_pth_power_map(dim, 3)]


def sample_dual(mirror_map, rng):
    z = rng.standard_normal(mirror_map.dim)
    return z


# ---------------------------------------------------------------------------
# feasible sets
# ---------------------------------------------------------------------------

def test_simplex_projection_idempotent_and_feasible():
    rng = np.random.default_rng(0)
    fs = ml.probability_simplex(6)
    for _ in range(50):
        x = rng.standard_normal(6) * 3
        p = fs.project(x)
        assert fs.contains(p)
        assert np.allclose(fs.project(p), p, atol=1e-12)


def test_box_and_ball_projection():
    fs = ml.box(np.array([-1.0, 0.0]), np.array([1.0, 2.0]))
    assert np.allclose(fs.project(np.array([3.0, -1.0])), [1.0, 0.0])
    ball = ml.euclidean_ball(np.array([1.0, 1.0]), 2.0)
    p = ball.project(np.array([5.0, 1.0]))
    assert np.allclose(p, [3.0, 1.0])
    inside = np.array([1.5, 1.0])
    assert np.allclose(ball.project(inside), inside)


def brute_force_simplex_project(x, n_grid=200):
    # dense barycentric grid on the 3-simplex
    best, best_d = None, np.inf
    for i in range(n_grid + 1):
        for j in range(n_grid + 1 - i):
            p = np.array([i, j, n_grid - i - j]) / n_grid
            d = np.sum((p - x) ** 2)
            if d < best_d:
                best, best_d = p, d
    return best


def test_simplex_projection_matches_brute_force():
    rng = np.random.default_rng(1)
    fs = ml.probability_simplex(3)
    for _ in range(10):
        x = rng.standard_normal(3) * 1.5
        p = fs.project(x)
        q = brute_force_simplex_project(x)
        # grid resolution 1/200 bounds the distance mismatch
        assert np.sum((p - x) ** 2) <= np.sum((q - x) ** 2) + 1e-12
        assert np.linalg.norm(p - q) < 2e-2


def test_box_ball_projection_minimizes_distance_on_grid():
    rng = np.random.default_rng(2)
    bx = ml.box(np.array([-1.0, -1.0, -1.0]), np.array([1.0, 1.0, 1.0]))
    ball = ml.euclidean_ball(np.zeros(3), 1.0)
    grid = np.linspace(-1, 1, 21)
    pts = np.array(np.meshgrid(grid, grid, grid)).reshape(3, -1).T
    ball_pts = pts[np.linalg.norm(pts, axis=1) <= 1.0]
    for _ in range(5):
        x = rng.standard_normal(3) * 2
        for fs, candidates in ((bx, pts), (ball, ball_pts)):
            p = fs.project(x)
            dists = np.sum((candidates - x) ** 2, axis=1)
            assert np.sum((p - x) ** 2) <= dists.min() + 1e-9


def test_whole_space_contains_everything():
    fs = ml.whole_space(4)
    x = np.array([1e6, -1e6, 0.0, 3.14])
    assert fs.contains(x)
    assert np.allclose(fs.project(x), x)


# ---------------------------------------------------------------------------
# map constructors: stated examples
# ---------------------------------------------------------------------------

def test_euclidean_map_examples():
    m = ml.make_euclidean_map(2)
    assert np.allclose(m.dual_map(np.array([3.0, -1.0])), [3.0, -1.0])
    x = np.array([0.3, -0.7])
    assert m.primal_bregman(x, x) == 0.0
    assert m.primal_bregman(np.array([1.0, 0.0]), np.zeros(2)) == pytest.approx(0.5)
    assert m.sigma == 1.0 and m.order_p == 2


def test_euclidean_map_rejects_dim_zero():
    with pytest.raises(InvalidDimensionError):
        ml.make_euclidean_map(0)


def test_entropy_map_examples():
    m = ml.make_entropy_map(2)
    assert np.allclose(m.dual_map(np.zeros(2)), [0.5, 0.5])
    u = np.array([0.5, 0.5])
    assert m.primal_bregman(u, u) == pytest.approx(0.0, abs=1e-15)
    # independent KL evaluation
    y, x = np.array([0.5, 0.5]), np.array([0.25, 0.75])
    expected = float(np.sum(y * np.log(y / x)))
    assert m.primal_bregman(y, x) == pytest.approx(expected, abs=1e-12)
    assert m.primal_bregman(y, x) == pytest.approx(0.1438, abs=1e-4)


def test_entropy_map_rejects_small_dim():
    with pytest.raises(InvalidDimensionError):
        ml.make_entropy_map(1)


def test_entropy_dual_map_is_stable_for_large_inputs():
    m = ml.make_entropy_map(3)
    z = np.array([1000.0, 999.0, -1000.0])
    x = m.dual_map(z)
    assert np.all(np.isfinite(x)) and x.sum() == pytest.approx(1.0)


def test_kl_boundary_conventions():
    m = ml.make_entropy_map(2)
    assert m.primal_bregman(np.array([0.0, 1.0]), np.array([0.0, 1.0])) == 0.0
    assert m.primal_bregman(np.array([0.5, 0.5]), np.array([0.0, 1.0])) == np.inf


def test_pth_power_map_examples():
    m = ml.make_pth_power_map(2, 3)
    assert np.allclose(m.dual_map(np.zeros(2)), np.zeros(2))
    assert np.allclose(m.dual_map(np.array([4.0, 0.0])), [2.0, 0.0])
    # p=2 reduces to the Euclidean map
    m2 = ml.make_pth_power_map(3, 2)
    z = np.array([0.3, -1.0, 2.0])
    assert np.allclose(m2.dual_map(z), z)
    assert m2.sigma == 1.0


def test_pth_power_map_rejects_bad_order():
    with pytest.raises(InvalidOrderError):
        ml.make_pth_power_map(2, 1)


def test_pth_power_dual_map_inverts_gradient():
    # grad phi of the image recovers the dual point
    rng = np.random.default_rng(3)
    for p in (2, 3, 4):
        m = ml.make_pth_power_map(4, p)
        for _ in range(20):
            z = rng.standard_normal(4) * rng.uniform(0.1, 5)
            x = m.dual_map(z)
            assert np.allclose(m.to_dual(x), z, atol=1e-8 * (1 + np.abs(z).max()))


def test_euclidean_and_entropy_dual_map_inversion():
    rng = np.random.default_rng(4)
    m = ml.make_euclidean_map(3)
    z = rng.standard_normal(3)
    assert np.allclose(m.to_dual(m.dual_map(z)), z)
    e = ml.make_entropy_map(4)
    z = rng.standard_normal(4)
    zr = e.to_dual(e.dual_map(z))
    # recovered up to an additive constant: compare coordinate differences
    assert np.allclose(zr - zr[0], z - z[0], atol=1e-10)


# ---------------------------------------------------------------------------
# divergence identities
# ---------------------------------------------------------------------------

def test_dual_bregman_equals_primal_examples():
    m = ml.make_euclidean_map(2)
    d_dual, d_primal = ml.dual_bregman_equals_primal(
        m, np.array([1.0, 0.0]), np.zeros(2))
    assert d_dual == pytest.approx(0.5) and d_primal == pytest.approx(0.5)

    z = np.array([0.4, -1.2])
    d_dual, d_primal = ml.dual_bregman_equals_primal(m, z, z)
    assert d_dual == 0.0 and d_primal == 0.0

    e = ml.make_entropy_map(2)
    d_dual, d_primal = ml.dual_bregman_equals_primal(
        e, np.zeros(2), np.array([np.log(3.0), 0.0]))
    assert abs(d_dual - d_primal) < 1e-10


def test_primal_dual_divergence_identity_random_pairs():
    rng = np.random.default_rng(5)
    for m in all_maps(5):
        for _ in range(100):
            z0 = sample_dual(m, rng)
            zs = sample_dual(m, rng)
            d_dual, d_primal = ml.dual_bregman_equals_primal(m, z0, zs)
            assert abs(d_dual - d_primal) <= 1e-9 * (1 + abs(d_primal))


def test_dual_bregman_zero_at_equal_points():
    rng = np.random.default_rng(6)
    for m in all_maps(4):
        z = sample_dual(m, rng)
        assert m.dual_bregman(z, z) == 0.0


def test_order_p_lower_bound_on_sampled_pairs():
    rng = np.random.default_rng(7)
    for m in all_maps(4):
        for _ in range(1000):
            if m.feasible_set.kind == "probability-simplex":
                x = m.dual_map(rng.standard_normal(m.dim))
                y = m.dual_map(rng.standard_normal(m.dim))
            else:
                x = rng.standard_normal(m.dim) * rng.uniform(0.1, 3)
                y = rng.standard_normal(m.dim) * rng.uniform(0.1, 3)
            div = m.primal_bregman(y, x)
            lower = (m.sigma / m.order_p) * m.norm(y - x) ** m.order_p
            assert div >= lower - 1e-10


def test_pth_power_modulus_values():
    assert ml.pth_power_modulus(2) == 1.0
    # collinear infimum for p=3 is 2 - sqrt(2); the grid bound sits just below
    sigma3 = ml.pth_power_modulus(3)
    assert 0.9 * (2 - np.sqrt(2)) < sigma3 <= (2 - np.sqrt(2))


def test_conjugacy_round_trip_lands_in_feasible_set():
    rng = np.random.default_rng(8)
    for m in all_maps(5):
        for _ in range(50):
            z = sample_dual(m, rng)
            x = m.dual_map(z)
            assert m.feasible_set.contains(x, tol=1e-10)
            assert m.primal_bregman(x, x) == pytest.approx(0.0, abs=1e-14)


# ---------------------------------------------------------------------------
# objectives
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("factory,kwargs", [
    (ml.make_quadratic, dict(dim=6, seed=11)),
    (ml.make_logsumexp, dict(dim=4, seed=11)),
    (ml.make_simplex_quadratic, dict(dim=5, seed=11)),
])
def test_objective_witnesses(factory, kwargs):
    obj = factory(**kwargs)
    ml.validate_objective(obj, np.random.default_rng(12), n_points=10)


def test_quadratic_minimizer_and_L_are_exact():
    obj = ml.make_quadratic(6, (1e-3, 2.0), seed=1)
    g = obj.gradient(obj.known_minimizer)
    assert np.linalg.norm(g) < 1e-12
    eigs = np.linalg.eigvalsh(obj.matrix)
    assert obj.lipschitz_L == pytest.approx(eigs.max(), rel=1e-12)


def test_logsumexp_minimizer_is_stationary():
    obj = ml.make_logsumexp(5, seed=2)
    assert np.linalg.norm(obj.gradient(obj.known_minimizer)) < 1e-10


def test_simplex_quadratic_interior_minimizer():
    obj = ml.make_simplex_quadratic(8, seed=5)
    xs = obj.known_minimizer
    assert xs.min() > 0 and xs.sum() == pytest.approx(1.0)
    assert np.linalg.norm(obj.gradient(xs)) < 1e-10


def test_simplex_quadratic_boundary_reference_solve():
    obj = ml.make_simplex_quadratic(6, seed=9, interior=False)
    xs = obj.known_minimizer
    assert xs.min() >= 0 and xs.sum() == pytest.approx(1.0, abs=1e-10)
    # KKT: projected gradient step is a fixed point of the solution
    fs = ml.probability_simplex(6)
    step = fs.project(xs - 1e-3 * obj.gradient(xs))
    assert np.linalg.norm(step - xs) < 1e-8


def test_objective_gap_matches_value_difference():
    obj = ml.make_quadratic(5, seed=3)
    rng = np.random.default_rng(4)
    for _ in range(10):
        x = rng.standard_normal(5)
        direct = obj.value(x) - obj.known_min_value
        assert objective_gap(obj, x) == pytest.approx(direct, rel=1e-9, abs=1e-12)


def test_quadratic_rejects_dim_zero():
    with pytest.raises(InvalidDimensionError):
        ml.make_quadratic(0)
