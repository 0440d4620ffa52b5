"""Problem geometry: objectives, mirror maps, Bregman divergences, feasible sets.

This module is the substrate every solver consumes.  An :class:`Objective`
bundles a smooth convex function with its gradient oracle and smoothness
constant; a :class:`MirrorMap` bundles a distance-generating function with its
dual map, Bregman divergences on both primal and dual space, and the geometry
constants (strong-convexity modulus ``sigma``, convexity order ``order_p``,
norm pair).  All instances are immutable after construction and safe to share
between concurrent runs; every operation is a pure function of its inputs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.special import logsumexp, softmax

from .exceptions import InvalidDimensionError, InvalidOrderError

log = logging.getLogger(__name__)

Vector = np.ndarray


# ---------------------------------------------------------------------------
# feasible sets
# ---------------------------------------------------------------------------

def project_simplex(v: Vector, total: float = 1.0) -> Vector:
    """Euclidean projection onto ``{x : x >= 0, sum(x) = total}``.

    Sort-and-threshold algorithm; O(n log n).
    """
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u * idx > (css - total))[0][-1]
    theta = (css[rho] - total) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


@dataclass(frozen=True)
class FeasibleSet:
    """Closed convex set with a membership test and Euclidean projection.

    ``kind`` is one of ``whole-space``, ``probability-simplex``, ``box``
    (componentwise bounds ``lo``/``hi``) or ``euclidean-ball`` (``center``,
    ``radius``).  ``project`` minimizes Euclidean distance and is idempotent.
    """

    kind: str
    dim: int
    lo: Optional[Vector] = None
    hi: Optional[Vector] = None
    center: Optional[Vector] = None
    radius: float = 0.0

    def contains(self, x, tol: float = 1e-10) -> bool:
        x = np.asarray(x, dtype=float)
        if self.kind == "whole-space":
            return True
        if self.kind == "probability-simplex":
            return bool(np.all(x >= -tol) and abs(float(x.sum()) - 1.0) <= tol)
        if self.kind == "box":
            return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))
        if self.kind == "euclidean-ball":
            return bool(np.linalg.norm(x - self.center) <= self.radius + tol)
        raise ValueError(f"unknown feasible-set kind {self.kind!r}")

    def project(self, x) -> Vector:
        x = np.asarray(x, dtype=float)
        if self.kind == "whole-space":
            return x.copy()
        if self.kind == "probability-simplex":
            return project_simplex(x)
        if self.kind == "box":
            return np.clip(x, self.lo, self.hi)
        if self.kind == "euclidean-ball":
            d = x - self.center
            n = float(np.linalg.norm(d))
            if n <= self.radius:
                return x.copy()
            return self.center + (self.radius / n) * d
        raise ValueError(f"unknown feasible-set kind {self.kind!r}")


def whole_space(dim: int) -> FeasibleSet:
    if dim < 1:
        raise InvalidDimensionError("whole_space needs dim >= 1")
    return FeasibleSet(kind="whole-space", dim=dim)


def probability_simplex(dim: int) -> FeasibleSet:
    if dim < 2:
        raise InvalidDimensionError("probability_simplex needs dim >= 2")
    return FeasibleSet(kind="probability-simplex", dim=dim)


def box(lo, hi) -> FeasibleSet:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.shape != hi.shape or lo.ndim != 1:
        raise InvalidDimensionError("box needs 1-d lo/hi of equal length")
    if np.any(lo > hi):
        raise ValueError("box needs lo <= hi componentwise")
    return FeasibleSet(kind="box", dim=lo.size, lo=lo, hi=hi)


def euclidean_ball(center, radius: float) -> FeasibleSet:
    center = np.asarray(center, dtype=float)
    if radius <= 0:
        raise ValueError("euclidean_ball needs radius > 0")
    return FeasibleSet(kind="euclidean-ball", dim=center.size,
                       center=center, radius=float(radius))


# ---------------------------------------------------------------------------
# objectives
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Objective:
    """Smooth convex objective with a gradient oracle.

    ``lipschitz_L`` is a Lipschitz constant of the gradient (Euclidean norm).
    ``known_minimizer``/``known_min_value`` are optional and enable the
    convergence certificates.  ``hessian`` is an optional second-order oracle;
    when absent, solvers that need Hessian action fall back to central
    differences of the gradient.
    """

    dim: int
    value: Callable[[Vector], float]
    gradient: Callable[[Vector], Vector]
    lipschitz_L: float
    known_min_value: Optional[float] = None
    known_minimizer: Optional[Vector] = None
    hessian: Optional[Callable[[Vector], np.ndarray]] = None
    gap: Optional[Callable[[Vector], float]] = None
    name: str = "objective"


def objective_gap(obj: Objective, x) -> float:
    """``f(x) - f*``, through the objective's dedicated gap oracle when present.

    Quadratic builders supply a centered evaluation that avoids the
    catastrophic cancellation of ``value(x) - known_min_value`` near the
    minimizer; certificates audited at 1e-9 tolerances need that accuracy.
    """
    if obj.gap is not None:
        return obj.gap(x)
    return obj.value(x) - obj.known_min_value


@dataclass(frozen=True)
class QuadraticObjective(Objective):
    """Quadratic ``0.5 <A x, x> - <b, x>`` with explicit spectra."""

    matrix: Optional[np.ndarray] = None
    offset: Optional[Vector] = None
    basis: Optional[np.ndarray] = None
    eigenvalues: Optional[Vector] = None

    def spread_start(self, scale: float = 1.0) -> Vector:
        """Start point with equal energy in every eigenmode of the Hessian.

        Produces clean power-law convergence curves for rate measurement.
        """
        ones = np.ones(self.dim) / np.sqrt(self.dim)
        return self.known_minimizer + scale * (self.basis @ ones)


def _seeded_basis(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q


def _spectrum(dim, eig_range, spacing):
    lo, hi = float(eig_range[0]), float(eig_range[1])
    if not (0 < lo <= hi):
        raise ValueError("eigenvalue range must satisfy 0 < lo <= hi")
    if dim == 1:
        return np.array([hi])
    if spacing == "log":
        return np.logspace(np.log10(lo), np.log10(hi), dim)
    if spacing == "linear":
        return np.linspace(lo, hi, dim)
    raise ValueError(f"unknown spacing {spacing!r}")


def make_quadratic(dim: int, eig_range=(1e-4, 1.0), seed: int = 0,
                   spacing: str = "log") -> QuadraticObjective:
    """Seeded SPD quadratic with known minimizer.

    The Hessian has eigenvalues spread over ``eig_range`` (log-spaced by
    default) in a random orthogonal basis; ``b`` is chosen so the minimizer is
    a seeded unit-scale point.
    """
    if dim < 1:
        raise InvalidDimensionError("make_quadratic needs dim >= 1")
    rng = np.random.default_rng(seed)
    basis = _seeded_basis(dim, rng)
    eigs = _spectrum(dim, eig_range, spacing)
    a = (basis * eigs) @ basis.T
    a = 0.5 * (a + a.T)
    xstar = basis @ (rng.standard_normal(dim) / np.sqrt(dim))
    b = a @ xstar

    def value(x):
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ (a @ x) - b @ x)

    return QuadraticObjective(
        dim=dim,
        value=value,
        gradient=lambda x: a @ np.asarray(x, dtype=float) - b,
        lipschitz_L=float(eigs.max()),
        known_min_value=value(xstar),
        known_minimizer=xstar,
        hessian=lambda x: a,
        gap=_centered_quadratic_gap(a, b, xstar),
        name="quadratic",
        matrix=a,
        offset=b,
        basis=basis,
        eigenvalues=eigs,
    )


def _centered_quadratic_gap(a, b, xstar):
    # f(x) - f(x*) = 0.5 d'Ad + <grad f(x*), d> with d = x - x*; exact for
    # quadratics and free of the cancellation in value(x) - value(x*).
    gstar = a @ xstar - b

    def gap(x):
        d = np.asarray(x, dtype=float) - xstar
        return float(0.5 * d @ (a @ d) + gstar @ d)

    return gap


def make_logsumexp(dim: int, n_terms: Optional[int] = None, seed: int = 0,
                   temperature: float = 1.0) -> Objective:
    """Smooth max: ``T * log sum_j exp((<a_j, x> + b_j) / T)``.

    Rows come in +/- pairs so the function is coercive and the minimizer
    finite; the minimizer is located at construction by a damped Newton solve
    and the gradient-Lipschitz constant is the numerically computed
    ``smax(A)^2 / T`` bound.
    """
    if dim < 1:
        raise InvalidDimensionError("make_logsumexp needs dim >= 1")
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    rng = np.random.default_rng(seed)
    m = n_terms if n_terms is not None else 2 * dim + 2
    g = rng.standard_normal((m, dim))
    a = np.vstack([g, -g])
    b = 0.5 * rng.standard_normal(2 * m)
    t = float(temperature)

    def value(x):
        return t * float(logsumexp((a @ np.asarray(x, dtype=float) + b) / t))

    def gradient(x):
        w = softmax((a @ np.asarray(x, dtype=float) + b) / t)
        return a.T @ w

    def hessian(x):
        w = softmax((a @ np.asarray(x, dtype=float) + b) / t)
        return (a.T * w) @ a / t - np.outer(a.T @ w, a.T @ w) / t

    lip = float(np.linalg.norm(a, 2) ** 2) / t

    x = np.zeros(dim)
    for _ in range(200):
        grad = gradient(x)
        if np.linalg.norm(grad) <= 1e-13:
            break
        step = np.linalg.solve(hessian(x) + 1e-12 * np.eye(dim), grad)
        alpha, fx = 1.0, value(x)
        while value(x - alpha * step) > fx and alpha > 1e-8:
            alpha *= 0.5
        x = x - alpha * step

    return Objective(
        dim=dim,
        value=value,
        gradient=gradient,
        lipschitz_L=lip,
        known_min_value=value(x),
        known_minimizer=x,
        hessian=hessian,
        name="logsumexp",
    )


def _solve_simplex_qp(a: np.ndarray, b: Vector) -> Vector:
    """Minimizer of ``0.5 x'Ax - b'x`` over the probability simplex.

    High-budget accelerated projected gradient locates the support; an exact
    KKT solve on that support polishes to machine precision.
    """
    dim = b.size
    lip = float(np.linalg.eigvalsh(a).max())
    s = 1.0 / lip
    x = np.ones(dim) / dim
    y = x.copy()
    for k in range(20000):
        grad = a @ y - b
        x_new = project_simplex(y - s * grad)
        y = x_new + (k / (k + 3.0)) * (x_new - x)
        x = x_new

    for drop in range(dim - 1):
        support = x > 1e-9
        ns = int(support.sum())
        kkt = np.zeros((ns + 1, ns + 1))
        kkt[:ns, :ns] = a[np.ix_(support, support)]
        kkt[:ns, ns] = 1.0
        kkt[ns, :ns] = 1.0
        rhs = np.concatenate([b[support], [1.0]])
        sol = np.linalg.solve(kkt, rhs)
        xs, lam = sol[:ns], sol[ns]
        candidate = np.zeros(dim)
        candidate[support] = xs
        grad = a @ candidate - b
        primal_ok = xs.min() >= -1e-12
        dual_ok = np.all(grad[~support] >= lam - 1e-9) if ns < dim else True
        if primal_ok and dual_ok:
            return np.maximum(candidate, 0.0)
        # drop the most negative coordinate from the support and retry
        x = np.maximum(candidate, 0.0)
        x /= x.sum()
    return x


def make_simplex_quadratic(dim: int, eig_range=(1e-3, 1.0), seed: int = 0,
                           interior: bool = True) -> QuadraticObjective:
    """Seeded SPD quadratic meant to be minimized over the simplex.

    With ``interior=True`` (default) the linear term is chosen so the
    unconstrained minimizer is a seeded interior point of the simplex, making
    the constrained minimizer exact and its dual image finite.  With
    ``interior=False`` the constrained minimizer is computed by a reference
    solve with a KKT polish.
    """
    if dim < 2:
        raise InvalidDimensionError("make_simplex_quadratic needs dim >= 2")
    rng = np.random.default_rng(seed)
    basis = _seeded_basis(dim, rng)
    eigs = _spectrum(dim, eig_range, "log")
    a = (basis * eigs) @ basis.T
    a = 0.5 * (a + a.T)
    if interior:
        xstar = softmax(rng.standard_normal(dim))
        b = a @ xstar
    else:
        b = rng.standard_normal(dim)
        xstar = _solve_simplex_qp(a, b)

    def value(x):
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ (a @ x) - b @ x)

    return QuadraticObjective(
        dim=dim,
        value=value,
        gradient=lambda x: a @ np.asarray(x, dtype=float) - b,
        lipschitz_L=float(eigs.max()),
        known_min_value=value(xstar),
        known_minimizer=xstar,
        hessian=lambda x: a,
        gap=_centered_quadratic_gap(a, b, xstar),
        name="simplex-quadratic",
        matrix=a,
        offset=b,
        basis=basis,
        eigenvalues=eigs,
    )


def validate_objective(obj: Objective, rng: np.random.Generator,
                       n_points: int = 15, fd_step: float = 1e-6) -> None:
    """Check an objective's self-consistency on sampled points.

    Verifies the gradient against central finite differences (relative
    tolerance 1e-4 at step 1e-6), the gradient-Lipschitz witness, and the
    convexity witness.  Raises ``ValueError`` on the first violation.
    """
    pts = [rng.standard_normal(obj.dim) for _ in range(n_points)]
    for x in pts:
        g = obj.gradient(x)
        for i in range(obj.dim):
            e = np.zeros(obj.dim)
            e[i] = fd_step
            fd = (obj.value(x + e) - obj.value(x - e)) / (2 * fd_step)
            if abs(fd - g[i]) > 1e-4 * (1 + abs(g[i])):
                raise ValueError(
                    f"{obj.name}: gradient component {i} disagrees with "
                    f"finite differences ({fd} vs {g[i]})")
    for x, y in zip(pts, pts[1:]):
        gx, gy = obj.gradient(x), obj.gradient(y)
        lhs = np.linalg.norm(gx - gy)
        rhs = obj.lipschitz_L * np.linalg.norm(x - y) * (1 + 1e-8)
        if lhs > rhs:
            raise ValueError(f"{obj.name}: Lipschitz witness failed "
                             f"({lhs} > {rhs})")
        if obj.value(y) < obj.value(x) + gx @ (y - x) - 1e-10:
            raise ValueError(f"{obj.name}: convexity witness failed")


# ---------------------------------------------------------------------------
# mirror maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MirrorMap:
    """Distance-generating function bundle.

    ``dual_map`` is the gradient of the conjugate (it sends a dual vector to a
    feasible primal point); ``to_dual`` is a canonical section of the
    subgradient, i.e. ``dual_map(to_dual(x)) == x`` for interior feasible
    ``x``.  ``primal_bregman(y, x)`` and ``dual_bregman(z2, z1)`` are the
    divergences of the generator and of its conjugate.  ``sigma`` is the
    strong-convexity modulus of order ``order_p`` with respect to ``norm``;
    ``dual_norm`` is the paired norm on gradients.
    """

    dim: int
    phi: Callable[[Vector], float]
    dual_map: Callable[[Vector], Vector]
    to_dual: Callable[[Vector], Vector]
    sigma: float
    order_p: int
    feasible_set: FeasibleSet
    primal_bregman: Callable[[Vector, Vector], float]
    dual_bregman: Callable[[Vector, Vector], float]
    norm: Callable[[Vector], float]
    dual_norm: Callable[[Vector], float]
    name: str = "mirror-map"


def _l2(v):
    return float(np.linalg.norm(v))


def _l1(v):
    return float(np.abs(v).sum())


def _linf(v):
    return float(np.abs(v).max())


def make_euclidean_map(dim: int) -> MirrorMap:
    """Half squared Euclidean norm; the identity geometry.

    Mirror descent with this map is plain gradient descent.
    """
    if dim < 1:
        raise InvalidDimensionError("make_euclidean_map needs dim >= 1")

    def primal_bregman(y, x):
        d = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
        return 0.5 * float(d @ d)

    return MirrorMap(
        dim=dim,
        phi=lambda x: 0.5 * float(np.asarray(x, dtype=float) @ np.asarray(x, dtype=float)),
        dual_map=lambda z: np.asarray(z, dtype=float).copy(),
        to_dual=lambda x: np.asarray(x, dtype=float).copy(),
        sigma=1.0,
        order_p=2,
        feasible_set=whole_space(dim),
        primal_bregman=primal_bregman,
        dual_bregman=primal_bregman,
        norm=_l2,
        dual_norm=_l2,
        name="euclidean",
    )


def _neg_entropy(x) -> float:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        return np.inf
    pos = x > 0
    return float(np.sum(x[pos] * np.log(x[pos])))


def _generalized_kl(y, x) -> float:
    # Bregman divergence of negative entropy on the nonnegative orthant;
    # 0 log 0 = 0, and +inf when mass sits where the reference has none.
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(y < 0) or np.any(x < 0):
        return np.inf
    ypos = y > 0
    if np.any(ypos & (x == 0)):
        return np.inf
    val = float(np.sum(y[ypos] * np.log(y[ypos] / x[ypos])))
    return val + float(x.sum() - y.sum())


def _entropy_dual_bregman(z2, z1) -> float:
    # Divergence of log-sum-exp.  Entries of z1 at -inf carry zero softmax
    # weight and contribute nothing; this keeps boundary reference points
    # (images of simplex faces) usable.
    z2 = np.asarray(z2, dtype=float)
    z1 = np.asarray(z1, dtype=float)
    w = softmax(z1)
    mask = w > 0
    val = float(logsumexp(z2) - logsumexp(z1))
    return val - float(np.sum(w[mask] * (z2[mask] - z1[mask])))


def make_entropy_map(dim: int) -> MirrorMap:
    """Negative entropy on the probability simplex.

    The dual map is a max-shifted softmax (the canonical representative of the
    shift-invariant dual class), the primal divergence is Kullback-Leibler,
    and the modulus is 1 with respect to the l1 norm.
    """
    if dim < 2:
        raise InvalidDimensionError("make_entropy_map needs dim >= 2")

    def dual_map(z):
        z = np.asarray(z, dtype=float)
        w = np.exp(z - z.max())
        return w / w.sum()

    def to_dual(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(x)

    return MirrorMap(
        dim=dim,
        phi=_neg_entropy,
        dual_map=dual_map,
        to_dual=to_dual,
        sigma=1.0,
        order_p=2,
        feasible_set=probability_simplex(dim),
        primal_bregman=_generalized_kl,
        dual_bregman=_entropy_dual_bregman,
        norm=_l1,
        dual_norm=_linf,
        name="entropy",
    )


@lru_cache(maxsize=None)
def pth_power_modulus(p: int, grid: int = 600) -> float:
    """Certified lower bound on ``p D(y, x) / ||y - x||^p`` for the p-th power generator.

    The ratio is invariant under rotation and scaling, so for any dimension it
    is determined by the radius ratio and angle between the two points; the
    infimum over a fine 2-d grid of that family (shrunk by 1%) is a safe
    modulus of order-p strong convexity.
    """
    if p == 2:
        return 1.0
    ratios = np.concatenate([np.logspace(-3, 3, grid), [1.0]])
    angles = np.linspace(0.0, np.pi, grid)
    x = np.array([1.0, 0.0])
    best = np.inf
    for u in ratios:
        for th in angles:
            y = u * np.array([np.cos(th), np.sin(th)])
            d = y - x
            nd = np.linalg.norm(d)
            if nd < 1e-9:
                continue
            div = (np.linalg.norm(y) ** p / p - 1.0 / p
                   - float(x @ d))  # grad phi at x = |x|^{p-2} x = e1
            best = min(best, p * div / nd ** p)
    return 0.99 * float(best)


def make_pth_power_map(dim: int, p: int) -> MirrorMap:
    """Generator ``||x||_2^p / p`` on the whole space, strongly convex of order p.

    For p = 2 this is the Euclidean map.  The modulus ``sigma`` is the
    certified grid bound from :func:`pth_power_modulus`.
    """
    if p < 2 or int(p) != p:
        raise InvalidOrderError("make_pth_power_map needs integer p >= 2")
    if dim < 1:
        raise InvalidDimensionError("make_pth_power_map needs dim >= 1")
    p = int(p)
    q = p / (p - 1.0)

    def dual_map(z):
        z = np.asarray(z, dtype=float)
        n = float(np.linalg.norm(z))
        if n == 0.0:
            return np.zeros_like(z)
        return n ** ((2.0 - p) / (p - 1.0)) * z

    def to_dual(x):
        x = np.asarray(x, dtype=float)
        n = float(np.linalg.norm(x))
        if n == 0.0:
            return np.zeros_like(x)
        return n ** (p - 2.0) * x

    def phi(x):
        return float(np.linalg.norm(x) ** p) / p

    def phi_star(z):
        return float(np.linalg.norm(z) ** q) / q

    def primal_bregman(y, x):
        y = np.asarray(y, dtype=float)
        x = np.asarray(x, dtype=float)
        return phi(y) - phi(x) - float(to_dual(x) @ (y - x))

    def dual_bregman(z2, z1):
        z2 = np.asarray(z2, dtype=float)
        z1 = np.asarray(z1, dtype=float)
        return phi_star(z2) - phi_star(z1) - float(dual_map(z1) @ (z2 - z1))

    return MirrorMap(
        dim=dim,
        phi=phi,
        dual_map=dual_map,
        to_dual=to_dual,
        sigma=1.0 if p == 2 else pth_power_modulus(p),
        order_p=p,
        feasible_set=whole_space(dim),
        primal_bregman=primal_bregman,
        dual_bregman=dual_bregman,
        norm=_l2,
        dual_norm=_l2,
        name=f"pth_power(p={p})",
    )


def dual_bregman_equals_primal(mirror_map: MirrorMap, z0, zstar):
    """Evaluate both sides of the primal/dual divergence identity.

    Returns ``(D_dual(z0, zstar), D_primal(xstar, x0))`` with
    ``x0 = dual_map(z0)`` and ``xstar = dual_map(zstar)``; the two values
    agree for every conjugate pair.
    """
    x0 = mirror_map.dual_map(z0)
    xstar = mirror_map.dual_map(zstar)
    return (mirror_map.dual_bregman(np.asarray(z0, dtype=float),
                                    np.asarray(zstar, dtype=float)),
            mirror_map.primal_bregman(xstar, x0))


MAP_BUILDERS = {
    "euclidean": make_euclidean_map,
    "entropy": make_entropy_map,
    "pth_power": make_pth_power_map,
}
