"""Accelerated mirror descent: unconstrained, constrained, and higher-order.

Three schemes share the weighted dual-averaging backbone:

* the unconstrained two-line recursion (whole space, Euclidean norm), whose
  energy certificate decreases by at least
  ``(k+1)(k+2) sigma s^2 / 2 * ||grad f(x_k)||^2`` per step when ``s <= 1/L``;
* the constrained three-sequence recursion, where the middle sequence is a
  projected gradient step and the certificate decrease is controlled by the
  gradient-mapping norm ``||y_{k+1} - x_k||``;
* the higher-order recursion of order ``p >= 2`` driven by a proximal
  ``y``-oracle, gated by ``C <= sigma M^{p-1} / ((p-1)^{p-1} p)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .exceptions import (InvalidOrderError, NumericalFailureError,
                         OracleFailureError, StepGateError,
                         UnsupportedDiagnosticError)
from .problems import MirrorMap, Objective, objective_gap
from .traces import LyapunovTrace, RunResult

UNCONSTRAINED = "unconstrained"
CONSTRAINED = "constrained"

#: progress-condition constants certified for the built-in y-oracles
DEFAULT_M = {2: 0.5, 3: 0.5}


@dataclass
class AmdState:
    """Accelerated-scheme iterate.

    ``y`` is populated only by the constrained variant, where ``x`` is always
    the feasible convex combination of ``y`` and ``dual_map(z)``.
    """

    variant: str
    k: int
    x: np.ndarray
    z: np.ndarray
    step_s: float
    y: Optional[np.ndarray] = None
    trace: Optional[LyapunovTrace] = None


def amd_init(x0, obj: Objective, mirror_map: MirrorMap, step_s: float,
             variant: str = UNCONSTRAINED) -> AmdState:
    if step_s <= 0:
        raise StepGateError("step_s must be positive")
    if variant not in (UNCONSTRAINED, CONSTRAINED):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == UNCONSTRAINED and mirror_map.feasible_set.kind != "whole-space":
        raise ValueError("the unconstrained variant needs a whole-space map")
    x0 = np.asarray(x0, dtype=float)
    if not mirror_map.feasible_set.contains(x0):
        raise ValueError("x0 must lie in the feasible set")
    y0 = x0.copy() if variant == CONSTRAINED else None
    return AmdState(variant=variant, k=0, x=x0.copy(),
                    z=mirror_map.to_dual(x0), step_s=float(step_s), y=y0)


def _finite_or_raise(v, what, iterate):
    if not np.all(np.isfinite(v)):
        raise NumericalFailureError(f"non-finite {what}", iterate=iterate)


def amd_unconstrained_step(state: AmdState, obj: Objective,
                           mirror_map: MirrorMap) -> AmdState:
    """One step of the two-line recursion.

    ``z_{k+1} = z_k - (k+1) sigma s / 2 * g`` and
    ``(k+3) x_{k+1} = 2 dual_map(z_{k+1}) + (k+1)(x_k - s g)`` with
    ``g = grad f(x_k)``; the second line is solved in closed form.
    """
    assert state.variant == UNCONSTRAINED
    k, s = state.k, state.step_s
    g = obj.gradient(state.x)
    _finite_or_raise(g, "gradient", state.x)
    z = state.z - 0.5 * (k + 1) * mirror_map.sigma * s * g
    x = (2.0 * mirror_map.dual_map(z) + (k + 1) * (state.x - s * g)) / (k + 3.0)
    _finite_or_raise(x, "iterate", x)
    return AmdState(variant=UNCONSTRAINED, k=k + 1, x=x, z=z, step_s=s)


def _require_minimizer(obj: Objective):
    if obj.known_min_value is None or obj.known_minimizer is None:
        raise UnsupportedDiagnosticError(
            "certificates need obj.known_minimizer and known_min_value")


def amd_unconstrained_lyapunov(state: AmdState, obj: Objective,
                               mirror_map: MirrorMap, zstar):
    """Energy at step k and the certified bound for the k -> k+1 transition.

    ``E(k) = (k+1)(k+2) sigma s [f(x_k) - f*] + 4 D_dual(z_{k+1}, z*)`` -- the
    dual point one update ahead, recomputed here from the recursion -- and the
    bound is ``-(k+1)(k+2) sigma s^2 / 2 * ||grad f(x_k)||^2``.
    """
    _require_minimizer(obj)
    k, s, sigma = state.k, state.step_s, mirror_map.sigma
    g = obj.gradient(state.x)
    z_next = state.z - 0.5 * (k + 1) * sigma * s * g
    gap = objective_gap(obj, state.x)
    energy = ((k + 1) * (k + 2) * sigma * s * gap
              + 4.0 * mirror_map.dual_bregman(z_next, np.asarray(zstar, dtype=float)))
    bound = -0.5 * (k + 1) * (k + 2) * sigma * s ** 2 * float(g @ g)
    return energy, bound


def amd_constrained_step(state: AmdState, obj: Objective,
                         mirror_map: MirrorMap) -> AmdState:
    """One step of the three-sequence recursion.

    ``y_{k+1}`` is the projected gradient step from ``x_k`` (the Euclidean
    gradient mapping on the feasible set); ``x_{k+1}`` is the feasible convex
    combination ``(k+1)/(k+3) y_{k+1} + 2/(k+3) dual_map(z_{k+1})``.
    """
    assert state.variant == CONSTRAINED
    k, s = state.k, state.step_s
    g = obj.gradient(state.x)
    _finite_or_raise(g, "gradient", state.x)
    z = state.z - 0.5 * (k + 1) * mirror_map.sigma * s * g
    y = mirror_map.feasible_set.project(state.x - s * g)
    _finite_or_raise(y, "projection", y)
    x = ((k + 1) * y + 2.0 * mirror_map.dual_map(z)) / (k + 3.0)
    return AmdState(variant=CONSTRAINED, k=k + 1, x=x, z=z, step_s=s, y=y)


def amd_constrained_lyapunov(state: AmdState, obj: Objective,
                             mirror_map: MirrorMap, zstar):
    """Energy at step k and the certified bound for the k -> k+1 transition.

    ``E(k) = k(k+1) sigma s [f(y_k) - f*] + 4 D_dual(z_k, z*)``; the bound
    ``-(k+1)(k+2)(1 - Ls) sigma / 2 * ||y_{k+1} - x_k||^2`` replays the
    deterministic gradient-mapping step to obtain ``y_{k+1}``.
    """
    _require_minimizer(obj)
    k, s, sigma = state.k, state.step_s, mirror_map.sigma
    gap = objective_gap(obj, state.y)
    energy = (k * (k + 1) * sigma * s * gap
              + 4.0 * mirror_map.dual_bregman(state.z, np.asarray(zstar, dtype=float)))
    g = obj.gradient(state.x)
    y_next = mirror_map.feasible_set.project(state.x - s * g)
    gm_sq = float(np.sum((y_next - state.x) ** 2))
    bound = -0.5 * (k + 1) * (k + 2) * (1.0 - obj.lipschitz_L * s) * sigma * gm_sq
    return energy, bound


def run_amd_unconstrained(obj: Objective, mirror_map: MirrorMap, x0,
                          step_s: float, n_iters: int) -> RunResult:
    """Trace CSV columns: ``k, f_gap, lyapunov, certified_bound, grad_norm_sq``."""
    _require_minimizer(obj)
    zstar = mirror_map.to_dual(obj.known_minimizer)
    state = amd_init(x0, obj, mirror_map, step_s, UNCONSTRAINED)
    xs = [state.x.copy()]
    values, bounds, gaps, grad_sq = [], [], [], []
    for _ in range(n_iters + 1):
        e, b = amd_unconstrained_lyapunov(state, obj, mirror_map, zstar)
        values.append(e)
        bounds.append(b)
        gaps.append(objective_gap(obj, state.x))
        g = obj.gradient(state.x)
        grad_sq.append(float(g @ g))
        if len(values) <= n_iters:
            state = amd_unconstrained_step(state, obj, mirror_map)
            xs.append(state.x.copy())
    bounds[-1] = 0.0
    ks = np.arange(n_iters + 1)
    trace = LyapunovTrace(times=ks.astype(float), values=np.array(values),
                          certified_bounds=np.array(bounds))
    state.trace = trace
    columns = {
        "k": ks,
        "f_gap": np.array(gaps),
        "lyapunov": trace.values,
        "certified_bound": trace.certified_bounds,
        "grad_norm_sq": np.array(grad_sq),
    }
    return RunResult(xs=np.array(xs), trace=trace, columns=columns,
                     final_state=state)


def run_amd_constrained(obj: Objective, mirror_map: MirrorMap, x0,
                        step_s: float, n_iters: int) -> RunResult:
    """Trace CSV columns: ``k, f_gap, lyapunov, certified_bound, gradient_map_norm_sq``.

    ``f_gap`` tracks the feasible sequence ``y_k``; ``gradient_map_norm_sq``
    is ``||y_{k+1} - x_k||^2`` for the step leaving row k.
    """
    _require_minimizer(obj)
    zstar = mirror_map.to_dual(obj.known_minimizer)
    state = amd_init(x0, obj, mirror_map, step_s, CONSTRAINED)
    xs = [state.x.copy()]
    ys = [state.y.copy()]
    values, bounds, gaps, gm_sq = [], [], [], []
    for _ in range(n_iters):
        e, b = amd_constrained_lyapunov(state, obj, mirror_map, zstar)
        values.append(e)
        bounds.append(b)
        gaps.append(objective_gap(obj, state.y))
        prev_x = state.x
        state = amd_constrained_step(state, obj, mirror_map)
        xs.append(state.x.copy())
        ys.append(state.y.copy())
        gm_sq.append(float(np.sum((state.y - prev_x) ** 2)))
    e, _ = amd_constrained_lyapunov(state, obj, mirror_map, zstar)
    values.append(e)
    bounds.append(0.0)
    gaps.append(objective_gap(obj, state.y))
    gm_sq.append(0.0)
    ks = np.arange(n_iters + 1)
    trace = LyapunovTrace(times=ks.astype(float), values=np.array(values),
                          certified_bounds=np.array(bounds))
    state.trace = trace
    columns = {
        "k": ks,
        "f_gap": np.array(gaps),
        "lyapunov": trace.values,
        "certified_bound": trace.certified_bounds,
        "gradient_map_norm_sq": np.array(gm_sq),
    }
    return RunResult(xs=np.array(xs), trace=trace, columns=columns,
                     final_state=state, ys=np.array(ys))


# ---------------------------------------------------------------------------
# higher-order scheme
# ---------------------------------------------------------------------------

def rising_factorial(k: int, p: int) -> int:
    """``k (k+1) ... (k+p-1)`` as an exact integer (native bignum, no overflow)."""
    if k < 0 or p < 1:
        raise ValueError("rising_factorial needs k >= 0, p >= 1")
    return math.prod(range(k, k + p))


def higher_order_gate(p: int, sigma: float, const_m: float) -> float:
    """Largest admissible scheme constant ``sigma M^{p-1} / ((p-1)^{p-1} p)``."""
    return sigma * const_m ** (p - 1) / ((p - 1) ** (p - 1) * p)


@dataclass
class HigherOrderState:
    """Iterate of the order-p scheme, with the per-step condition residuals."""

    p: int
    const_C: float
    const_M: float
    k: int
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    step_s: float
    condition_residuals: List[float] = field(default_factory=list)
    trace: Optional[LyapunovTrace] = None


def higher_order_init(x0, obj: Objective, mirror_map: MirrorMap, step_s: float,
                      p: int, const_C: Optional[float] = None,
                      const_M: Optional[float] = None) -> HigherOrderState:
    """Initial state; by default ``C`` sits at half the admissibility gate."""
    if step_s <= 0:
        raise StepGateError("step_s must be positive")
    if mirror_map.order_p != p:
        raise ValueError("mirror_map.order_p must equal the scheme order p")
    const_M = DEFAULT_M.get(p, 0.5) if const_M is None else float(const_M)
    gate = higher_order_gate(p, mirror_map.sigma, const_M)
    const_C = 0.5 * gate if const_C is None else float(const_C)
    if not (0.0 < const_C <= gate * (1 + 1e-12)):
        raise StepGateError(f"const_C={const_C} violates the gate {gate}")
    x0 = np.asarray(x0, dtype=float)
    return HigherOrderState(p=p, const_C=const_C, const_M=const_M, k=0,
                            x=x0.copy(), y=x0.copy(),
                            z=mirror_map.to_dual(x0), step_s=float(step_s))


def _hessian_matrix(obj: Objective, x: np.ndarray) -> np.ndarray:
    if obj.hessian is not None:
        h = np.asarray(obj.hessian(x), dtype=float)
    else:
        dim = x.size
        h = np.empty((dim, dim))
        step = 1e-6 * (1.0 + float(np.abs(x).max()))
        for i in range(dim):
            e = np.zeros(dim)
            e[i] = step
            h[:, i] = (obj.gradient(x + e) - obj.gradient(x - e)) / (2 * step)
    return 0.5 * (h + h.T)


def _cubic_prox(x, obj: Objective, s: float, reg_n: float = 1.0,
                budget: int = 100, tol: float = 1e-10) -> np.ndarray:
    """Minimize ``<g,d> + 0.5 <Hd,d> + (N/(3s)) ||d||^3`` over d.

    Damped fixed-point iteration on the step radius: with
    ``d(r) = -(H + (N/s) r I)^{-1} g`` the optimal radius solves
    ``r = ||d(r)||``, a contraction for convex H.
    """
    g0 = obj.gradient(x)
    gnorm = float(np.linalg.norm(g0))
    if gnorm == 0.0:
        return np.asarray(x, dtype=float).copy()
    h = _hessian_matrix(obj, x)
    lam = reg_n / s
    eye = np.eye(x.size)
    r = math.sqrt(gnorm / lam)  # exact radius for the pure cubic model
    d = None
    for _ in range(budget):
        d = np.linalg.solve(h + lam * r * eye, -g0)
        r_new = float(np.linalg.norm(d))
        if abs(r_new - r) <= 1e-15 * (1.0 + r_new):
            r = r_new
            break
        r = 0.5 * (r + r_new)
    d = np.linalg.solve(h + lam * r * eye, -g0)
    model_grad = g0 + h @ d + lam * float(np.linalg.norm(d)) * d
    resid = float(np.linalg.norm(model_grad))
    if resid > tol * (1.0 + gnorm):
        raise OracleFailureError(
            f"cubic model solve stalled at residual {resid}", residual=resid)
    return np.asarray(x, dtype=float) + d


def higher_order_y_oracle(x, obj: Objective, mirror_map: MirrorMap, p: int,
                          s: float) -> np.ndarray:
    """Proximal oracle producing the next feasible-progress point.

    p = 2: a plain gradient step ``x - s grad f(x)``.  p = 3: minimizer of the
    second-order model with cubic regularization ``(1/(3s)) ||d||^3`` via the
    damped radius fixed point.  The step condition is certified downstream by
    the recorded residuals rather than trusted from the constants.
    """
    x = np.asarray(x, dtype=float)
    if p == 2:
        return x - s * obj.gradient(x)
    if p == 3:
        return _cubic_prox(x, obj, s)
    raise InvalidOrderError("built-in y-oracles cover p in {2, 3} only")


def condition_residual(x_next, y_next, grad_y, mirror_map: MirrorMap, p: int,
                       s: float, const_m: float) -> float:
    """Slack of the progress condition at ``(y_{k+1}, x_{k+1})``.

    ``<grad f(y), x - y> - M s^{1/(p-1)} ||grad f(y)||_*^{p/(p-1)}``;
    nonnegative whenever the oracle honors its contract.
    """
    lhs = float(np.asarray(grad_y) @ (np.asarray(x_next) - np.asarray(y_next)))
    dual = mirror_map.dual_norm(grad_y)
    return lhs - const_m * s ** (1.0 / (p - 1)) * dual ** (p / (p - 1.0))


def higher_order_step(state: HigherOrderState, obj: Objective,
                      mirror_map: MirrorMap,
                      y_oracle: Callable = None) -> HigherOrderState:
    """One step of the order-p recursion.

    ``x_{k+1} = p/(k+p) dual_map(z_k) + k/(k+p) y_k`` (the dual point enters
    through its primal image so the combination is always a primal point),
    then ``y_{k+1}`` from the oracle and
    ``z_{k+1} = z_k - C s p (k+1)^{(p-1)} grad f(y_{k+1})``.  The progress
    condition's residual at ``(y_{k+1}, x_{k+1})`` is appended to
    ``condition_residuals``; a negative residual is recorded, not fatal.
    """
    if y_oracle is None:
        y_oracle = higher_order_y_oracle
    k, p, s = state.k, state.p, state.step_s
    w = mirror_map.dual_map(state.z)
    x_next = (p * w + k * state.y) / (k + p)
    try:
        y_next = y_oracle(x_next, obj, mirror_map, p, s)
    except OracleFailureError:
        raise
    except Exception as exc:
        raise OracleFailureError(f"y-oracle failed: {exc}") from exc
    g = obj.gradient(y_next)
    _finite_or_raise(g, "gradient", y_next)
    resid = condition_residual(x_next, y_next, g, mirror_map, p, s,
                               state.const_M)
    z_next = state.z - state.const_C * s * p * rising_factorial(k + 1, p - 1) * g
    return HigherOrderState(
        p=p, const_C=state.const_C, const_M=state.const_M, k=k + 1,
        x=x_next, y=y_next, z=z_next, step_s=s,
        condition_residuals=state.condition_residuals + [resid])


def higher_order_lyapunov(state: HigherOrderState, obj: Objective,
                          mirror_map: MirrorMap, zstar):
    """Energy at step k and the certified bound for the transition into k.

    ``E(k) = C s k^{(p)} [f(y_k) - f*] + D_dual(z_k, z*)``.  For k >= 1 the
    bound certifies ``E(k) - E(k-1)`` as
    ``[-M + (p-1)(p/sigma)^{1/(p-1)} C^{1/(p-1)}] C k^{(p)} s^{p/(p-1)}
    ||grad f(y_k)||_*^{p/(p-1)}`` (the oracle's y is needed, so this bound
    looks backward); at k = 0 the bound slot is 0.
    """
    _require_minimizer(obj)
    k, p, s = state.k, state.p, state.step_s
    c, m, sigma = state.const_C, state.const_M, mirror_map.sigma
    gap = objective_gap(obj, state.y)
    energy = (c * s * rising_factorial(k, p) * gap
              + mirror_map.dual_bregman(state.z, np.asarray(zstar, dtype=float)))
    if k == 0:
        return energy, 0.0
    g = obj.gradient(state.y)
    coeff = -m + (p - 1) * (p / sigma) ** (1.0 / (p - 1)) * c ** (1.0 / (p - 1))
    bound = (coeff * c * rising_factorial(k, p) * s ** (p / (p - 1.0))
             * mirror_map.dual_norm(g) ** (p / (p - 1.0)))
    return energy, bound


def run_higher_order(obj: Objective, mirror_map: MirrorMap, x0, step_s: float,
                     n_iters: int, p: int, const_C: Optional[float] = None,
                     const_M: Optional[float] = None,
                     y_oracle: Callable = None) -> RunResult:
    """Trace CSV columns: ``k, f_gap, lyapunov, certified_bound, eq17_residual``.

    ``eq17_residual`` at row k is the progress-condition slack recorded when
    producing ``y_{k+1}`` (0 on the final row).
    """
    _require_minimizer(obj)
    zstar = mirror_map.to_dual(obj.known_minimizer)
    state = higher_order_init(x0, obj, mirror_map, step_s, p, const_C, const_M)
    xs = [state.x.copy()]
    ys = [state.y.copy()]
    values, bounds, gaps = [], [], []
    e0, _ = higher_order_lyapunov(state, obj, mirror_map, zstar)
    values.append(e0)
    gaps.append(objective_gap(obj, state.y))
    for _ in range(n_iters):
        state = higher_order_step(state, obj, mirror_map, y_oracle)
        e, b = higher_order_lyapunov(state, obj, mirror_map, zstar)
        values.append(e)
        bounds.append(b)
        gaps.append(objective_gap(obj, state.y))
        xs.append(state.x.copy())
        ys.append(state.y.copy())
    bounds.append(0.0)
    residuals = np.concatenate([state.condition_residuals, [0.0]])
    ks = np.arange(n_iters + 1)
    trace = LyapunovTrace(times=ks.astype(float), values=np.array(values),
                          certified_bounds=np.array(bounds))
    state.trace = trace
    columns = {
        "k": ks,
        "f_gap": np.array(gaps),
        "lyapunov": trace.values,
        "certified_bound": trace.certified_bounds,
        "eq17_residual": residuals,
    }
    return RunResult(xs=np.array(xs), trace=trace, columns=columns,
                     final_state=state, ys=np.array(ys))
