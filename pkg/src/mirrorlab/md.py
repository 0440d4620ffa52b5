"""Mirror descent in mirror-map form, with its per-step decrease certificate.

The update is ``z <- z - sigma * s * grad f(x)`` followed by
``x <- dual_map(z)``; with the Euclidean map this is exactly gradient descent.
Construction accepts any step ``s`` in ``(0, 2/L)``, but the decrease
certificate (and the monotonicity it implies) is only claimed for
``s <= 1/L`` -- the audit functions report against that regime.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import (InvalidOrderError, NumericalFailureError,
                         StepGateError, UnsupportedDiagnosticError)
from .problems import MirrorMap, Objective, objective_gap
from .traces import LyapunovTrace, RunResult


@dataclass
class MdState:
    """One mirror-descent iterate: counter, primal point, dual point, step."""

    k: int
    x: np.ndarray
    z: np.ndarray
    step_s: float
    trace: Optional[LyapunovTrace] = None


def md_init(x0, obj: Objective, mirror_map: MirrorMap, step_s: float) -> MdState:
    """Build the initial state with ``dual_map(z0) = x0``.

    Requires ``0 < s < 2/L`` and a feasible start.
    """
    if not (0.0 < step_s < 2.0 / obj.lipschitz_L):
        raise StepGateError(
            f"step {step_s} outside (0, 2/L) with L={obj.lipschitz_L}")
    x0 = np.asarray(x0, dtype=float)
    if not mirror_map.feasible_set.contains(x0):
        raise ValueError("x0 must lie in the feasible set")
    return MdState(k=0, x=x0.copy(), z=mirror_map.to_dual(x0),
                   step_s=float(step_s))


def md_step(state: MdState, obj: Objective, mirror_map: MirrorMap) -> MdState:
    """Advance one step."""
    if mirror_map.order_p != 2:
        raise InvalidOrderError("md_step requires an order-2 mirror map")
    g = obj.gradient(state.x)
    if not np.all(np.isfinite(g)):
        raise NumericalFailureError("non-finite gradient", iterate=state.x)
    z = state.z - mirror_map.sigma * state.step_s * g
    x = mirror_map.dual_map(z)
    if not np.all(np.isfinite(x)):
        raise NumericalFailureError("non-finite iterate", iterate=x)
    return MdState(k=state.k + 1, x=x, z=z, step_s=state.step_s)


def _require_minimizer(obj: Objective):
    if obj.known_min_value is None or obj.known_minimizer is None:
        raise UnsupportedDiagnosticError(
            "certificates need obj.known_minimizer and known_min_value")


def md_lyapunov(state: MdState, obj: Objective, mirror_map: MirrorMap,
                zstar) -> float:
    """Energy ``k*sigma*s*[f(x_k) - f*] + D_dual(z_k, z*)`` at the current state."""
    _require_minimizer(obj)
    gap = objective_gap(obj, state.x)
    return (state.k * mirror_map.sigma * state.step_s * gap
            + mirror_map.dual_bregman(state.z, np.asarray(zstar, dtype=float)))


def md_certified_decrease(prev: MdState, new: MdState, obj: Objective,
                          mirror_map: MirrorMap, zstar):
    """Observed energy difference across one step and its certified bound.

    The bound is ``(-k - 1/2 + (k+1)Ls/2) * sigma * ||x_{k+1} - x_k||^2``
    (k of the pre-step state); it is non-positive whenever ``s <= 1/L``.
    """
    diff = (md_lyapunov(new, obj, mirror_map, zstar)
            - md_lyapunov(prev, obj, mirror_map, zstar))
    k, s, lip = prev.k, prev.step_s, obj.lipschitz_L
    step_sq = float(np.sum((new.x - prev.x) ** 2))
    bound = (-k - 0.5 + (k + 1) * lip * s / 2.0) * mirror_map.sigma * step_sq
    return diff, bound


def run_md(obj: Objective, mirror_map: MirrorMap, x0, step_s: float,
           n_iters: int) -> RunResult:
    """Run mirror descent for a fixed budget and build its certificate trace.

    Trace CSV columns: ``k, f_gap, lyapunov, certified_bound, step_norm_sq``.
    """
    _require_minimizer(obj)
    zstar = mirror_map.to_dual(obj.known_minimizer)
    state = md_init(x0, obj, mirror_map, step_s)
    xs = [state.x.copy()]
    values = [md_lyapunov(state, obj, mirror_map, zstar)]
    gaps = [objective_gap(obj, state.x)]
    bounds = []
    step_sq = []
    for _ in range(n_iters):
        new = md_step(state, obj, mirror_map)
        _, bound = md_certified_decrease(state, new, obj, mirror_map, zstar)
        bounds.append(bound)
        step_sq.append(float(np.sum((new.x - state.x) ** 2)))
        state = new
        xs.append(state.x.copy())
        values.append(md_lyapunov(state, obj, mirror_map, zstar))
        gaps.append(objective_gap(obj, state.x))
    bounds.append(0.0)
    step_sq.append(0.0)
    ks = np.arange(n_iters + 1)
    trace = LyapunovTrace(times=ks.astype(float), values=np.array(values),
                          certified_bounds=np.array(bounds))
    state.trace = trace
    columns = {
        "k": ks,
        "f_gap": np.array(gaps),
        "lyapunov": trace.values,
        "certified_bound": trace.certified_bounds,
        "step_norm_sq": np.array(step_sq),
    }
    return RunResult(xs=np.array(xs), trace=trace, columns=columns,
                     final_state=state)
