"""Trace post-processing: power-law rate fits, running minima, Lyapunov audits."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .exceptions import InsufficientDataError, MalformedTraceError
from .traces import LyapunovTrace

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RateEstimate:
    """Least-squares power-law exponent on log-log pairs."""

    slope: float
    intercept: float
    window: Tuple[int, int]
    max_residual: float


@dataclass(frozen=True)
class AuditReport:
    """Outcome of checking observed Lyapunov differences against certified bounds."""

    total_steps: int
    violations: int
    worst_excess: float
    monotone: bool


def fit_rate(series, times, window: Optional[Tuple[float, float]] = None) -> RateEstimate:
    """Fit ``log v = slope * log t + intercept`` by least squares.

    ``window`` is an inclusive time range ``(t_lo, t_hi)``; when omitted, the
    first 10% and last 5% of samples are dropped (transients and
    floating-point floors distort log-log tails).  Non-positive values inside
    the window are trimmed and reported via logging; fewer than 5 surviving
    points is an error.
    """
    v = np.asarray(series, dtype=float)
    t = np.asarray(times, dtype=float)
    if v.size != t.size:
        raise MalformedTraceError("series and times must have equal length")
    if window is None:
        lo_i = int(np.floor(0.10 * v.size))
        hi_i = v.size - int(np.floor(0.05 * v.size))
        keep = np.zeros(v.size, dtype=bool)
        keep[lo_i:hi_i] = True
    else:
        keep = (t >= window[0]) & (t <= window[1])
    positive = v > 0
    trimmed = int(np.sum(keep & ~positive))
    if trimmed:
        log.warning("fit_rate trimmed %d non-positive values", trimmed)
    keep &= positive & (t > 0)
    idx = np.nonzero(keep)[0]
    if idx.size < 5:
        raise InsufficientDataError(
            f"only {idx.size} usable points remain for the fit")
    lt, lv = np.log(t[idx]), np.log(v[idx])
    slope, intercept = np.polyfit(lt, lv, 1)
    max_residual = float(np.max(np.abs(lv - (slope * lt + intercept))))
    return RateEstimate(slope=float(slope), intercept=float(intercept),
                        window=(int(idx[0]), int(idx[-1])),
                        max_residual=max_residual)


def running_min(series) -> np.ndarray:
    """Prefix minima: element i is the minimum of the first i+1 entries."""
    v = np.asarray(series, dtype=float)
    if v.size == 0:
        raise ValueError("running_min needs a nonempty series")
    return np.minimum.accumulate(v)


def audit_lyapunov(trace: LyapunovTrace, tolerance: float = 1e-9) -> AuditReport:
    """Count steps whose observed Lyapunov increase exceeds its certified bound.

    A step ``i -> i+1`` violates when
    ``values[i+1] - values[i] > certified_bounds[i] + tolerance * (1 + |values[i]|)``.
    """
    values = np.asarray(trace.values, dtype=float)
    bounds = np.asarray(trace.certified_bounds, dtype=float)
    if values.size != bounds.size:
        raise MalformedTraceError("values and certified_bounds length mismatch")
    if values.size < 2:
        return AuditReport(total_steps=0, violations=0,
                           worst_excess=-np.inf, monotone=True)
    diffs = values[1:] - values[:-1]
    allowed = bounds[:-1] + tolerance * (1.0 + np.abs(values[:-1]))
    excess = diffs - allowed
    violations = int(np.sum(excess > 0))
    return AuditReport(total_steps=int(diffs.size),
                       violations=violations,
                       worst_excess=float(excess.max()),
                       monotone=violations == 0)
