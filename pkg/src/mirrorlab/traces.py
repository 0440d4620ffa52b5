"""Lyapunov traces, run results, and lossless CSV round-tripping."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from .exceptions import MalformedTraceError

FLOAT_FMT = "%.17g"  # lossless double round-trip


@dataclass
class LyapunovTrace:
    """Time-indexed Lyapunov values with per-step certified difference bounds.

    ``certified_bounds[i]`` bounds the transition ``values[i+1] - values[i]``;
    the final entry pads the arrays to equal length and is never consumed by
    an audit.
    """

    times: np.ndarray
    values: np.ndarray
    certified_bounds: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.certified_bounds = np.asarray(self.certified_bounds, dtype=float)
        if not (self.times.size == self.values.size == self.certified_bounds.size):
            raise MalformedTraceError(
                "times, values and certified_bounds must have equal length")
        if self.times.size >= 2 and not np.all(np.diff(self.times) > 0):
            raise MalformedTraceError("times must be strictly increasing")

    def __len__(self):
        return self.times.size


@dataclass
class RunResult:
    """Output of a run driver: iterate history, certificate trace, CSV columns."""

    xs: np.ndarray
    trace: Optional[LyapunovTrace]
    columns: Dict[str, np.ndarray]
    final_state: object = None
    ys: Optional[np.ndarray] = None


def write_csv(path, columns: Dict[str, np.ndarray]) -> None:
    """Write named columns as CSV with a header row and 17-digit floats."""
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    n_rows = arrays[0].shape[0]
    if any(a.shape[0] != n_rows for a in arrays):
        raise MalformedTraceError("columns must have equal length")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(n_rows):
            row = []
            for a in arrays:
                v = a[i]
                if np.issubdtype(a.dtype, np.integer):
                    row.append(str(int(v)))
                else:
                    row.append(FLOAT_FMT % float(v))
            writer.writerow(row)


def read_csv(path) -> Dict[str, np.ndarray]:
    """Read a trace CSV back into named float columns."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader if r]
    data = {}
    for j, name in enumerate(header):
        data[name] = np.array([float(r[j]) for r in rows])
    return data
