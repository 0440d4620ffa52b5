"""Reproducible experiment runner.

Subcommands: ``run``, ``sweep``, ``rates``, ``audit``, ``compare``.  A run
wires an objective, a mirror map, and an algorithm from a config (INI-style
sections of key = value pairs, overridable by flags), writes the module's
trace CSV plus a JSON sidecar (config echo, wall time, L, sigma, initial
energy), audits the certificate trace, and exits nonzero on violations unless
``--no-audit`` is given.

Exit codes: 0 ok, 2 config error, 3 audit violation, 4 numerical failure.

The seed fully determines each run: identical configs reproduce the trace CSV
byte for byte.  The sidecar contains wall time and is excluded from that
contract.  The default output root is ``$MIRRORLAB_OUT`` (falling back to
``./mirrorlab-out``).
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from . import amd, diagnostics, flows, md, problems, traces
from .exceptions import (ConfigError, MirrorLabError, NumericalFailureError,
                         OracleFailureError, StiffnessError)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_AUDIT = 3
EXIT_NUMERICAL = 4

ALGORITHMS = ("md", "amd-unconstrained", "amd-constrained",
              "amd-higher-order", "flow-mirror", "flow-amd")
OBJECTIVES = ("quadratic", "logsumexp", "simplex-quadratic")

#: per-algorithm audit tolerance: discrete certificates are exact (1e-9);
#: flow certificates carry trapezoid discretization error (1e-6).
AUDIT_TOL = {"flow-mirror": 1e-6, "flow-amd": 1e-6}


@dataclass
class ExperimentConfig:
    """Everything a run needs; the seed makes the trace CSV reproducible."""

    objective: str = "quadratic"
    dim: int = 8
    eig_lo: float = 1e-4
    eig_hi: float = 1.0
    temperature: float = 1.0
    mirror_map: str = "euclidean"
    map_p: int = 2
    algorithm: str = "md"
    step_s: Optional[float] = None
    s_over_L: Optional[float] = None
    iters: int = 1000
    t_end: float = 10.0
    tol: float = 1e-9
    delta: float = 1e-3
    sqrt_s: float = 0.0
    samples: int = 1000
    p: int = 2
    const_C: Optional[float] = None
    const_M: Optional[float] = None
    seed: int = 0
    out: Optional[str] = None
    no_audit: bool = False
    allow_gate_violation: bool = False


_FLOATS = {"eig_lo", "eig_hi", "temperature", "step_s", "s_over_L", "t_end",
           "tol", "delta", "sqrt_s", "const_C", "const_M"}
_INTS = {"dim", "map_p", "iters", "samples", "p", "seed"}
_BOOLS = {"no_audit", "allow_gate_violation"}


def _config_parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys are case-sensitive (s_over_L)
    return parser


def load_config(path, section: str = "experiment") -> ExperimentConfig:
    """Read one section of an INI-style config file."""
    parser = _config_parser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    if section not in parser:
        raise ConfigError(f"config file {path} has no [{section}] section")
    cfg = ExperimentConfig()
    return apply_overrides(cfg, dict(parser[section]))


def apply_overrides(cfg: ExperimentConfig, overrides: Dict[str, object]) -> ExperimentConfig:
    for key, raw in overrides.items():
        key = key.replace("-", "_")
        if raw is None or not hasattr(cfg, key):
            if not hasattr(cfg, key):
                raise ConfigError(f"unknown config key {key!r}")
            continue
        if key in _FLOATS:
            value = float(raw)
        elif key in _INTS:
            value = int(raw)
        elif key in _BOOLS:
            value = raw if isinstance(raw, bool) else str(raw).lower() in ("1", "true", "yes")
        else:
            value = str(raw)
        setattr(cfg, key, value)
    return cfg


def build_objective(cfg: ExperimentConfig) -> problems.Objective:
    if cfg.objective == "quadratic":
        return problems.make_quadratic(cfg.dim, (cfg.eig_lo, cfg.eig_hi),
                                       seed=cfg.seed)
    if cfg.objective == "logsumexp":
        return problems.make_logsumexp(cfg.dim, seed=cfg.seed,
                                       temperature=cfg.temperature)
    if cfg.objective == "simplex-quadratic":
        return problems.make_simplex_quadratic(cfg.dim, (cfg.eig_lo, cfg.eig_hi),
                                               seed=cfg.seed)
    raise ConfigError(f"unknown objective {cfg.objective!r} "
                      f"(known: {', '.join(OBJECTIVES)})")


def build_map(cfg: ExperimentConfig) -> problems.MirrorMap:
    if cfg.mirror_map == "euclidean":
        return problems.make_euclidean_map(cfg.dim)
    if cfg.mirror_map == "entropy":
        return problems.make_entropy_map(cfg.dim)
    if cfg.mirror_map == "pth_power":
        return problems.make_pth_power_map(cfg.dim, cfg.map_p)
    raise ConfigError(f"unknown mirror map {cfg.mirror_map!r} "
                      f"(known: {', '.join(problems.MAP_BUILDERS)})")


def initial_point(cfg: ExperimentConfig, obj, mirror_map) -> np.ndarray:
    """Deterministic start: spread-spectrum offset for quadratics, the
    simplex barycenter for entropy geometry, a seeded point otherwise."""
    if mirror_map.feasible_set.kind == "probability-simplex":
        return np.ones(cfg.dim) / cfg.dim
    if isinstance(obj, problems.QuadraticObjective):
        return obj.spread_start()
    rng = np.random.default_rng(cfg.seed + 1)
    return rng.standard_normal(cfg.dim)


def resolve_step(cfg: ExperimentConfig, obj) -> float:
    if cfg.step_s is not None:
        return cfg.step_s
    if cfg.s_over_L is not None:
        return cfg.s_over_L / obj.lipschitz_L
    raise ConfigError("one of step_s or s_over_L is required "
                      "for discrete algorithms")


def check_gates(cfg: ExperimentConfig, obj, step: Optional[float]) -> None:
    """Certificate gates; override with allow_gate_violation (a warning stays)."""
    lip = obj.lipschitz_L
    msg = None
    if cfg.algorithm in ("md", "amd-unconstrained", "amd-constrained"):
        if step > 1.0 / lip:
            msg = f"step {step} exceeds the certificate gate 1/L={1.0 / lip}"
    elif cfg.algorithm == "amd-higher-order":
        if cfg.p == 2 and step > 0.5 / lip:
            msg = (f"step {step} exceeds the order-2 oracle gate "
                   f"1/(2L)={0.5 / lip}")
    if msg:
        if cfg.allow_gate_violation:
            print(f"warning: {msg} (override active)", file=sys.stderr)
        else:
            raise ConfigError(msg + " (pass --allow-gate-violation to force)")


def run_experiment(cfg: ExperimentConfig) -> Dict[str, object]:
    """Execute one configured run; returns paths and the audit report."""
    if cfg.algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {cfg.algorithm!r} "
                          f"(known: {', '.join(ALGORITHMS)})")
    obj = build_objective(cfg)
    mirror_map = build_map(cfg)
    x0 = initial_point(cfg, obj, mirror_map)

    t0 = time.perf_counter()
    if cfg.algorithm == "md":
        step = resolve_step(cfg, obj)
        check_gates(cfg, obj, step)
        result = md.run_md(obj, mirror_map, x0, step, cfg.iters)
    elif cfg.algorithm == "amd-unconstrained":
        step = resolve_step(cfg, obj)
        check_gates(cfg, obj, step)
        result = amd.run_amd_unconstrained(obj, mirror_map, x0, step, cfg.iters)
    elif cfg.algorithm == "amd-constrained":
        step = resolve_step(cfg, obj)
        check_gates(cfg, obj, step)
        result = amd.run_amd_constrained(obj, mirror_map, x0, step, cfg.iters)
    elif cfg.algorithm == "amd-higher-order":
        step = resolve_step(cfg, obj)
        check_gates(cfg, obj, step)
        result = amd.run_higher_order(obj, mirror_map, x0, step, cfg.iters,
                                      cfg.p, cfg.const_C, cfg.const_M)
    elif cfg.algorithm == "flow-mirror":
        result = flows.run_mirror_flow(obj, mirror_map, x0, cfg.t_end,
                                       cfg.tol, cfg.samples)
    else:
        result = flows.run_accelerated_flow(obj, mirror_map, x0, cfg.sqrt_s,
                                            cfg.t_end, cfg.tol, cfg.delta,
                                            cfg.samples)
    wall = time.perf_counter() - t0

    out_dir = Path(cfg.out) if cfg.out else default_out_root() / run_name(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "trace.csv"
    traces.write_csv(csv_path, result.columns)

    sidecar = {
        "config": asdict(cfg),
        "wall_time_s": wall,
        "lipschitz_L": obj.lipschitz_L,
        "sigma": mirror_map.sigma,
        "lyapunov_initial": float(result.trace.values[0]),
    }
    meta_path = out_dir / "run.json"
    meta_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True))

    tol = AUDIT_TOL.get(cfg.algorithm, 1e-9)
    report = diagnostics.audit_lyapunov(result.trace, tolerance=tol)
    return {"csv": csv_path, "meta": meta_path, "audit": report,
            "result": result}


def default_out_root() -> Path:
    return Path(os.environ.get("MIRRORLAB_OUT", "mirrorlab-out"))


def run_name(cfg: ExperimentConfig) -> str:
    return f"{cfg.algorithm}_{cfg.objective}_{cfg.mirror_map}_seed{cfg.seed}"


def compare_flow_discrete(cfg: ExperimentConfig) -> Dict[str, object]:
    """Deviation between accelerated iterates and the flow at t_k = (k+1) sqrt(s).

    Euclidean-compatible configurations only.  Returns per-k deviations and
    their maximum over the horizon.
    """
    if cfg.mirror_map != "euclidean":
        raise ConfigError("compare requires the euclidean mirror map")
    obj = build_objective(cfg)
    mirror_map = build_map(cfg)
    x0 = initial_point(cfg, obj, mirror_map)
    step = resolve_step(cfg, obj)
    root_s = float(np.sqrt(step))
    n_steps = max(int(np.floor(cfg.t_end / root_s)) - 1, 1)
    t_k = (np.arange(n_steps + 1) + 1.0) * root_s

    discrete = amd.run_amd_unconstrained(obj, mirror_map, x0, step, n_steps)
    states = flows.integrate_accelerated_flow(
        x0, obj, mirror_map, root_s, t_k[-1], cfg.tol, cfg.delta,
        sample_times=t_k)
    flow_xs = np.array([s.X for s in states])
    deviations = np.linalg.norm(discrete.xs - flow_xs, axis=1)
    return {"k": np.arange(n_steps + 1), "t": t_k, "deviation": deviations,
            "max_deviation": float(deviations.max()), "step_s": step}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file with an [experiment] section")
    p.add_argument("--objective", choices=OBJECTIVES)
    p.add_argument("--dim", type=int)
    p.add_argument("--eig-lo", type=float, dest="eig_lo")
    p.add_argument("--eig-hi", type=float, dest="eig_hi")
    p.add_argument("--temperature", type=float)
    p.add_argument("--map", dest="mirror_map",
                   choices=tuple(problems.MAP_BUILDERS))
    p.add_argument("--map-p", type=int, dest="map_p")
    p.add_argument("--algo", dest="algorithm", choices=ALGORITHMS)
    p.add_argument("--step-s", type=float, dest="step_s")
    p.add_argument("--s-over-L", type=float, dest="s_over_L")
    p.add_argument("--iters", type=int)
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--tol", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--sqrt-s", type=float, dest="sqrt_s")
    p.add_argument("--samples", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--const-C", type=float, dest="const_C")
    p.add_argument("--const-M", type=float, dest="const_M")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--no-audit", action="store_true", default=None,
                   dest="no_audit")
    p.add_argument("--allow-gate-violation", action="store_true", default=None,
                   dest="allow_gate_violation")


def _config_from_args(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {k: v for k, v in vars(args).items()
                 if hasattr(cfg, k) and v is not None}
    return apply_overrides(cfg, overrides)


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    out = run_experiment(cfg)
    report = out["audit"]
    print(f"trace: {out['csv']}")
    print(f"audit: {report.total_steps} steps, {report.violations} violations,"
          f" worst excess {report.worst_excess:.3e}")
    if report.violations and not cfg.no_audit:
        return EXIT_AUDIT
    return EXIT_OK


def cmd_sweep(args) -> int:
    parser = _config_parser()
    if not parser.read(args.config):
        raise ConfigError(f"cannot read config file {args.config}")
    sections = [s for s in parser.sections() if s != "DEFAULT"]
    if not sections:
        raise ConfigError("sweep config has no sections")
    out_root = Path(args.out) if args.out else default_out_root() / "sweep"
    configs = []
    for section in sections:
        cfg = apply_overrides(ExperimentConfig(), dict(parser[section]))
        if cfg.out is None:
            cfg.out = str(out_root / section)
        configs.append((section, cfg))

    worst = EXIT_OK
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        futures = {pool.submit(run_experiment, cfg): name
                   for name, cfg in configs}
        for future, name in futures.items():
            report = future.result()["audit"]
            status = "ok" if report.monotone else "VIOLATIONS"
            print(f"{name}: {status} ({report.violations}/{report.total_steps})")
            if report.violations:
                worst = EXIT_AUDIT
    return worst


def cmd_rates(args) -> int:
    data = traces.read_csv(args.csv)
    times_col = args.times_column
    if times_col is None:
        times_col = "k" if "k" in data else "t"
    if times_col not in data:
        raise ConfigError(f"no {times_col!r} column in {args.csv}")
    window = None
    if args.window:
        lo, hi = args.window.split(":")
        window = (float(lo), float(hi))
    rows = []
    for quantity in args.quantity:
        if quantity not in data:
            raise ConfigError(f"no {quantity!r} column in {args.csv}")
        series = data[quantity]
        if args.running_min:
            series = diagnostics.running_min(series)
        est = diagnostics.fit_rate(series, data[times_col], window=window)
        target = args.target
        ok = est.slope <= target if target is not None else True
        rows.append((quantity, est.slope, target, ok))
    if args.csv_out:
        print("quantity,slope,target,pass")
        for name, slope, target, ok in rows:
            t = "" if target is None else f"{target:g}"
            print(f"{name},{slope:.6g},{t},{str(ok).lower()}")
    else:
        print(f"{'quantity':<24}{'slope':>12}{'target':>10}{'pass':>6}")
        for name, slope, target, ok in rows:
            t = "-" if target is None else f"{target:g}"
            print(f"{name:<24}{slope:>12.4f}{t:>10}{'yes' if ok else 'NO':>6}")
    return EXIT_OK if all(r[3] for r in rows) else EXIT_AUDIT


def cmd_audit(args) -> int:
    data = traces.read_csv(args.csv)
    for col in ("lyapunov", "certified_bound"):
        if col not in data:
            raise ConfigError(f"no {col!r} column in {args.csv}")
    times = data.get("k", data.get("t"))
    trace = traces.LyapunovTrace(times=times, values=data["lyapunov"],
                                 certified_bounds=data["certified_bound"])
    report = diagnostics.audit_lyapunov(trace, tolerance=args.tolerance)
    print(f"steps={report.total_steps} violations={report.violations} "
          f"worst_excess={report.worst_excess:.3e} monotone={report.monotone}")
    return EXIT_OK if report.monotone else EXIT_AUDIT


def cmd_compare(args) -> int:
    base = _config_from_args(args)
    base.mirror_map = "euclidean"
    rows = []
    for s in args.s_values:
        cfg = ExperimentConfig(**asdict(base))
        cfg.step_s = s
        out = compare_flow_discrete(cfg)
        rows.append((s, out["max_deviation"]))
        print(f"s={s:g}: max deviation {out['max_deviation']:.6e}")
        if args.out:
            out_dir = Path(args.out)
            out_dir.mkdir(parents=True, exist_ok=True)
            traces.write_csv(out_dir / f"compare_s{s:g}.csv",
                             {"k": out["k"], "t": out["t"],
                              "deviation": out["deviation"]})
    monotone = all(rows[i + 1][1] < rows[i][1] for i in range(len(rows) - 1))
    print(f"monotone decrease across s values: {'yes' if monotone else 'NO'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mirrorlab",
        description="Mirror-descent experiment runner with certificate audits")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment")
    _add_run_flags(run_p)
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="run every section of a config file")
    sweep_p.add_argument("--config", required=True)
    sweep_p.add_argument("--out")
    sweep_p.add_argument("--jobs", type=int, default=2)
    sweep_p.set_defaults(func=cmd_sweep)

    rates_p = sub.add_parser("rates", help="fit power-law slopes on a trace CSV")
    rates_p.add_argument("csv")
    rates_p.add_argument("--quantity", action="append", required=True)
    rates_p.add_argument("--target", type=float)
    rates_p.add_argument("--window", help="time window lo:hi")
    rates_p.add_argument("--times-column", dest="times_column")
    rates_p.add_argument("--running-min", action="store_true")
    rates_p.add_argument("--csv-out", action="store_true")
    rates_p.set_defaults(func=cmd_rates)

    audit_p = sub.add_parser("audit", help="audit a trace CSV against its bounds")
    audit_p.add_argument("csv")
    audit_p.add_argument("--tolerance", type=float, default=1e-9)
    audit_p.set_defaults(func=cmd_audit)

    compare_p = sub.add_parser(
        "compare", help="iterates vs flow samples at t_k = (k+1) sqrt(s)")
    _add_run_flags(compare_p)
    compare_p.add_argument("--s-values", type=float, nargs="+",
                           default=[1e-2, 2.5e-3, 6.25e-4])
    compare_p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailureError, OracleFailureError, StiffnessError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except MirrorLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
