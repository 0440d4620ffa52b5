"""Mirror descent, accelerated mirror descent, and their continuous-time flows,
instrumented with executable convergence certificates."""

from .amd import (AmdState, HigherOrderState, amd_constrained_lyapunov,
                  amd_constrained_step, amd_init, amd_unconstrained_lyapunov,
                  amd_unconstrained_step, condition_residual,
                  higher_order_gate, higher_order_init, higher_order_lyapunov,
                  higher_order_step, higher_order_y_oracle, rising_factorial,
                  run_amd_constrained, run_amd_unconstrained, run_higher_order)
from .diagnostics import (AuditReport, RateEstimate, audit_lyapunov, fit_rate,
                          running_min)
from .flows import (FlowState, continuous_lyapunov_accelerated,
                    continuous_lyapunov_mirror, integrate_accelerated_flow,
                    integrate_mirror_flow, run_accelerated_flow,
                    run_mirror_flow)
from .md import MdState, md_certified_decrease, md_init, md_lyapunov, md_step, run_md
from .problems import (FeasibleSet, MirrorMap, Objective, QuadraticObjective,
                       box, dual_bregman_equals_primal, euclidean_ball,
                       make_entropy_map, make_euclidean_map, make_logsumexp,
                       make_pth_power_map, make_quadratic,
                       make_simplex_quadratic, probability_simplex,
                       project_simplex, pth_power_modulus, validate_objective,
                       whole_space)
from .traces import LyapunovTrace, RunResult, read_csv, write_csv

__version__ = "0.1.0"

__all__ = [
    "AmdState", "AuditReport", "FeasibleSet", "FlowState", "HigherOrderState",
    "LyapunovTrace", "MdState", "MirrorMap", "Objective", "QuadraticObjective",
    "RateEstimate", "RunResult", "amd_constrained_lyapunov",
    "amd_constrained_step", "amd_init", "amd_unconstrained_lyapunov",
    "amd_unconstrained_step", "audit_lyapunov", "box", "condition_residual",
    "continuous_lyapunov_accelerated", "continuous_lyapunov_mirror",
    "dual_bregman_equals_primal", "euclidean_ball", "fit_rate",
    "higher_order_gate", "higher_order_init", "higher_order_lyapunov",
    "higher_order_step", "higher_order_y_oracle", "integrate_accelerated_flow",
    "integrate_mirror_flow", "make_entropy_map", "make_euclidean_map",
    "make_logsumexp", "make_pth_power_map", "make_quadratic",
    "make_simplex_quadratic", "md_certified_decrease", "md_init",
    "md_lyapunov", "md_step", "probability_simplex", "project_simplex",
    "pth_power_modulus", "read_csv", "rising_factorial", "run_accelerated_flow",
    "run_amd_constrained", "run_amd_unconstrained", "run_higher_order",
    "run_md", "run_mirror_flow", "running_min", "validate_objective",
    "whole_space", "write_csv",
]
