"""
parrep-sensitivity - Parallel replica simulation of bistable reaction networks.

This package accelerates stationary sampling of stochastic reaction networks
with the parallel replica method for continuous time Markov chains, and
estimates gradient-free stationary sensitivity bounds from the path-space
Fisher information and the integrated autocorrelation of observables. A
truncated chemical master equation solver serves as the reference.
"""

__version__ = "0.1.0"
__author__ = "parrep-sensitivity contributors"

from .config import RunConfig, Settings, parse_config
from .core import (
    ParRepParams,
    ParRepReport,
    ReportWriter,
    TrajectoryAccumulator,
    accumulate_fim,
    combine_bounds,
    estimate_iaf,
    run_parrep,
    run_ssa,
    stationary_sensitivity,
    stationary_solve,
)
from .experiment import ExperimentRunner, SpeedupRecord, measure_speedup, reproduce, run_experiment
from .models import Observable, ReactionNetwork, RegionMap, get_builtin

__all__ = [
    "RunConfig",
    "Settings",
    "parse_config",
    "ParRepParams",
    "ParRepReport",
    "ReportWriter",
    "TrajectoryAccumulator",
    "accumulate_fim",
    "combine_bounds",
    "estimate_iaf",
    "run_parrep",
    "run_ssa",
    "stationary_sensitivity",
    "stationary_solve",
    "ExperimentRunner",
    "SpeedupRecord",
    "measure_speedup",
    "reproduce",
    "run_experiment",
    "Observable",
    "ReactionNetwork",
    "RegionMap",
    "get_builtin",
]
