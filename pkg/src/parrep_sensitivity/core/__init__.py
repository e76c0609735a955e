"""
Core modules for parrep-sensitivity.

This package contains the simulation engines (direct-method SSA and the
parallel replica method), the sensitivity estimators, the truncated CME
solver and the document readers and writers.
"""

from .analyzer import TrajectoryAnalyzer
from .cme import (
    StateBox,
    build_truncated_generator,
    stationary_fim,
    stationary_sensitivity,
    stationary_solve,
)
from .parrep import ParRepParams, ParRepReport, dephase, decorrelate, parallel_phase, run_parrep
from .parser import NetworkParser, load_network
from .rng import RngStream, StreamKey
from .sensitivity import (
    FimEstimate,
    IafEstimate,
    accumulate_fim,
    combine_bounds,
    estimate_iaf,
    transient_bound,
)
from .ssa import TrajectoryAccumulator, draw_jump, embedded_step, run_ssa
from .writer import ReportWriter

__all__ = [
    "TrajectoryAnalyzer",
    "StateBox",
    "build_truncated_generator",
    "stationary_fim",
    "stationary_sensitivity",
    "stationary_solve",
    "ParRepParams",
    "ParRepReport",
    "dephase",
    "decorrelate",
    "parallel_phase",
    "run_parrep",
    "NetworkParser",
    "load_network",
    "RngStream",
    "StreamKey",
    "FimEstimate",
    "IafEstimate",
    "accumulate_fim",
    "combine_bounds",
    "estimate_iaf",
    "transient_bound",
    "TrajectoryAccumulator",
    "draw_jump",
    "embedded_step",
    "run_ssa",
    "ReportWriter",
]
