"""
Data models for parrep-sensitivity.

This package contains reaction networks and their propensity kinds, the
built-in networks, observables, the metastable region partition and the
deterministic rate equation.
"""

from .builtins import (
    BUILTIN_MODELS,
    builtin_birth_death,
    builtin_genetic_switch,
    builtin_schlogl,
    get_builtin,
)
from .network import ParameterVector, Reaction, ReactionNetwork
from .observable import Binning, Observable
from .region import RegionMap
from .rre import deterministic_drift, fixed_points_1d

__all__ = [
    "BUILTIN_MODELS",
    "builtin_birth_death",
    "builtin_genetic_switch",
    "builtin_schlogl",
    "get_builtin",
    "ParameterVector",
    "Reaction",
    "ReactionNetwork",
    "Binning",
    "Observable",
    "RegionMap",
    "deterministic_drift",
    "fixed_points_1d",
]
