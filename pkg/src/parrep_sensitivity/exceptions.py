"""
Error hierarchy for parrep-sensitivity.

Every error carries a machine-readable ``error_class`` that the CLI prints,
and simulation errors may carry the partial result accumulated before the
failure.
"""

from typing import Any, List, Optional


class ParRepError(Exception):
    """Base class for all errors raised by the package."""

    error_class = "ParRepError"

    def __init__(self, message: str, partial: Optional[Any] = None) -> None:
        super().__init__(message)
        self.partial = partial


class NetworkDefinitionError(ParRepError):
    """A reaction network or network document violates its invariants."""

    error_class = "NetworkDefinitionError"


class SchemaError(ParRepError):
    """A run configuration document does not match the schema."""

    error_class = "SchemaError"

    def __init__(self, field_path: str, message: str) -> None:
        super().__init__(f"{field_path}: {message}")
        self.field_path = field_path


class AbsorbingState(ParRepError):
    """The total propensity vanished; the chain cannot move."""

    error_class = "AbsorbingState"


class AllReplicasExited(ParRepError):
    """Every dephasing replica left the region in the same round."""

    error_class = "AllReplicasExited"


class EmptyWindow(ParRepError):
    """No simulated time fell inside the sampling window."""

    error_class = "EmptyWindow"


class InsufficientSamples(ParRepError):
    """Too few trajectories for a variance estimate."""

    error_class = "InsufficientSamples"


class NegativeQuadraticForm(ParRepError):
    """A Fisher information quadratic form is negative beyond rounding."""

    error_class = "NegativeQuadraticForm"


class BoxTooSmall(ParRepError):
    """A requested state lies outside the truncation box."""

    error_class = "BoxTooSmall"


class Reducible(ParRepError):
    """The truncated generator has more than one closed communicating class."""

    error_class = "Reducible"


class SingularSystem(ParRepError):
    """The bordered stationary system is rank-deficient."""

    error_class = "SingularSystem"


def error_for(error_class: str) -> type:
    """Exception class for an ``error_class`` name; ParRepError when unknown."""
    for cls in (ParRepError, *_all_subclasses(ParRepError)):
        if cls.error_class == error_class and cls is not SchemaError:
            return cls
    return ParRepError


def _all_subclasses(cls: type) -> List[type]:
    found: List[type] = []
    for sub in cls.__subclasses__():
        found.append(sub)
        found.extend(_all_subclasses(sub))
    return found
