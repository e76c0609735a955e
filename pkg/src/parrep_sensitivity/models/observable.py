"""
Observables and histogram binnings evaluated along trajectories.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np

from .network import FloatArray, IntArray

OBSERVABLE_KINDS = ("species", "indicator", "constant")


@dataclass(frozen=True)
class Observable:
    """
    A pure function of the state.

    Kinds:
        species: population of ``species``
        indicator: 1 when ``low <= x[species] <= high``, else 0
        constant: ``value`` everywhere
    """

    label: str
    kind: str
    species: int = 0
    low: Optional[int] = None
    high: Optional[int] = None
    value: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in OBSERVABLE_KINDS:
            raise ValueError(f"Unknown observable kind '{self.kind}'")
        if self.kind == "indicator" and self.low is None and self.high is None:
            raise ValueError(f"Indicator observable '{self.label}' needs low or high")

    @classmethod
    def population(cls, label: str, species: int) -> "Observable":
        return cls(label=label, kind="species", species=species)

    @classmethod
    def constant(cls, label: str = "one", value: float = 1.0) -> "Observable":
        return cls(label=label, kind="constant", value=value)

    def evaluate_many(self, states: IntArray) -> FloatArray:
        """Observable values of shape (N,) for states of shape (N, n)."""
        if self.kind == "constant":
            return np.full(states.shape[0], self.value, dtype=np.float64)
        column = states[:, self.species]
        if self.kind == "species":
            return column.astype(np.float64)
        inside = np.ones(states.shape[0], dtype=bool)
        if self.low is not None:
            inside &= column >= self.low
        if self.high is not None:
            inside &= column <= self.high
        return inside.astype(np.float64)

    def evaluate(self, x: Sequence[int]) -> float:
        return float(self.evaluate_many(np.asarray([x], dtype=np.int64))[0])

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"label": self.label, "kind": self.kind}
        if self.kind == "constant":
            data["value"] = self.value
        else:
            data["species"] = self.species
        if self.kind == "indicator":
            data["low"] = self.low
            data["high"] = self.high
        return data


@dataclass(frozen=True)
class Binning:
    """
    Histogram bins over one species coordinate.

    Bins of ``width`` cover [low, high]; two extra slots collect the
    occupancy below and above the range so the total mass is preserved.
    """

    species: int
    low: int
    high: int
    width: int = 1

    def __post_init__(self) -> None:
        if self.high < self.low:
            raise ValueError(f"Empty binning range [{self.low}, {self.high}]")
        if self.width < 1:
            raise ValueError(f"Bin width must be >= 1, got {self.width}")

    @property
    def n_bins(self) -> int:
        return (self.high - self.low) // self.width + 1

    @property
    def n_slots(self) -> int:
        return self.n_bins + 2

    def slot_many(self, states: IntArray) -> IntArray:
        """Slot index per state: 0 underflow, 1..n_bins bins, n_bins+1 overflow."""
        column = states[:, self.species]
        slots = (column - self.low) // self.width + 1
        slots = np.where(column < self.low, 0, slots)
        slots = np.where(column > self.high, self.n_bins + 1, slots)
        return slots.astype(np.int64)

    def bin_lower_edges(self) -> IntArray:
        return self.low + self.width * np.arange(self.n_bins, dtype=np.int64)

    def to_dict(self) -> Dict[str, Any]:
        return {"species": self.species, "low": self.low, "high": self.high, "width": self.width}
