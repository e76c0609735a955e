"""
Partition of the state space into two metastable regions by a threshold
on one coordinate.
"""

from dataclasses import dataclass
from typing import Any, Dict, Sequence, Tuple

import numpy as np

from .network import IntArray

ORIENTATIONS = ("lower", "upper")


@dataclass(frozen=True)
class RegionMap:
    """
    Separatrix on ``coordinate`` at ``threshold``.

    With orientation ``lower`` region 0 is ``x[coordinate] <= threshold``;
    with ``upper`` region 0 is the other side. Every state lands in exactly
    one of the two regions.
    """

    coordinate: int
    threshold: float
    orientation: str = "lower"
    labels: Tuple[str, str] = ("W+", "W-")

    def __post_init__(self) -> None:
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"Orientation must be one of {ORIENTATIONS}, got '{self.orientation}'")
        if len(self.labels) != 2 or self.labels[0] == self.labels[1]:
            raise ValueError(f"RegionMap needs two distinct labels, got {self.labels}")

    def region_many(self, states: IntArray) -> IntArray:
        """Region index (0 or 1) per state of a batch of shape (N, n)."""
        below = states[:, self.coordinate] <= self.threshold
        if self.orientation == "lower":
            return np.where(below, 0, 1).astype(np.int64)
        return np.where(below, 1, 0).astype(np.int64)

    def region_of(self, x: Sequence[int]) -> int:
        below = x[self.coordinate] <= self.threshold
        if self.orientation == "lower":
            return 0 if below else 1
        return 1 if below else 0

    def label(self, region: int) -> str:
        return self.labels[region]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "species": self.coordinate,
            "threshold": self.threshold,
            "orientation": self.orientation,
            "labels": list(self.labels),
        }
