"""
Across-trajectory statistics.

This module turns per-trajectory results into means with normal-theory
confidence half-widths and compares sampled histograms against reference
distributions.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..config.settings import DEFAULT_SETTINGS
from ..models.network import FloatArray

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SampleSummary:
    """Mean of independent samples with a confidence half-width."""

    mean: float
    half_width: float
    std: float
    n: int

    @property
    def low(self) -> float:
        return self.mean - self.half_width

    @property
    def high(self) -> float:
        return self.mean + self.half_width

    def contains(self, value: float) -> bool:
        return self.low <= value <= self.high

    def overlaps(self, other: "SampleSummary") -> bool:
        return self.low <= other.high and other.low <= self.high

    def to_dict(self) -> Dict[str, Any]:
        return {"mean": self.mean, "half_width": self.half_width, "std": self.std, "n": self.n}


class TrajectoryAnalyzer:
    """
    Statistics over independent trajectories.

    Means are reported with half-width z * s / sqrt(n); a single sample has
    an undefined (NaN) half-width.
    """

    def __init__(self, z: float = DEFAULT_SETTINGS.CONFIDENCE_Z) -> None:
        self.z = z

    def summarize(self, samples: Sequence[float]) -> SampleSummary:
        """
        Summarize independent scalar samples.

        Args:
            samples: One value per trajectory

        Returns:
            SampleSummary with mean, half-width and standard deviation

        Raises:
            ValueError: If no samples are given
        """
        values = np.asarray(samples, dtype=np.float64)
        if values.size == 0:
            raise ValueError("Cannot summarize an empty sample")
        if values.size == 1:
            logger.warning("Confidence interval from a single trajectory is undefined")
            return SampleSummary(float(values[0]), float("nan"), float("nan"), 1)
        std = float(values.std(ddof=1))
        half_width = self.z * std / np.sqrt(values.size)
        return SampleSummary(float(values.mean()), half_width, std, int(values.size))

    def summarize_columns(
        self, labels: Sequence[str], rows: Sequence[Sequence[float]]
    ) -> Dict[str, SampleSummary]:
        """Summarize every column of a (trajectory x label) table."""
        table = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(labels))
        return {label: self.summarize(table[:, i]) for i, label in enumerate(labels)}

    @staticmethod
    def normalize(weights: Sequence[float]) -> FloatArray:
        """Scale nonnegative weights to unit mass."""
        values = np.asarray(weights, dtype=np.float64)
        total = values.sum()
        if total <= 0:
            raise ValueError("Cannot normalize weights with zero mass")
        return values / total

    @staticmethod
    def tv_distance(p: Sequence[float], q: Sequence[float]) -> float:
        """Total variation distance between two weight vectors, each normalized first."""
        a = TrajectoryAnalyzer.normalize(p)
        b = TrajectoryAnalyzer.normalize(q)
        if a.shape != b.shape:
            raise ValueError(f"Histograms differ in shape: {a.shape} vs {b.shape}")
        return float(0.5 * np.abs(a - b).sum())

    @staticmethod
    def relative_error(estimate: float, reference: float) -> float:
        if reference == 0:
            return abs(estimate)
        return abs(estimate - reference) / abs(reference)

    def pooled_histogram(self, histograms: Sequence[Sequence[float]]) -> FloatArray:
        """Sum of per-trajectory occupancy histograms, normalized."""
        return self.normalize(np.sum(np.asarray(histograms, dtype=np.float64), axis=0))

    def compare_means(
        self, estimate: SampleSummary, reference: SampleSummary
    ) -> Dict[str, Optional[float]]:
        """Difference of two independent means with its half-width."""
        if estimate.n < 2 or reference.n < 2:
            return {"difference": estimate.mean - reference.mean, "half_width": None}
        se = np.sqrt(estimate.std**2 / estimate.n + reference.std**2 / reference.n)
        return {"difference": estimate.mean - reference.mean, "half_width": float(self.z * se)}


def summaries_to_dict(summaries: Dict[str, SampleSummary]) -> Dict[str, Dict[str, Any]]:
    return {label: s.to_dict() for label, s in summaries.items()}


def column(rows: Sequence[Dict[str, Any]], key: str) -> List[Any]:
    return [row[key] for row in rows]
