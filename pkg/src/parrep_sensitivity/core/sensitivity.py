"""
Gradient-free sensitivity bounds for stationary observables.

The path-space Fisher information rate is estimated as the ergodic average
of sum_j lambda_j g_j g_j^T with g_j the parameter gradient of
log lambda_j. The integrated autocorrelation of an observable is estimated
from the spread of its time integrals across independent windows. Their
product bounds the derivative of the stationary mean in any direction.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..config.settings import DEFAULT_SETTINGS
from ..exceptions import EmptyWindow, InsufficientSamples, NegativeQuadraticForm
from ..models.network import FloatArray, ReactionNetwork
from .ssa import TrajectoryAccumulator

logger = logging.getLogger(__name__)

Direction = Union[Sequence[float], FloatArray]


@dataclass(frozen=True)
class FimEstimate:
    """
    Path-space Fisher information rate with confidence half-widths.

    Attributes:
        matrix: Symmetric l x l estimate
        half_widths: Per-entry confidence half-widths (NaN for one trajectory)
        n_traj: Number of trajectories averaged
        window: (start, end) of the sampling window
        param_names: Parameter labels of the rows and columns
        confidence_level: Nominal coverage of the half-widths
    """

    matrix: FloatArray
    half_widths: FloatArray
    n_traj: int
    window: Tuple[float, float]
    param_names: Tuple[str, ...] = ()
    confidence_level: float = DEFAULT_SETTINGS.CONFIDENCE_LEVEL

    @property
    def size(self) -> int:
        return int(self.matrix.shape[0])

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix).min())

    def is_psd(self, tol: float = DEFAULT_SETTINGS.PSD_TOL) -> bool:
        """Eigenvalues >= -tol * max(trace, 1)."""
        scale = max(float(np.trace(self.matrix)), 1.0)
        return self.min_eigenvalue() >= -tol * scale

    def to_dict(self) -> Dict[str, Any]:
        names = list(self.param_names) or [f"c{k + 1}" for k in range(self.size)]
        return {
            "parameters": names,
            "matrix": self.matrix.tolist(),
            "half_widths": self.half_widths.tolist(),
            "n_traj": self.n_traj,
            "window": list(self.window),
            "confidence_level": self.confidence_level,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FimEstimate":
        matrix = np.asarray(data["matrix"], dtype=np.float64)
        half_widths = np.asarray(
            data.get("half_widths", np.zeros_like(matrix)), dtype=np.float64
        )
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"FIM matrix must be square, got shape {matrix.shape}")
        return cls(
            matrix=matrix,
            half_widths=half_widths,
            n_traj=int(data.get("n_traj", 0)),
            window=tuple(data.get("window", (0.0, 0.0))),  # type: ignore[arg-type]
            param_names=tuple(data.get("parameters", ())),
            confidence_level=float(data.get("confidence_level", DEFAULT_SETTINGS.CONFIDENCE_LEVEL)),
        )


@dataclass(frozen=True)
class IafEstimate:
    """Integrated autocorrelation of one observable over windows of length T."""

    label: str
    value: float
    window_length: float
    n_traj: int
    mean: float = float("nan")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "observable": self.label,
            "value": self.value,
            "window_length": self.window_length,
            "n_traj": self.n_traj,
            "mean": self.mean,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "IafEstimate":
        value = float(data["value"])
        if value < 0:
            raise ValueError(f"IAF must be nonnegative, got {value}")
        return cls(
            label=str(data.get("observable", "f")),
            value=value,
            window_length=float(data.get("window_length", 0.0)),
            n_traj=int(data.get("n_traj", 0)),
            mean=float(data.get("mean", float("nan"))),
        )


@dataclass(frozen=True)
class SensitivityBound:
    observable: str
    direction: str
    bound: float
    iaf: float
    quadratic_form: float


@dataclass
class SensitivityBoundReport:
    """
    Bounds per (observable, direction) with the estimates they came from.
    """

    bounds: List[SensitivityBound]
    directions: Dict[str, List[float]]
    fim: FimEstimate
    iafs: List[IafEstimate]
    provenance: Dict[str, Any] = field(default_factory=dict)

    def bound(self, observable: str, direction: str) -> float:
        for item in self.bounds:
            if item.observable == observable and item.direction == direction:
                return item.bound
        raise KeyError(f"No bound for ({observable}, {direction})")

    def table_rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "observable": b.observable,
                "direction": b.direction,
                "bound": b.bound,
                "iaf": b.iaf,
                "quadratic_form": b.quadratic_form,
            }
            for b in self.bounds
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "fim": self.fim.to_dict(),
            "iaf": [iaf.to_dict() for iaf in self.iafs],
            "directions": self.directions,
            "bounds": self.table_rows(),
            "provenance": self.provenance,
        }


def fim_rate(net: ReactionNetwork, acc: TrajectoryAccumulator) -> FloatArray:
    """
    Time-averaged Fisher integrand of one trajectory segment.

    Raises:
        EmptyWindow: If the segment holds no simulated time
    """
    if not acc.clock > 0:
        raise EmptyWindow("No simulated time fell inside the sampling window")
    return acc.fim_integral(net) / acc.clock


def fim_from_samples(
    samples: Sequence[FloatArray],
    window: Tuple[float, float],
    param_names: Sequence[str] = (),
    z: float = DEFAULT_SETTINGS.CONFIDENCE_Z,
) -> FimEstimate:
    """
    Combine per-trajectory FIM rates into an estimate with half-widths.

    Half-widths are z times the standard error of the per-entry mean.
    """
    if len(samples) == 0:
        raise EmptyWindow("No trajectory segments to average")
    stack = np.asarray(samples, dtype=np.float64)
    mean = stack.mean(axis=0)
    mean = 0.5 * (mean + mean.T)
    n = stack.shape[0]
    if n > 1:
        half_widths = z * stack.std(axis=0, ddof=1) / np.sqrt(n)
    else:
        logger.warning("FIM from a single trajectory has no confidence interval")
        half_widths = np.full_like(mean, np.nan)
    bounds = (float(window[0]), float(window[1]))
    return FimEstimate(mean, half_widths, n, bounds, tuple(param_names))


def accumulate_fim(
    net: ReactionNetwork,
    segments: Sequence[TrajectoryAccumulator],
    window: Optional[Tuple[float, float]] = None,
) -> FimEstimate:
    """
    Estimate the Fisher information rate from stationary trajectory segments.

    Args:
        net: Reaction network the segments were simulated with
        segments: One accumulator per trajectory, covering the window only
        window: (start, end) recorded in the estimate; defaults to (0, T)

    Returns:
        FimEstimate averaged across trajectories

    Raises:
        EmptyWindow: If there are no segments or one holds no time
    """
    if not segments:
        raise EmptyWindow("No trajectory segments to average")
    rates = [fim_rate(net, acc) for acc in segments]
    if window is None:
        window = (0.0, segments[0].clock)
    return fim_from_samples(rates, window, net.params.names)


def estimate_iaf(
    samples: Sequence[float], window_length: float, label: str = "f"
) -> IafEstimate:
    """
    Integrated autocorrelation from per-window time integrals.

    Args:
        samples: Y_k, the integral of f over the k-th window
        window_length: Common window length T
        label: Observable label

    Returns:
        IafEstimate with value var(Y) / T (unbiased variance)

    Raises:
        InsufficientSamples: If fewer than two samples are given
    """
    values = np.asarray(samples, dtype=np.float64)
    if values.size < 2:
        raise InsufficientSamples(
            f"IAF of '{label}' needs at least 2 trajectories, got {values.size}"
        )
    if not window_length > 0:
        raise ValueError(f"Window length must be positive, got {window_length}")
    variance = float(np.var(values, ddof=1))
    return IafEstimate(
        label, variance / window_length, window_length, int(values.size), float(values.mean())
    )


def quadratic_form(
    matrix: FloatArray, v: Direction, tol: float = DEFAULT_SETTINGS.PSD_TOL
) -> float:
    """
    v^T M v, clamped at zero within rounding.

    Raises:
        ValueError: If v does not match the matrix size
        NegativeQuadraticForm: If the form is negative beyond tol * max(trace, 1)
    """
    direction = np.asarray(v, dtype=np.float64)
    if direction.shape != (matrix.shape[0],):
        raise ValueError(
            f"Direction of length {direction.size} does not match FIM size {matrix.shape[0]}"
        )
    value = float(direction @ matrix @ direction)
    if value < 0:
        scale = max(abs(float(np.trace(matrix))), 1.0) * max(float(direction @ direction), 1.0)
        if value < -tol * scale:
            raise NegativeQuadraticForm(f"v^T I v = {value:.6g} is negative")
        return 0.0
    return value


def _directions(
    fim: FimEstimate, directions: Optional[Union[Mapping[str, Direction], Sequence[Direction]]]
) -> Dict[str, List[float]]:
    names = list(fim.param_names) or [f"c{k + 1}" for k in range(fim.size)]
    if directions is None:
        return {name: np.eye(fim.size)[k].tolist() for k, name in enumerate(names)}
    if isinstance(directions, Mapping):
        return {str(k): np.asarray(v, dtype=np.float64).tolist() for k, v in directions.items()}
    return {f"v{i + 1}": np.asarray(v, dtype=np.float64).tolist() for i, v in enumerate(directions)}


def combine_bounds(
    fim: FimEstimate,
    iafs: Sequence[IafEstimate],
    directions: Optional[Union[Mapping[str, Direction], Sequence[Direction]]] = None,
) -> SensitivityBoundReport:
    """
    Bound every stationary sensitivity by sqrt(IAF) * sqrt(v^T FIM v).

    Args:
        fim: Fisher information rate estimate
        iafs: One estimate per observable
        directions: Named or positional directions; the canonical basis
            labelled by parameter names when omitted

    Returns:
        SensitivityBoundReport with one bound per (observable, direction)

    Raises:
        NegativeQuadraticForm: If v^T FIM v is negative beyond rounding
    """
    named = _directions(fim, directions)
    forms = {label: quadratic_form(fim.matrix, v) for label, v in named.items()}
    bounds = [
        SensitivityBound(
            observable=iaf.label,
            direction=label,
            bound=float(np.sqrt(iaf.value) * np.sqrt(form)),
            iaf=iaf.value,
            quadratic_form=form,
        )
        for iaf in iafs
        for label, form in forms.items()
    ]
    provenance = {
        "fim_n_traj": fim.n_traj,
        "fim_window": list(fim.window),
        "iaf_n_traj": {iaf.label: iaf.n_traj for iaf in iafs},
        "confidence_level": fim.confidence_level,
    }
    return SensitivityBoundReport(bounds, named, fim, list(iafs), provenance)


def transient_bound(varhat: float, fim_T: FloatArray, v: Direction) -> float:
    """
    Finite-horizon bound sqrt(Var f) * sqrt(v^T I_T v).

    Args:
        varhat: Variance of the observable at the horizon
        fim_T: Path-space Fisher information on [0, T], approximately T times the rate
        v: Direction in parameter space

    Raises:
        ValueError: If varhat is negative
        NegativeQuadraticForm: If v^T I_T v is negative beyond rounding
    """
    if varhat < 0:
        raise ValueError(f"Variance must be nonnegative, got {varhat}")
    return float(np.sqrt(varhat) * np.sqrt(quadratic_form(np.asarray(fim_T, dtype=np.float64), v)))


def horizon_fim(fim: FimEstimate, horizon: float) -> FloatArray:
    """Path-space information on [0, horizon] from the stationary rate."""
    return horizon * fim.matrix
