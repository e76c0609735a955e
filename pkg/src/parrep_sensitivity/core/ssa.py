"""
Exact stochastic simulation kernel (Gillespie direct method).

The jump loop runs in the compiled kernels of ``core.kernels`` over
uniform blocks of the trajectory's stream and writes jumps to a fixed-size
log. The log is folded into the accumulator as time-weighted state
occupancy; time integrals of observables, histograms and the Fisher
integrand are all derived from the occupancy in one batched evaluation.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..config.settings import DEFAULT_SETTINGS
from ..exceptions import AbsorbingState
from ..models.network import FloatArray, IntArray, ReactionNetwork, State
from ..models.observable import Binning, Observable
from ..models.region import RegionMap
from . import kernels
from .rng import SERIAL_KEY, RngStream

logger = logging.getLogger(__name__)


class PathLog(NamedTuple):
    """
    Jumps written by one kernel call.

    ``states`` holds pre-jump states; ``channels`` is -1 for a holding
    interval cut at t_end.
    """

    status: int
    states: IntArray
    taus: FloatArray
    channels: IntArray
    clock: float
    region: int
    streak: int


def occupancy_of(states: IntArray, taus: FloatArray) -> Dict[State, float]:
    """Holding time per distinct state of a jump log."""
    if len(taus) == 0:
        return {}
    unique, inverse = np.unique(states, axis=0, return_inverse=True)
    times = np.bincount(inverse.ravel(), weights=taus, minlength=len(unique))
    return {tuple(row): t for row, t in zip(unique.tolist(), times.tolist())}


def _region_args(region_map: Optional[RegionMap]) -> Tuple[int, float, bool]:
    if region_map is None:
        return -1, 0.0, True
    return region_map.coordinate, float(region_map.threshold), region_map.orientation == "lower"


class SimulationKernel:
    """
    Per-network driver of the compiled jump loop.

    A kernel owns its log buffers and is used by one worker at a time; the
    network it wraps is immutable and may be shared.
    """

    def __init__(self, net: ReactionNetwork, log_size: int = 0) -> None:
        self.net = net
        self.arrays = net.kernel_arrays
        self.log_size = log_size or DEFAULT_SETTINGS.KERNEL_LOG_SIZE
        self._props = np.empty(net.n_reactions, dtype=np.float64)
        self._stoich = [tuple(int(v) for v in row) for row in self.arrays.stoich]
        self._allocate(self.log_size)

    def _allocate(self, rows: int) -> None:
        self._log_states = np.empty((rows, self.net.n_species), dtype=np.int64)
        self._log_taus = np.empty(rows, dtype=np.float64)
        self._log_channels = np.empty(rows, dtype=np.int64)

    def propensities(self, x: State) -> Tuple[float, FloatArray]:
        """(total propensity, per-channel propensities) at ``x``."""
        total = kernels.propensities_into(
            np.asarray(x, dtype=np.int64), *self.arrays[:4], self._props
        )
        return total, self._props.copy()

    def draw_jump(self, x: State, rng: RngStream) -> Tuple[float, int]:
        """
        Sample the holding time and the firing channel at ``x``.

        Consumes exactly two uniforms: the first for tau, the second for J.

        Raises:
            AbsorbingState: If the total propensity is zero
        """
        total, props = self.propensities(x)
        if total <= 0.0:
            raise AbsorbingState(f"Total propensity vanishes at state {x}")
        tau = -math.log1p(-rng.uniform()) / total
        return tau, int(kernels.select_channel(props, rng.uniform() * total))

    def embedded_step(self, x: State, rng: RngStream) -> int:
        """Sample the next channel of the embedded jump chain (one uniform)."""
        total, props = self.propensities(x)
        if total <= 0.0:
            raise AbsorbingState(f"Total propensity vanishes at state {x}")
        return int(kernels.select_channel(props, rng.uniform() * total))

    def successor(self, x: State, j: int) -> State:
        return tuple(a + b for a, b in zip(x, self._stoich[j]))

    def run(
        self,
        x: IntArray,
        rng: RngStream,
        clock: float,
        t_end: float,
        capacity: int,
        region_map: Optional[RegionMap] = None,
        region: int = 0,
        streak: int = 0,
        n_c: int = 0,
        stop_on_exit: bool = False,
    ) -> PathLog:
        """
        Run the compiled loop from ``x`` (updated in place) for at most
        ``capacity`` log rows, refilling uniforms as needed.

        The returned arrays are copies; the kernel's buffers are reused.
        """
        if capacity > len(self._log_taus):
            self._allocate(capacity)
        coordinate, threshold, lower = _region_args(region_map)
        rows = 0
        while True:
            uniforms, pos = rng.reserve(2)
            status, rows, clock, pos, region, streak = kernels.advance_path(
                x,
                clock,
                t_end,
                rows,
                capacity,
                uniforms,
                pos,
                *self.arrays,
                coordinate,
                threshold,
                lower,
                stop_on_exit,
                n_c,
                region,
                streak,
                self._props,
                self._log_states,
                self._log_taus,
                self._log_channels,
            )
            rng.consume(pos)
            if status != kernels.NEED_UNIFORMS:
                break
        return PathLog(
            int(status),
            self._log_states[:rows].copy(),
            self._log_taus[:rows].copy(),
            self._log_channels[:rows].copy(),
            float(clock),
            int(region),
            int(streak),
        )

    def fleming_viot(
        self,
        states: IntArray,
        jump_uniforms: FloatArray,
        resample: RngStream,
        region_map: RegionMap,
        region: int,
    ) -> Tuple[int, int, int, int]:
        """
        Run ``jump_uniforms.shape[1]`` dephasing rounds on ``states`` in place.

        Returns:
            (status, rounds completed, restarts, failing replica)
        """
        replicas = states.shape[0]
        exited = np.zeros(replicas, dtype=np.bool_)
        rounds = restarts = 0
        while True:
            uniforms, pos = resample.reserve(replicas)
            status, rounds, pos, count, failed = kernels.dephase_rounds(
                states,
                rounds,
                jump_uniforms,
                uniforms,
                pos,
                *self.arrays,
                *_region_args(region_map),
                region,
                self._props,
                exited,
            )
            resample.consume(pos)
            restarts += count
            if status != kernels.NEED_UNIFORMS:
                return int(status), int(rounds), restarts, int(failed)

    def advance(
        self,
        acc: "TrajectoryAccumulator",
        x: State,
        rng: RngStream,
        t_end: float,
        region_map: Optional[RegionMap] = None,
        n_c: int = 0,
    ) -> Tuple[State, bool]:
        """
        Simulate from ``x`` into ``acc`` until ``t_end`` or, when a region map
        is given, until ``n_c`` consecutive jumps stay in one region.

        The pre-jump state is weighted by its holding time; the last holding
        interval is cut at ``t_end`` so the clock lands on it exactly.

        Returns:
            (current state, True if the region criterion was met)
        """
        state = np.asarray(x, dtype=np.int64).copy()
        region = region_map.region_of(x) if region_map is not None else 0
        streak = 0
        while True:
            log = self.run(
                state, rng, acc.clock, t_end, self.log_size, region_map, region, streak, n_c
            )
            region, streak = log.region, log.streak
            acc.record(log, tuple(state.tolist()))
            if log.status == kernels.ABSORBING:
                raise AbsorbingState(f"Total propensity vanishes at state {acc.state}", acc)
            if log.status != kernels.LOG_FULL:
                return acc.state, log.status == kernels.DECORRELATED


@dataclass
class TrajectoryAccumulator:
    """
    Running record of one simulated trajectory.

    Attributes:
        clock: Simulated time T_s
        occupancy: Time spent in each visited state
        jump_counts: Firings per channel R_j
        state: Current state of the trajectory
        observables: Observables whose time integrals are reported
        binning: Optional histogram binning
        path: Thinned (t, x) samples taken every ``path_stride`` jumps
    """

    n_reactions: int
    observables: Tuple[Observable, ...] = ()
    binning: Optional[Binning] = None
    state: State = ()
    clock: float = 0.0
    occupancy: Dict[State, float] = field(default_factory=dict)
    jump_counts: List[int] = field(default_factory=list)
    n_jumps: int = 0
    path_stride: int = 0
    path: List[Tuple[float, State]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.jump_counts:
            self.jump_counts = [0] * self.n_reactions
        self.observables = tuple(self.observables)
        if self.path_stride and not self.path and self.state:
            self.path.append((self.clock, self.state))

    def add(self, x: State, duration: float) -> None:
        """Weight state ``x`` by ``duration`` and advance the clock."""
        self.occupancy[x] = self.occupancy.get(x, 0.0) + duration
        self.clock += duration

    def record(self, log: PathLog, state: State) -> None:
        """Fold a kernel log ending in ``state`` into the record."""
        for x, t in occupancy_of(log.states, log.taus).items():
            self.occupancy[x] = self.occupancy.get(x, 0.0) + t
        fired = log.channels[log.channels >= 0]
        for j, count in enumerate(np.bincount(fired, minlength=self.n_reactions).tolist()):
            self.jump_counts[j] += count
        if self.path_stride and len(fired):
            rows = np.flatnonzero(log.channels >= 0)
            numbers = self.n_jumps + 1 + np.arange(len(rows))
            picked = rows[numbers % self.path_stride == 0]
            if len(picked):
                times = np.cumsum(np.concatenate(([self.clock], log.taus)))[1:]
                posts = np.vstack((log.states[1:], np.asarray([state], dtype=np.int64)))
                for r in picked.tolist():
                    self.path.append((float(times[r]), tuple(posts[r].tolist())))
        self.n_jumps += len(fired)
        self.clock = log.clock
        self.state = state

    def merge(self, other: "TrajectoryAccumulator") -> None:
        """Append a later trajectory piece; merging is associative."""
        self.merge_delta(other.clock, other.occupancy, other.jump_counts, other.state)
        self.n_jumps += other.n_jumps - sum(other.jump_counts)

    def merge_delta(
        self, duration: float, occupancy: Dict[State, float], jumps: Sequence[int], state: State
    ) -> None:
        self.clock += duration
        for x, t in occupancy.items():
            self.occupancy[x] = self.occupancy.get(x, 0.0) + t
        for j, count in enumerate(jumps):
            self.jump_counts[j] += count
        self.n_jumps += sum(jumps)
        if state:
            self.state = state

    def _states(self) -> Tuple[np.ndarray, FloatArray]:
        if not self.occupancy:
            return np.zeros((0, len(self.state)), dtype=np.int64), np.zeros(0)
        states = np.array(list(self.occupancy.keys()), dtype=np.int64)
        times = np.fromiter(self.occupancy.values(), dtype=np.float64, count=len(self.occupancy))
        return states, times

    @property
    def integrals(self) -> FloatArray:
        """Time integral of every observable."""
        states, times = self._states()
        return np.array([float(o.evaluate_many(states) @ times) for o in self.observables])

    @property
    def averages(self) -> FloatArray:
        if self.clock <= 0:
            return np.full(len(self.observables), np.nan)
        return self.integrals / self.clock

    @property
    def histogram(self) -> FloatArray:
        """Occupancy time per slot of the binning (underflow, bins, overflow)."""
        if self.binning is None:
            return np.zeros(0)
        states, times = self._states()
        return np.bincount(
            self.binning.slot_many(states), weights=times, minlength=self.binning.n_slots
        ).astype(np.float64)

    @property
    def jumps(self) -> np.ndarray:
        return np.asarray(self.jump_counts, dtype=np.int64)

    def fim_integral(self, net: ReactionNetwork) -> FloatArray:
        """Integral over the trajectory of sum_j lambda_j g_j g_j^T, g_j = grad log lambda_j."""
        states, times = self._states()
        if len(times) == 0:
            return np.zeros((net.n_params, net.n_params))
        return np.einsum("n,nkl->kl", times, net.fim_integrand_many(states))

    def histogram_pairs(self) -> List[Tuple[str, float]]:
        """(bin label, occupancy time) pairs including under/overflow."""
        if self.binning is None:
            return []
        hist = self.histogram
        labels = ["below"] + [str(int(v)) for v in self.binning.bin_lower_edges()] + ["above"]
        return list(zip(labels, hist.tolist()))

    def to_report(self) -> Dict[str, Any]:
        """Structured trajectory report."""
        integrals = self.integrals
        return {
            "clock": self.clock,
            "state": list(self.state),
            "jumps": self.n_jumps,
            "integrals": {o.label: float(v) for o, v in zip(self.observables, integrals)},
            "averages": {
                o.label: float(v / self.clock) if self.clock > 0 else None
                for o, v in zip(self.observables, integrals)
            },
            "jump_counts": list(self.jump_counts),
            "histogram": [[label, t] for label, t in self.histogram_pairs()],
        }


def new_accumulator(
    net: ReactionNetwork,
    x0: State,
    observables: Sequence[Observable] = (),
    binning: Optional[Binning] = None,
    path_stride: int = 0,
) -> TrajectoryAccumulator:
    return TrajectoryAccumulator(
        n_reactions=net.n_reactions,
        observables=tuple(observables),
        binning=binning,
        state=tuple(x0),
        path_stride=path_stride,
    )


def draw_jump(net: ReactionNetwork, x: Sequence[int], rng: RngStream) -> Tuple[float, int]:
    """
    Gillespie direct-method draw at one state.

    Args:
        net: Reaction network
        x: Current state
        rng: Stream to draw from (two uniforms are consumed)

    Returns:
        (tau, J) with tau ~ Exp(lambda_0) and P(J=j) = lambda_j / lambda_0

    Raises:
        AbsorbingState: If lambda_0(x) = 0
    """
    return SimulationKernel(net, log_size=1).draw_jump(tuple(int(v) for v in x), rng)


def embedded_step(net: ReactionNetwork, x: Sequence[int], rng: RngStream) -> int:
    """Channel of the embedded jump chain at ``x`` (one uniform consumed)."""
    return SimulationKernel(net, log_size=1).embedded_step(tuple(int(v) for v in x), rng)


def run_ssa(
    net: ReactionNetwork,
    x0: Sequence[int],
    t_end: float,
    observables: Sequence[Observable] = (),
    binning: Optional[Binning] = None,
    rng: Optional[RngStream] = None,
    seed: int = 0,
    path_stride: int = 0,
    kernel: Optional[SimulationKernel] = None,
) -> TrajectoryAccumulator:
    """
    Simulate one trajectory on [0, t_end] with the direct method.

    Args:
        net: Reaction network
        x0: Initial state
        t_end: Final time, > 0
        observables: Observables to integrate
        binning: Optional histogram binning
        rng: Stream to consume; defaults to the serial stream of ``seed``
        seed: Seed used when ``rng`` is not given
        path_stride: Record (t, x) every this many jumps (0 disables)
        kernel: Reusable kernel for ``net``

    Returns:
        Accumulator whose clock equals t_end

    Raises:
        ValueError: If t_end <= 0 or x0 is invalid
        AbsorbingState: With the partial accumulator attached
    """
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    state = net.check_state(x0)
    rng = rng if rng is not None else RngStream(seed, SERIAL_KEY)
    kernel = kernel if kernel is not None else SimulationKernel(net)
    acc = new_accumulator(net, state, observables, binning, path_stride)
    kernel.advance(acc, state, rng, t_end)
    logger.debug("SSA reached t=%s after %d jumps", acc.clock, acc.n_jumps)
    return acc
