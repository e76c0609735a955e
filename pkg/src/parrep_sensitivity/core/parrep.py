"""
Parallel replica engine for continuous-time reaction networks.

A cycle runs three phases. Decorrelation advances one exact trajectory
until it has stayed ``n_c`` jumps in one region. Dephasing evolves ``R``
embedded-chain replicas for ``n_p`` rounds, restarting leavers from
survivors, to sample the quasi-stationary distribution of the region. The
parallel phase advances all replicas in lockstep rounds; the first round
with an exit ends the phase and the holding times of replicas ``1..K`` of
every round are credited to the simulation clock.

Replicas in the parallel phase are owned by ``ReplicaBlock`` workers. Each
worker advances its replicas speculatively for a block of rounds; the
coordinator locates the first exit and commits per-replica deltas, merged
in replica order. Every replica draws only from its own stream, so results
do not depend on the number of workers or on the backend.
"""

import logging
import math
import multiprocessing
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..config.settings import DEFAULT_SETTINGS
from ..exceptions import AbsorbingState, AllReplicasExited, ParRepError, error_for
from ..models.network import FloatArray, IntArray, ReactionNetwork, State
from ..models.observable import Binning, Observable
from ..models.region import RegionMap
from . import kernels
from .rng import Phase, Purpose, RngStream, StreamKey
from .ssa import (
    PathLog,
    SimulationKernel,
    TrajectoryAccumulator,
    new_accumulator,
    occupancy_of,
)

logger = logging.getLogger(__name__)

BACKENDS = ("thread", "process")

PHASE_DECORRELATION = "decorrelation"
PHASE_DEPHASING = "dephasing"
PHASE_PARALLEL = "parallel"


@dataclass(frozen=True)
class ParRepParams:
    """
    Engine parameters.

    Attributes:
        n_c: Decorrelation threshold in jumps
        n_p: Dephasing threshold in rounds
        replicas: Replica count R
        t_end: Target simulated time
        seed: Run seed
        workers: Physical workers for the parallel phase (results do not depend on it)
        backend: ``thread`` or ``process`` worker pool
        block_rounds: Lockstep rounds between synchronizations (0 uses the settings default)
    """

    n_c: int
    n_p: int
    replicas: int
    t_end: float
    seed: int
    workers: int = 1
    backend: str = "process"
    block_rounds: int = 0

    def __post_init__(self) -> None:
        if self.n_c < 1:
            raise ValueError(f"n_c must be >= 1, got {self.n_c}")
        if self.n_p < 1:
            raise ValueError(f"n_p must be >= 1, got {self.n_p}")
        if self.replicas < 1:
            raise ValueError(f"replicas must be >= 1, got {self.replicas}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {self.seed}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got '{self.backend}'")
        if self.block_rounds < 0:
            raise ValueError(f"block_rounds must be >= 0, got {self.block_rounds}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_c": self.n_c,
            "n_p": self.n_p,
            "replicas": self.replicas,
            "t_end": self.t_end,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class PhaseRecord:
    """One entry of the cycle log."""

    cycle: int
    phase: str
    region: str
    jumps: int
    simulated_time: float
    wall_time: float
    restarts: int = 0
    rounds: int = 0
    exit_replica: int = 0
    truncated: bool = False

    def to_dict(self, include_wall: bool = True) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "cycle": self.cycle,
            "phase": self.phase,
            "region": self.region,
            "jumps": self.jumps,
            "simulated_time": self.simulated_time,
            "restarts": self.restarts,
            "rounds": self.rounds,
            "exit_replica": self.exit_replica,
            "truncated": self.truncated,
        }
        if include_wall:
            data["wall_time"] = self.wall_time
        return data


class ReplicaEnsemble(NamedTuple):
    """Replica states prepared by dephasing."""

    states: List[State]
    cycle: int
    restarts: int


class ParallelOutcome(NamedTuple):
    """
    Result of one parallel phase.

    ``exit_replica`` is the 1-based K; it is 0 when the phase was cut at t_end.
    """

    exit_state: State
    rounds: int
    exit_replica: int
    truncated: bool


class ReplicaDelta(NamedTuple):
    """Committed contribution of one replica."""

    duration: float
    occupancy: Dict[State, float]
    jumps: List[int]
    state: State


@dataclass
class ParRepReport:
    """
    Output of ``run_parrep``.

    Attributes:
        accumulator: The merged trajectory record
        cycle_log: One record per phase, in execution order
        params: Engine parameters of the run
        completed: False when the run stopped on an error
    """

    accumulator: TrajectoryAccumulator
    cycle_log: List[PhaseRecord]
    params: ParRepParams
    completed: bool = False

    @property
    def n_cycles(self) -> int:
        return sum(1 for r in self.cycle_log if r.phase == PHASE_PARALLEL)

    @property
    def wall_times(self) -> Dict[str, float]:
        """Wall-clock seconds spent per phase."""
        totals = {PHASE_DECORRELATION: 0.0, PHASE_DEPHASING: 0.0, PHASE_PARALLEL: 0.0}
        for record in self.cycle_log:
            totals[record.phase] += record.wall_time
        return totals

    def phase_summary(self) -> Dict[str, Dict[str, Any]]:
        summary: Dict[str, Dict[str, Any]] = {}
        for name in (PHASE_DECORRELATION, PHASE_DEPHASING, PHASE_PARALLEL):
            records = [r for r in self.cycle_log if r.phase == name]
            summary[name] = {
                "count": len(records),
                "jumps": sum(r.jumps for r in records),
                "simulated_time": math.fsum(r.simulated_time for r in records),
                "restarts": sum(r.restarts for r in records),
            }
        return summary

    def to_summary(self) -> Dict[str, Any]:
        """Deterministic summary; wall times are left out."""
        return {
            "params": self.params.to_dict(),
            "completed": self.completed,
            "cycles": self.n_cycles,
            "phases": self.phase_summary(),
            "trajectory": self.accumulator.to_report(),
        }


class RoundLog:
    """Speculative rounds of one replica that are not committed yet."""

    def __init__(self, n_species: int) -> None:
        self.states: IntArray = np.empty((0, n_species), dtype=np.int64)
        self.taus: FloatArray = np.empty(0, dtype=np.float64)
        self.channels: IntArray = np.empty(0, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.taus)

    def extend(self, path: PathLog) -> None:
        self.states = np.concatenate((self.states, path.states))
        self.taus = np.concatenate((self.taus, path.taus))
        self.channels = np.concatenate((self.channels, path.channels))

    def pop(self, count: int) -> Tuple[IntArray, FloatArray, IntArray]:
        """Remove and return the first ``count`` rounds."""
        head = (self.states[:count], self.taus[:count], self.channels[:count])
        self.states = self.states[count:]
        self.taus = self.taus[count:]
        self.channels = self.channels[count:]
        return head

    def next_state(self) -> Optional[State]:
        """Pre-jump state of the first uncommitted round."""
        return tuple(self.states[0].tolist()) if len(self) else None


class ReplicaBlock:
    """
    Contiguous slice of replicas advanced by one worker.

    Rounds are advanced speculatively and kept in a per-replica log until
    the coordinator commits them. A replica that reaches a state with no
    outflow stalls; the error is raised only if a committed round needs
    that state's holding time.
    """

    def __init__(
        self,
        net: ReactionNetwork,
        region_map: RegionMap,
        seed: int,
        indices: Sequence[int],
    ) -> None:
        self.kernel = SimulationKernel(net, DEFAULT_SETTINGS.PARALLEL_BLOCK_ROUNDS)
        self.region_map = region_map
        self.seed = seed
        self.indices = list(indices)
        self._n_species = net.n_species
        self._n_reactions = net.n_reactions
        self._region = 0
        self._streams: List[RngStream] = []
        self._heads: List[IntArray] = []
        self._committed: List[State] = []
        self._logs: List[RoundLog] = []
        self._exit_round: List[Optional[int]] = []
        self._stalled: List[bool] = []
        self._round = 0

    def start(self, states: Sequence[State], cycle: int, region: int) -> None:
        self._region = region
        self._streams = [
            RngStream(self.seed, StreamKey(r, Phase.PARALLEL, cycle, Purpose.JUMPS))
            for r in self.indices
        ]
        self._heads = [np.asarray(s, dtype=np.int64).copy() for s in states]
        self._committed = [tuple(s) for s in states]
        self._logs = [RoundLog(self._n_species) for _ in self.indices]
        self._exit_round = [None] * len(self.indices)
        self._stalled = [False] * len(self.indices)
        self._round = 0

    def advance(self, rounds: int) -> List[Tuple[Optional[int], FloatArray]]:
        """
        Advance every live replica by up to ``rounds`` rounds.

        Returns:
            Per replica, the global round of its first exit (or None) and the
            running holding-time sums of the rounds advanced in this call.
            A stalled replica returns fewer sums than ``rounds``.
        """
        results: List[Tuple[Optional[int], FloatArray]] = []
        for i, stream in enumerate(self._streams):
            if self._exit_round[i] is not None or self._stalled[i]:
                results.append((self._exit_round[i], np.empty(0, dtype=np.float64)))
                continue
            path = self.kernel.run(
                self._heads[i],
                stream,
                0.0,
                math.inf,
                rounds,
                self.region_map,
                self._region,
                stop_on_exit=True,
            )
            self._logs[i].extend(path)
            if path.status == kernels.EXITED:
                self._exit_round[i] = self._round + len(path.taus)
            elif path.status == kernels.ABSORBING:
                self._stalled[i] = True
            results.append((self._exit_round[i], np.cumsum(path.taus)))
        self._round += rounds
        return results

    def _after(self, i: int) -> State:
        following = self._logs[i].next_state()
        return following if following is not None else tuple(self._heads[i].tolist())

    def commit(self, counts: Sequence[int]) -> List[ReplicaDelta]:
        """Commit the next ``counts[i]`` logged rounds of each replica."""
        deltas = []
        for i, count in enumerate(counts):
            states, taus, channels = self._logs[i].pop(count)
            if count:
                self._committed[i] = self._after(i)
            deltas.append(
                ReplicaDelta(
                    float(np.cumsum(taus)[-1]) if count else 0.0,
                    occupancy_of(states, taus),
                    np.bincount(channels, minlength=self._n_reactions).tolist(),
                    self._committed[i],
                )
            )
        return deltas

    def commit_next(self, replica: int, cap: float) -> Tuple[ReplicaDelta, bool]:
        """
        Commit the next logged round of ``replica`` for at most ``cap`` time.

        Returns:
            (delta, True) when the whole holding time fit, else the truncated
            delta with no jump and False

        Raises:
            AbsorbingState: If the replica stalled before this round
        """
        i = replica - self.indices[0]
        log = self._logs[i]
        if not len(log):
            raise AbsorbingState(f"Total propensity vanishes at state {self._committed[i]}")
        x = tuple(log.states[0].tolist())
        tau = float(log.taus[0])
        jumps = [0] * self._n_reactions
        if tau < cap:
            jumps[int(log.channels[0])] = 1
            log.pop(1)
            post = self._after(i)
            self._committed[i] = post
            return ReplicaDelta(tau, {x: tau}, jumps, post), True
        duration = max(cap, 0.0)
        return ReplicaDelta(duration, {x: duration}, jumps, x), False


def _serve_block(conn: Any, block: ReplicaBlock) -> None:
    """Command loop of a worker process owning one block."""
    while True:
        command, args = conn.recv()
        if command == "close":
            conn.close()
            return
        try:
            conn.send(("ok", getattr(block, command)(*args)))
        except ParRepError as e:
            conn.send(("error", (e.error_class, str(e))))
        except Exception as e:  # noqa: BLE001 - forwarded to the coordinator
            conn.send(("error", ("ParRepError", f"{type(e).__name__}: {e}")))


class _ProcessHandle:
    def __init__(self, context: Any, block: ReplicaBlock) -> None:
        parent, child = context.Pipe()
        self.process = context.Process(target=_serve_block, args=(child, block), daemon=True)
        self.process.start()
        child.close()
        self._conn = parent

    def send(self, command: str, *args: Any) -> None:
        self._conn.send((command, args))

    def receive(self) -> Any:
        status, payload = self._conn.recv()
        if status == "error":
            error_class, message = payload
            raise error_for(error_class)(message)
        return payload

    def close(self) -> None:
        try:
            self._conn.send(("close", ()))
        except (BrokenPipeError, OSError):
            pass
        self.process.join(timeout=5)
        if self.process.is_alive():
            self.process.terminate()


class ReplicaPool:
    """
    Workers owning the replicas of the parallel phase.

    Replicas are split into ``workers`` contiguous blocks. With one worker
    the block runs in the calling thread; otherwise blocks run on a thread
    pool or in dedicated worker processes.
    """

    def __init__(
        self,
        net: ReactionNetwork,
        region_map: RegionMap,
        seed: int,
        replicas: int,
        workers: int = 1,
        backend: str = "process",
    ) -> None:
        if backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got '{backend}'")
        self.replicas = replicas
        self.workers = max(1, min(workers, replicas))
        self.backend = backend if self.workers > 1 else "inline"
        chunks = np.array_split(np.arange(replicas), self.workers)
        self._slices = [(int(c[0]), int(c[-1]) + 1) for c in chunks]
        blocks = [ReplicaBlock(net, region_map, seed, range(lo, hi)) for lo, hi in self._slices]
        self._blocks: List[ReplicaBlock] = []
        self._executor: Optional[ThreadPoolExecutor] = None
        self._handles: List[_ProcessHandle] = []
        if self.backend == "process":
            context = multiprocessing.get_context("spawn")
            self._handles = [_ProcessHandle(context, block) for block in blocks]
        else:
            self._blocks = blocks
            if self.backend == "thread":
                self._executor = ThreadPoolExecutor(
                    max_workers=self.workers, thread_name_prefix="replica"
                )
        logger.debug(
            "Replica pool: %d replicas on %d %s worker(s)", replicas, self.workers, self.backend
        )

    def __enter__(self) -> "ReplicaPool":
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()

    def close(self) -> None:
        for handle in self._handles:
            handle.close()
        self._handles = []
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def _broadcast(self, command: str, per_block: Sequence[Tuple[Any, ...]]) -> List[Any]:
        if self._handles:
            for handle, args in zip(self._handles, per_block):
                handle.send(command, *args)
            return [handle.receive() for handle in self._handles]
        calls: List[Callable[[], Any]] = [
            (lambda b=block, a=args: getattr(b, command)(*a))
            for block, args in zip(self._blocks, per_block)
        ]
        if self._executor is not None:
            return [f.result() for f in [self._executor.submit(c) for c in calls]]
        return [c() for c in calls]

    def start(self, states: Sequence[State], cycle: int, region: int) -> None:
        if len(states) != self.replicas:
            raise ValueError(f"Expected {self.replicas} replica states, got {len(states)}")
        self._broadcast(
            "start", [(list(states[lo:hi]), cycle, region) for lo, hi in self._slices]
        )

    def advance(self, rounds: int) -> List[Tuple[Optional[int], List[float]]]:
        parts = self._broadcast("advance", [(rounds,)] * len(self._slices))
        return [item for part in parts for item in part]

    def commit(self, counts: Sequence[int]) -> List[ReplicaDelta]:
        parts = self._broadcast("commit", [(list(counts[lo:hi]),) for lo, hi in self._slices])
        return [delta for part in parts for delta in part]

    def commit_next(self, replica: int, cap: float) -> Tuple[ReplicaDelta, bool]:
        for b, (lo, hi) in enumerate(self._slices):
            if lo <= replica < hi:
                if self._handles:
                    self._handles[b].send("commit_next", replica, cap)
                    result: Tuple[ReplicaDelta, bool] = self._handles[b].receive()
                    return result
                return self._blocks[b].commit_next(replica, cap)
        raise IndexError(f"Replica {replica} out of range [0, {self.replicas})")


def decorrelate(
    net: ReactionNetwork,
    x: Sequence[int],
    region_map: RegionMap,
    n_c: int,
    acc: TrajectoryAccumulator,
    rng: RngStream,
    t_end: float = math.inf,
    kernel: Optional[SimulationKernel] = None,
) -> Tuple[State, bool]:
    """
    Run exact dynamics until ``n_c`` consecutive jumps stay in one region.

    The streak counter resets on every region change and the current
    region re-binds to the new one.

    Args:
        net: Reaction network
        x: Starting state
        region_map: Partition of the state space
        n_c: Decorrelation threshold in jumps
        acc: Accumulator credited with the simulated time
        rng: Stream of the serial trajectory
        t_end: Simulated time at which the phase is cut
        kernel: Reusable kernel for ``net``

    Returns:
        (state, True) once the threshold is met, (state, False) at t_end

    Raises:
        AbsorbingState: If the chain reaches a state with no outflow
    """
    kernel = kernel if kernel is not None else SimulationKernel(net)
    return kernel.advance(acc, tuple(x), rng, t_end, region_map, n_c)


def dephase(
    net: ReactionNetwork,
    x_anchor: Sequence[int],
    region_map: RegionMap,
    n_p: int,
    replicas: int,
    seed: int,
    cycle: int = 0,
    kernel: Optional[SimulationKernel] = None,
) -> ReplicaEnsemble:
    """
    Prepare replica states with a Fleming-Viot embedded-chain ensemble.

    All replicas start at ``x_anchor`` and take one embedded jump per round.
    Replicas leaving the region are restarted, in increasing index, from the
    current state of a survivor of the same round chosen uniformly. No
    simulated time is credited.

    Raises:
        AllReplicasExited: If every replica leaves the region in one round
        AbsorbingState: If a replica reaches a state with no outflow
    """
    kernel = kernel if kernel is not None else SimulationKernel(net)
    anchor = tuple(int(v) for v in x_anchor)
    if n_p <= 0:
        return ReplicaEnsemble([anchor] * replicas, cycle, 0)

    region = region_map.region_of(anchor)
    streams = [
        RngStream(seed, StreamKey(r, Phase.DEPHASE, cycle, Purpose.JUMPS)) for r in range(replicas)
    ]
    resample = RngStream(seed, StreamKey(0, Phase.DEPHASE, cycle, Purpose.RESAMPLE))
    states = np.tile(np.asarray(anchor, dtype=np.int64), (replicas, 1))
    chunk = DEFAULT_SETTINGS.PARALLEL_BLOCK_ROUNDS
    restarts = 0
    for done in range(0, n_p, chunk):
        jump_uniforms = np.stack([s.take(min(chunk, n_p - done)) for s in streams])
        status, rounds, count, failed = kernel.fleming_viot(
            states, jump_uniforms, resample, region_map, region
        )
        restarts += count
        if status == kernels.ABSORBING:
            raise AbsorbingState(
                f"Total propensity vanishes at state {tuple(states[failed].tolist())}"
            )
        if status == kernels.ALL_EXITED:
            raise AllReplicasExited(
                f"All {replicas} replicas left {region_map.label(region)} "
                f"in dephasing round {done + rounds + 1}"
            )
    return ReplicaEnsemble([tuple(row) for row in states.tolist()], cycle, restarts)


def _merge(acc: TrajectoryAccumulator, deltas: Sequence[ReplicaDelta]) -> None:
    for delta in deltas:
        acc.merge_delta(delta.duration, delta.occupancy, delta.jumps, delta.state)


def _running_sums(cum: FloatArray, count: int, span: int) -> FloatArray:
    # a replica stalled before a round it has to run never finishes that round
    padded = np.empty(span, dtype=np.float64)
    ready = min(count, len(cum))
    padded[:ready] = cum[:ready]
    if ready < count:
        padded[ready:] = math.inf
    else:
        padded[ready:] = cum[ready - 1] if ready else 0.0
    return padded


def parallel_phase(
    net: ReactionNetwork,
    initial_states: Sequence[Sequence[int]],
    region_map: RegionMap,
    acc: TrajectoryAccumulator,
    seed: int,
    cycle: int = 0,
    t_end: float = math.inf,
    pool: Optional[ReplicaPool] = None,
    block_rounds: int = 0,
) -> ParallelOutcome:
    """
    Advance R replicas in lockstep rounds until the first exit.

    In every round each replica draws its own (tau, J). If some post-jump
    states leave the region, K is the smallest exiting index; otherwise
    K = R. Holding times of replicas 1..K are credited with their pre-jump
    states and only those replicas jump. Reaching t_end cuts the ordered
    accumulation (replica order, then time within the replica).

    Args:
        net: Reaction network
        initial_states: R states inside one region
        region_map: Partition of the state space
        acc: Accumulator credited with the simulated time
        seed: Run seed
        cycle: Cycle index selecting the replica streams
        t_end: Simulated time at which the phase is cut
        pool: Worker pool; an inline pool is used when omitted
        block_rounds: Rounds per synchronization (0 uses the settings default)

    Returns:
        ParallelOutcome with the exit state of replica K, N* and K

    Raises:
        ValueError: If the initial states do not share one region
        AbsorbingState: If a replica reaches a state with no outflow
    """
    states = [tuple(int(v) for v in s) for s in initial_states]
    replicas = len(states)
    if replicas == 0:
        raise ValueError("parallel_phase needs at least one replica")
    region = region_map.region_of(states[0])
    if any(region_map.region_of(s) != region for s in states):
        raise ValueError("All replica states must lie in one region")

    own_pool = pool is None
    active = pool if pool is not None else ReplicaPool(net, region_map, seed, replicas)
    try:
        active.start(states, cycle, region)
        return _run_rounds(
            active, replicas, acc, t_end, block_rounds or DEFAULT_SETTINGS.PARALLEL_BLOCK_ROUNDS
        )
    finally:
        if own_pool:
            active.close()


def _run_rounds(
    pool: ReplicaPool, replicas: int, acc: TrajectoryAccumulator, t_end: float, block: int
) -> ParallelOutcome:
    done = 0
    while True:
        progress = pool.advance(block)
        exits = [(e, r) for r, (e, _) in enumerate(progress) if e is not None]
        if exits:
            n_star = min(e for e, _ in exits)
            k = min(r for e, r in exits if e == n_star)
            span = n_star - done
        else:
            n_star, k, span = 0, replicas - 1, block
        counts = [span if r <= k else span - 1 for r in range(replicas)]

        # clock after each round of the block, summed in replica order
        clocks = np.full(span, acc.clock, dtype=np.float64)
        for r, (_, cum) in enumerate(progress):
            clocks += _running_sums(cum, counts[r], span)
        crossing = np.flatnonzero(clocks >= t_end)

        if crossing.size == 0:
            deltas = pool.commit(counts)
            _merge(acc, deltas)
            if exits:
                acc.state = deltas[k].state
                return ParallelOutcome(deltas[k].state, n_star, k + 1, False)
            done += span
            continue

        n = int(crossing[0]) + 1
        _merge(acc, pool.commit([n - 1] * replicas))
        last = k if (exits and n == span) else replicas - 1
        for r in range(last + 1):
            delta, whole = pool.commit_next(r, t_end - acc.clock)
            _merge(acc, [delta])
            if not whole:
                break
        acc.clock = t_end
        return ParallelOutcome(acc.state, done + n, 0, True)


def run_parrep(
    net: ReactionNetwork,
    x0: Sequence[int],
    region_map: RegionMap,
    params: ParRepParams,
    observables: Sequence[Observable] = (),
    binning: Optional[Binning] = None,
    path_stride: int = 0,
) -> ParRepReport:
    """
    Simulate one trajectory on [0, t_end] with the parallel replica method.

    Cycles of decorrelation, dephasing and parallel exploration repeat until
    the clock reaches t_end. A decorrelation phase that ends by t_end closes
    the run without launching replicas.

    Args:
        net: Reaction network
        x0: Initial state
        region_map: Partition into metastable regions
        params: Engine parameters
        observables: Observables to integrate
        binning: Optional histogram binning
        path_stride: Record (t, x) every this many serial jumps (0 disables)

    Returns:
        ParRepReport with the merged accumulator and the cycle log

    Raises:
        ParRepError: Any phase error, with the partial report attached
    """
    state = net.check_state(x0)
    acc = new_accumulator(net, state, observables, binning, path_stride)
    report = ParRepReport(accumulator=acc, cycle_log=[], params=params)
    kernel = SimulationKernel(net)
    t_end = params.t_end
    log = report.cycle_log
    cycle = 0
    try:
        with ReplicaPool(
            net, region_map, params.seed, params.replicas, params.workers, params.backend
        ) as pool:
            while acc.clock < t_end:
                started, clock0, jumps0 = time.perf_counter(), acc.clock, acc.n_jumps
                rng = RngStream(params.seed, StreamKey(0, Phase.SERIAL, cycle, Purpose.JUMPS))
                state, reached = decorrelate(
                    net, state, region_map, params.n_c, acc, rng, t_end, kernel
                )
                label = region_map.label(region_map.region_of(state))
                log.append(
                    PhaseRecord(
                        cycle,
                        PHASE_DECORRELATION,
                        label,
                        acc.n_jumps - jumps0,
                        acc.clock - clock0,
                        time.perf_counter() - started,
                        truncated=not reached,
                    )
                )
                if not reached:
                    break

                started = time.perf_counter()
                ensemble = dephase(
                    net, state, region_map, params.n_p, params.replicas, params.seed, cycle, kernel
                )
                log.append(
                    PhaseRecord(
                        cycle,
                        PHASE_DEPHASING,
                        label,
                        params.n_p * params.replicas,
                        0.0,
                        time.perf_counter() - started,
                        restarts=ensemble.restarts,
                    )
                )

                started, clock0, jumps0 = time.perf_counter(), acc.clock, acc.n_jumps
                outcome = parallel_phase(
                    net,
                    ensemble.states,
                    region_map,
                    acc,
                    params.seed,
                    cycle,
                    t_end,
                    pool,
                    params.block_rounds,
                )
                log.append(
                    PhaseRecord(
                        cycle,
                        PHASE_PARALLEL,
                        label,
                        acc.n_jumps - jumps0,
                        acc.clock - clock0,
                        time.perf_counter() - started,
                        rounds=outcome.rounds,
                        exit_replica=outcome.exit_replica,
                        truncated=outcome.truncated,
                    )
                )
                if acc.path_stride:
                    acc.path.append((acc.clock, outcome.exit_state))
                if outcome.truncated:
                    break
                state = outcome.exit_state
                cycle += 1
                if cycle % 100 == 0:
                    logger.info("ParRep cycle %d at t=%.6g", cycle, acc.clock)
                logger.debug(
                    "Cycle %d exit from %s by replica %d", cycle - 1, label, outcome.exit_replica
                )
    except ParRepError as e:
        e.partial = report
        raise
    report.completed = True
    logger.info("ParRep finished: %d cycles, t=%s", report.n_cycles, acc.clock)
    return report
