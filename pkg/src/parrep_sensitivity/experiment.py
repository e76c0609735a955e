"""
Experiment orchestration.

``ExperimentRunner`` turns a validated ``RunConfig`` into trajectory jobs,
runs them serially or on a process pool, and writes the report files:

    summary.yaml      means with confidence half-widths, per-trajectory records
    histogram.csv     ergodic histogram per method (and the CME curve)
    cycle_log.csv     ParRep phase records
    path.csv          thinned (t, x) samples
    sensitivity.yaml  FIM, IAFs and bounds
    bounds.csv        bound table per (observable, direction)
    cme.csv           stationary distribution on the truncation box
    speedup.yaml      wall-clock comparison of SSA and ParRep

Every file except speedup.yaml is a pure function of the config and seed.
"""

import logging
import multiprocessing
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .config.run_config import ParRepSection, RunConfig, parse_config, preset_path
from .config.settings import Settings
from .core.analyzer import TrajectoryAnalyzer, summaries_to_dict
from .core.cme import (
    StateBox,
    StationarySolution,
    build_truncated_generator,
    stationary_derivatives,
    stationary_fim,
    stationary_histogram,
    stationary_moments,
    stationary_solve,
    stationary_variance,
)
from .core.parrep import (
    PHASE_DECORRELATION,
    PHASE_DEPHASING,
    PHASE_PARALLEL,
    ParRepParams,
    ParRepReport,
    PhaseRecord,
    run_parrep,
)
from .core.parser import load_network
from .core.rng import derive_seed
from .core.sensitivity import (
    FimEstimate,
    IafEstimate,
    SensitivityBoundReport,
    accumulate_fim,
    combine_bounds,
    estimate_iaf,
    horizon_fim,
    transient_bound,
)
from .core.ssa import TrajectoryAccumulator, run_ssa
from .core.writer import ReportWriter
from .exceptions import NetworkDefinitionError, ParRepError, error_for
from .models.network import ReactionNetwork, State
from .models.observable import Binning, Observable
from .models.region import RegionMap

logger = logging.getLogger(__name__)

METHOD_SSA = "ssa"
METHOD_PARREP = "parrep"


@dataclass(frozen=True)
class TrajectoryJob:
    """Everything one worker needs to simulate one trajectory."""

    index: int
    method: str
    net: ReactionNetwork
    x0: State
    t_end: float
    seed: int
    burn_in: float = 0.0
    observables: Tuple[Observable, ...] = ()
    binning: Optional[Binning] = None
    region_map: Optional[RegionMap] = None
    parrep: Optional[ParRepSection] = None
    workers: int = 1
    backend: str = "process"
    path_stride: int = 0


@dataclass
class TrajectoryResult:
    """
    Outcome of one trajectory job.

    ``accumulator`` covers the sampling window only; a burn-in leg is
    simulated and discarded. ``error`` holds (error class, message) when the
    job stopped early, in which case the accumulator is partial.
    """

    index: int
    method: str
    seed: int
    accumulator: TrajectoryAccumulator
    cycle_log: List[Tuple[str, PhaseRecord]] = field(default_factory=list)
    wall_time: float = 0.0
    error: Optional[Tuple[str, str]] = None

    @property
    def completed(self) -> bool:
        return self.error is None

    @property
    def n_cycles(self) -> int:
        return sum(1 for leg, r in self.cycle_log if leg == "window" and r.phase == PHASE_PARALLEL)

    def to_dict(self) -> Dict[str, Any]:
        acc = self.accumulator
        data: Dict[str, Any] = {
            "index": self.index,
            "seed": self.seed,
            "completed": self.completed,
            "clock": acc.clock,
            "state": list(acc.state),
            "jumps": acc.n_jumps,
            "averages": {o.label: float(v) for o, v in zip(acc.observables, acc.averages)},
        }
        if self.method == METHOD_PARREP:
            data["cycles"] = self.n_cycles
        if self.error is not None:
            data["error"] = f"{self.error[0]}: {self.error[1]}"
        return data


def _leg(job: TrajectoryJob, x0: State, length: float, seed: int, window: bool) -> Tuple[
    TrajectoryAccumulator, List[PhaseRecord]
]:
    observables = job.observables if window else ()
    binning = job.binning if window else None
    stride = job.path_stride if window else 0
    if job.method == METHOD_SSA:
        return run_ssa(job.net, x0, length, observables, binning, seed=seed, path_stride=stride), []
    assert job.parrep is not None and job.region_map is not None
    params = ParRepParams(
        n_c=job.parrep.n_c,
        n_p=job.parrep.n_p,
        replicas=job.parrep.replicas,
        t_end=length,
        seed=seed,
        workers=job.workers,
        backend=job.backend,
        block_rounds=job.parrep.block_rounds,
    )
    report = run_parrep(job.net, x0, job.region_map, params, observables, binning, stride)
    return report.accumulator, report.cycle_log


def _partial(error: ParRepError) -> Tuple[Optional[TrajectoryAccumulator], List[PhaseRecord]]:
    partial = error.partial
    if isinstance(partial, ParRepReport):
        return partial.accumulator, list(partial.cycle_log)
    if isinstance(partial, TrajectoryAccumulator):
        return partial, []
    return None, []


def simulate_trajectory(job: TrajectoryJob) -> TrajectoryResult:
    """
    Simulate one trajectory: an optional burn-in leg, then the sampling window.

    Seeds are derived from the trajectory seed, so a job's result does not
    depend on which worker runs it. Engine errors are returned, not raised,
    together with whatever was accumulated.
    """
    started = time.perf_counter()
    log: List[Tuple[str, PhaseRecord]] = []
    x = job.x0
    window_seed = job.seed
    try:
        if job.burn_in > 0:
            burn, records = _leg(job, x, job.burn_in, derive_seed(job.seed, 0), window=False)
            log.extend(("burn_in", r) for r in records)
            x = burn.state
            window_seed = derive_seed(job.seed, 1)
        acc, records = _leg(job, x, job.t_end, window_seed, window=True)
        log.extend(("window", r) for r in records)
        error = None
    except ParRepError as e:
        partial, records = _partial(e)
        log.extend(("window", r) for r in records)
        acc = partial if partial is not None else TrajectoryAccumulator(
            job.net.n_reactions, job.observables, job.binning, x
        )
        error = (e.error_class, str(e))
        logger.warning("Trajectory %d stopped early: %s: %s", job.index, *error)
    elapsed = time.perf_counter() - started
    result = TrajectoryResult(job.index, job.method, job.seed, acc, log, elapsed, error)
    logger.info("Trajectory %d (%s) finished at t=%.6g", job.index, job.method, acc.clock)
    return result


@dataclass(frozen=True)
class SpeedupRecord:
    """
    Wall-clock comparison of serial SSA and ParRep on the same workload.

    Attributes:
        replicas: Replica count R of the ParRep runs
        serial_wall_time: Median wall seconds of the SSA batch
        parrep_wall_time: Median wall seconds of the ParRep batch
        phase_wall_times: ParRep wall seconds per phase, from the cycle log
        simulated_time: Simulated time per batch (t_end times n_traj)
    """

    replicas: int
    n_c: int
    n_p: int
    n_traj: int
    t_end: float
    serial_wall_time: float
    parrep_wall_time: float
    phase_wall_times: Dict[str, float]
    simulated_time: float

    @property
    def speedup(self) -> float:
        if self.parrep_wall_time <= 0:
            return float("nan")
        return self.serial_wall_time / self.parrep_wall_time

    @property
    def throughput(self) -> float:
        """Simulated time per ParRep wall second."""
        if self.parrep_wall_time <= 0:
            return float("nan")
        return self.simulated_time / self.parrep_wall_time

    def to_dict(self) -> Dict[str, Any]:
        return {
            "replicas": self.replicas,
            "n_c": self.n_c,
            "n_p": self.n_p,
            "n_traj": self.n_traj,
            "t_end": self.t_end,
            "serial_wall_time": self.serial_wall_time,
            "parrep_wall_time": self.parrep_wall_time,
            "speedup": self.speedup,
            "throughput": self.throughput,
            "phase_wall_times": dict(self.phase_wall_times),
        }


@dataclass
class ExperimentResult:
    """Summary document of a run plus the files written."""

    mode: str
    summary: Dict[str, Any]
    files: List[Path]
    completed: bool = True
    sensitivity: Optional[SensitivityBoundReport] = None
    speedup: List[SpeedupRecord] = field(default_factory=list)


class ExperimentRunner:
    """
    Runs one configured experiment and writes its reports.

    Attributes:
        config: Validated run configuration
        net: Resolved reaction network
        settings: Numeric settings for the model
    """

    def __init__(self, config: RunConfig, settings: Optional[Settings] = None) -> None:
        self.config = config
        try:
            self.net = load_network(config.model)
        except FileNotFoundError as e:
            raise NetworkDefinitionError(str(e)) from e
        self.settings = settings or Settings.for_model(self.net.name)
        self.observables = config.resolve_observables(self.net) or [
            Observable.population(name, i) for i, name in enumerate(self.net.species_names)
        ]
        self.binning = config.bins.resolve(self.net) if config.bins else None
        self.region_map = config.region.resolve(self.net)
        try:
            self.x0 = self.net.check_state(config.initial_state)
        except ValueError as e:
            raise NetworkDefinitionError(f"initial_state: {e}") from e
        self.analyzer = TrajectoryAnalyzer(self.settings.CONFIDENCE_Z)
        self.writer = ReportWriter(config.output_dir, config.header())
        self._cme: Optional[StationarySolution] = None

    # jobs

    def jobs(
        self, method: str, t_end: float, burn_in: float = 0.0, replicas: int = 0
    ) -> List[TrajectoryJob]:
        cfg = self.config
        spread = cfg.threads > 1 and cfg.n_traj > 1
        parrep = cfg.parrep if not replicas else replace(cfg.parrep, replicas=replicas)
        return [
            TrajectoryJob(
                index=i,
                method=method,
                net=self.net,
                x0=self.x0,
                t_end=t_end,
                seed=derive_seed(cfg.seed, i),
                burn_in=burn_in,
                observables=tuple(self.observables),
                binning=self.binning,
                region_map=self.region_map,
                parrep=parrep if method == METHOD_PARREP else None,
                workers=1 if spread else cfg.threads,
                backend=cfg.backend,
                path_stride=cfg.path_stride,
            )
            for i in range(cfg.n_traj)
        ]

    def run_jobs(self, jobs: Sequence[TrajectoryJob]) -> List[TrajectoryResult]:
        """
        Run trajectory jobs, spreading them over processes when threads > 1.

        Results come back in trajectory order regardless of scheduling.
        """
        threads = self.config.threads
        if threads > 1 and len(jobs) > 1:
            context = multiprocessing.get_context("spawn")
            workers = min(threads, len(jobs))
            with ProcessPoolExecutor(max_workers=workers, mp_context=context) as pool:
                results = list(pool.map(simulate_trajectory, jobs))
        else:
            results = [simulate_trajectory(job) for job in jobs]
        return sorted(results, key=lambda r: r.index)

    def _method(self) -> str:
        return METHOD_PARREP if self.config.parrep.enabled else METHOD_SSA

    # summaries

    def _summarize(self, method: str, results: Sequence[TrajectoryResult]) -> Dict[str, Any]:
        labels = [o.label for o in self.observables]
        averages = [r.accumulator.averages for r in results]
        data: Dict[str, Any] = {
            "method": method,
            "completed": all(r.completed for r in results),
            "n_traj": len(results),
            "observables": summaries_to_dict(self.analyzer.summarize_columns(labels, averages)),
        }
        if method == METHOD_PARREP:
            data["cycles"] = self.analyzer.summarize([r.n_cycles for r in results]).to_dict()
            data["phases"] = _phase_totals(results)
        data["trajectories"] = [r.to_dict() for r in results]
        return data

    def _pooled_histogram(self, results: Sequence[TrajectoryResult]) -> np.ndarray:
        return self.analyzer.pooled_histogram([r.accumulator.histogram for r in results])

    def _histogram_rows(self, columns: Mapping[str, np.ndarray]) -> List[List[Any]]:
        assert self.binning is not None
        labels = ["below"] + [str(int(v)) for v in self.binning.bin_lower_edges()] + ["above"]
        return [
            [label, *(float(col[i]) for col in columns.values())] for i, label in enumerate(labels)
        ]

    def _write_trajectory_tables(self, method: str, results: Sequence[TrajectoryResult]) -> None:
        suffix = "" if self.config.mode != "compare" else f"_{method}"
        if method == METHOD_PARREP:
            rows = [
                {"trajectory": r.index, "leg": leg, **record.to_dict(include_wall=False)}
                for r in results
                for leg, record in r.cycle_log
            ]
            if rows:
                self.writer.write_records(f"cycle_log{suffix}.csv", rows)
        if self.config.path_stride:
            self.writer.write_csv(
                f"path{suffix}.csv",
                ["trajectory", "t", *self.net.species_names],
                ([r.index, t, *x] for r in results for t, x in r.accumulator.path),
            )

    # cme

    def solve_cme(self) -> StationarySolution:
        """Stationary distribution on the configured box (solved once)."""
        if self._cme is None:
            cfg = self.config
            if cfg.cme is None or cfg.cme.box is None:
                raise ValueError("No CME truncation box configured")
            box = StateBox(cfg.cme.box, self.net, int(self.settings.MAX_BOX_STATES))
            box.require(self.x0)
            self._cme = stationary_solve(build_truncated_generator(self.net, box))
            logger.info(
                "CME solved on %d states: residual %.3g, boundary mass %.3g",
                len(box),
                self._cme.residual,
                self._cme.boundary_mass,
            )
        return self._cme

    def _cme_observables(self) -> List[Observable]:
        names = self.config.cme.observables if self.config.cme else ()
        return [o for o in self.observables if not names or o.label in names]

    def _cme_summary(self) -> Dict[str, Any]:
        sol = self.solve_cme()
        data: Dict[str, Any] = {
            "box": sol.box.to_dict(),
            "residual": sol.residual,
            "boundary_mass": sol.boundary_mass,
            "means": {o.label: stationary_moments(sol, o) for o in self._cme_observables()},
            "variances": {o.label: stationary_variance(sol, o) for o in self._cme_observables()},
        }
        if self.config.cme is not None and self.config.cme.sensitivity:
            derivatives = stationary_derivatives(self.net, sol)
            names = self.net.params.names
            data["sensitivities"] = {
                o.label: dict(zip(names, (derivatives @ o.evaluate_many(sol.box.states)).tolist()))
                for o in self._cme_observables()
            }
            data["fim"] = stationary_fim(self.net, sol).tolist()
        return data

    def _write_cme_table(self) -> None:
        sol = self.solve_cme()
        self.writer.write_csv(
            "cme.csv",
            [*self.net.species_names, "probability"],
            ([*x, p] for x, p in sol.records()),
        )

    # modes

    def run(self) -> ExperimentResult:
        """
        Run the configured mode and write its reports.

        Raises:
            ParRepError: After partial outputs are written, if a trajectory failed
        """
        mode = self.config.mode
        logger.info("Starting %s run of %s (seed %d)", mode, self.net.name, self.config.seed)
        if self.config.cme is not None:
            self.solve_cme()
        handlers = {
            "ssa": self._run_simulation,
            "parrep": self._run_simulation,
            "compare": self._run_compare,
            "cme": self._run_cme,
            "sensitivity": self._run_sensitivity,
        }
        result = handlers[mode]()
        logger.info("Finished %s run; wrote %d files", mode, len(result.files))
        return result

    def _document(self) -> Dict[str, Any]:
        return {
            "config": self.config.to_dict(),
            "settings": {"confidence_z": self.settings.CONFIDENCE_Z},
        }

    def _run_simulation(self) -> ExperimentResult:
        method = METHOD_PARREP if self.config.mode == "parrep" else METHOD_SSA
        results = self.run_jobs(self.jobs(method, self.config.t_end))
        summary = self._document()
        summary[method] = self._summarize(method, results)
        histograms: Dict[str, np.ndarray] = {}
        if self.binning is not None:
            histograms[method] = self._pooled_histogram(results)
        if self.config.cme is not None:
            summary["cme"] = self._cme_comparison(summary[method], histograms.get(method))
            if self.binning is not None:
                histograms["cme"] = stationary_histogram(self.solve_cme(), self.binning)
            self._write_cme_table()
        self._write_trajectory_tables(method, results)
        if histograms:
            self.writer.write_csv(
                "histogram.csv", ["bin", *histograms], self._histogram_rows(histograms)
            )
        completed = summary[method]["completed"]
        summary["completed"] = completed
        self.writer.write_yaml("summary.yaml", summary)
        _raise_first_error(results)
        return ExperimentResult(self.config.mode, summary, list(self.writer.written), completed)

    def _cme_comparison(
        self, method_summary: Mapping[str, Any], histogram: Optional[np.ndarray]
    ) -> Dict[str, Any]:
        data = self._cme_summary()
        errors = {}
        for label, mean in data["means"].items():
            if label in method_summary["observables"]:
                estimate = method_summary["observables"][label]["mean"]
                errors[label] = self.analyzer.relative_error(estimate, mean)
        data["relative_errors"] = errors
        if histogram is not None and self.binning is not None:
            data["tv_distance"] = self.analyzer.tv_distance(
                histogram, stationary_histogram(self.solve_cme(), self.binning)
            )
        return data

    def _run_compare(self) -> ExperimentResult:
        cfg = self.config
        summary = self._document()
        histograms: Dict[str, np.ndarray] = {}
        wall: Dict[str, float] = {}
        all_results: Dict[str, List[TrajectoryResult]] = {}
        for method in (METHOD_SSA, METHOD_PARREP):
            started = time.perf_counter()
            results = self.run_jobs(self.jobs(method, cfg.t_end))
            wall[method] = time.perf_counter() - started
            all_results[method] = results
            summary[method] = self._summarize(method, results)
            if self.binning is not None:
                histograms[method] = self._pooled_histogram(results)
            self._write_trajectory_tables(method, results)

        labels = [o.label for o in self.observables]
        ssa_stats = self.analyzer.summarize_columns(
            labels, [r.accumulator.averages for r in all_results[METHOD_SSA]]
        )
        parrep_stats = self.analyzer.summarize_columns(
            labels, [r.accumulator.averages for r in all_results[METHOD_PARREP]]
        )
        summary["comparison"] = {
            label: {
                **self.analyzer.compare_means(parrep_stats[label], ssa_stats[label]),
                "overlap": parrep_stats[label].overlaps(ssa_stats[label]),
            }
            for label in ssa_stats
        }
        if self.binning is not None:
            summary["comparison"]["tv_distance"] = self.analyzer.tv_distance(
                histograms[METHOD_SSA], histograms[METHOD_PARREP]
            )
        if cfg.cme is not None:
            summary["cme"] = self._cme_comparison(
                summary[METHOD_PARREP], histograms.get(METHOD_PARREP)
            )
            if self.binning is not None:
                histograms["cme"] = stationary_histogram(self.solve_cme(), self.binning)
            self._write_cme_table()
        if histograms:
            self.writer.write_csv(
                "histogram.csv", ["bin", *histograms], self._histogram_rows(histograms)
            )
        completed = all(summary[m]["completed"] for m in (METHOD_SSA, METHOD_PARREP))
        summary["completed"] = completed
        self.writer.write_yaml("summary.yaml", summary)

        record = SpeedupRecord(
            replicas=cfg.parrep.replicas,
            n_c=cfg.parrep.n_c,
            n_p=cfg.parrep.n_p,
            n_traj=cfg.n_traj,
            t_end=cfg.t_end,
            serial_wall_time=wall[METHOD_SSA],
            parrep_wall_time=wall[METHOD_PARREP],
            phase_wall_times=_phase_wall_times(all_results[METHOD_PARREP]),
            simulated_time=cfg.t_end * cfg.n_traj,
        )
        self.writer.write_yaml("speedup.yaml", {"records": [record.to_dict()]})
        for results in all_results.values():
            _raise_first_error(results)
        return ExperimentResult(
            cfg.mode, summary, list(self.writer.written), completed, speedup=[record]
        )

    def _run_cme(self) -> ExperimentResult:
        summary = self._document()
        summary["cme"] = self._cme_summary()
        self._write_cme_table()
        if self.binning is not None:
            hist = stationary_histogram(self.solve_cme(), self.binning)
            self.writer.write_csv(
                "histogram.csv", ["bin", "cme"], self._histogram_rows({"cme": hist})
            )
        summary["completed"] = True
        self.writer.write_yaml("summary.yaml", summary)
        return ExperimentResult("cme", summary, list(self.writer.written))

    def _iaf_observables(self) -> List[Observable]:
        names = self.config.sensitivity.observables if self.config.sensitivity else ()
        return [o for o in self.observables if not names or o.label in names]

    def _run_sensitivity(self) -> ExperimentResult:
        cfg = self.config
        sens = cfg.sensitivity
        assert sens is not None
        summary = self._document()
        completed = True
        segments: List[TrajectoryAccumulator] = []
        if sens.inputs is not None:
            fim = FimEstimate.from_dict(sens.inputs["fim"])
            iafs = [IafEstimate.from_dict(item) for item in sens.inputs["iaf"]]
            source = "inputs"
        else:
            method = self._method()
            results = self.run_jobs(self.jobs(method, sens.window, burn_in=sens.burn_in))
            completed = all(r.completed for r in results)
            if not completed:
                summary[method] = self._summarize(method, results)
                summary["completed"] = False
                self.writer.write_yaml("summary.yaml", summary)
                _raise_first_error(results)
            window = (sens.burn_in, sens.burn_in + sens.window)
            segments = [r.accumulator for r in results]
            fim = accumulate_fim(self.net, segments, window)
            positions = {o.label: i for i, o in enumerate(self.observables)}
            iafs = [
                estimate_iaf(
                    [acc.integrals[positions[o.label]] for acc in segments], sens.window, o.label
                )
                for o in self._iaf_observables()
            ]
            summary[method] = self._summarize(method, results)
            self._write_trajectory_tables(method, results)
            source = method
        if not fim.is_psd(self.settings.PSD_TOL):
            logger.warning("FIM estimate has a negative eigenvalue %.3g", fim.min_eigenvalue())

        report = combine_bounds(fim, iafs, sens.directions)
        report.provenance.update({"source": source, "seed": cfg.seed})
        document = report.to_dict()
        rows = report.table_rows()
        if segments:
            document["transient"] = self._transient_bounds(report, rows, segments, sens.window)
        if cfg.cme is not None:
            cme = self._cme_summary()
            document["cme"] = cme
            for row in rows:
                direction = report.directions[row["direction"]]
                row["cme_sensitivity"] = self._directional(cme, row["observable"], direction)
        self.writer.write_yaml("sensitivity.yaml", document)
        self.writer.write_records("bounds.csv", rows)
        summary["sensitivity"] = {"bounds": rows}
        summary["completed"] = completed
        self.writer.write_yaml("summary.yaml", summary)
        return ExperimentResult(
            cfg.mode, summary, list(self.writer.written), completed, sensitivity=report
        )

    def _transient_bounds(
        self,
        report: SensitivityBoundReport,
        rows: List[Dict[str, Any]],
        segments: Sequence[TrajectoryAccumulator],
        horizon: float,
    ) -> Dict[str, Any]:
        """Add the finite-horizon bound on each observable at the window end to ``rows``."""
        fim_T = horizon_fim(report.fim, horizon)
        end_states = np.array([acc.state for acc in segments], dtype=np.int64)
        by_label = {o.label: o for o in self.observables}
        variances = {
            row["observable"]: float(
                np.var(by_label[row["observable"]].evaluate_many(end_states), ddof=1)
            )
            for row in rows
        }
        for row in rows:
            direction = report.directions[row["direction"]]
            row["transient_bound"] = transient_bound(variances[row["observable"]], fim_T, direction)
        return {"horizon": horizon, "end_variances": variances}

    def _directional(
        self, cme: Mapping[str, Any], label: str, v: Sequence[float]
    ) -> Optional[float]:
        gradient = cme.get("sensitivities", {}).get(label)
        if gradient is None:
            return None
        return float(np.dot([gradient[name] for name in self.net.params.names], v))

    # speedup

    def measure_speedup(
        self, replicas: Optional[int] = None, repetitions: Optional[int] = None
    ) -> SpeedupRecord:
        """
        Time SSA and ParRep batches of the configured workload.

        Both batches simulate n_traj trajectories to t_end; wall times are
        medians over ``repetitions``.
        """
        record = _time_pair(self, self, replicas or self.config.parrep.replicas, repetitions)
        logger.info(
            "R=%d: speedup %.3g, throughput %.3g",
            record.replicas,
            record.speedup,
            record.throughput,
        )
        return record

    def speedup_sweep(self) -> ExperimentResult:
        """Measure the speedup for every replica count in ``speedup.replicas``."""
        records = [self.measure_speedup(r) for r in self.config.speedup.replicas]
        self.writer.write_yaml("speedup.yaml", {"records": [r.to_dict() for r in records]})
        summary = {"config": self.config.to_dict(), "speedup": [r.to_dict() for r in records]}
        return ExperimentResult("speedup", summary, list(self.writer.written), speedup=records)


def _raise_first_error(results: Sequence[TrajectoryResult]) -> None:
    for r in results:
        if r.error is not None:
            error_class, message = r.error
            raise error_for(error_class)(f"trajectory {r.index}: {message}")


def _phase_totals(results: Sequence[TrajectoryResult]) -> Dict[str, Dict[str, Any]]:
    totals: Dict[str, Dict[str, Any]] = {}
    for r in results:
        for leg, record in r.cycle_log:
            if leg != "window":
                continue
            entry = totals.setdefault(record.phase, {"count": 0, "jumps": 0, "simulated_time": 0.0})
            entry["count"] += 1
            entry["jumps"] += record.jumps
            entry["simulated_time"] += record.simulated_time
    return totals


def _phase_wall_times(results: Sequence[TrajectoryResult]) -> Dict[str, float]:
    totals = {PHASE_DECORRELATION: 0.0, PHASE_DEPHASING: 0.0, PHASE_PARALLEL: 0.0}
    for r in results:
        for _, record in r.cycle_log:
            totals[record.phase] += record.wall_time
    return totals


def _time_pair(
    serial: ExperimentRunner,
    parallel: ExperimentRunner,
    replicas: int,
    repetitions: Optional[int] = None,
) -> SpeedupRecord:
    """Median wall times of SSA batches of ``serial`` and ParRep batches of ``parallel``."""
    cfg = parallel.config
    repetitions = repetitions or cfg.speedup.repetitions
    serial_times: List[float] = []
    parrep_times: List[float] = []
    phases: List[Dict[str, float]] = []
    for _ in range(repetitions):
        started = time.perf_counter()
        _raise_first_error(serial.run_jobs(serial.jobs(METHOD_SSA, serial.config.t_end)))
        serial_times.append(time.perf_counter() - started)
        started = time.perf_counter()
        results = parallel.run_jobs(parallel.jobs(METHOD_PARREP, cfg.t_end, replicas=replicas))
        parrep_times.append(time.perf_counter() - started)
        _raise_first_error(results)
        phases.append(_phase_wall_times(results))
    return SpeedupRecord(
        replicas=replicas,
        n_c=cfg.parrep.n_c,
        n_p=cfg.parrep.n_p,
        n_traj=cfg.n_traj,
        t_end=cfg.t_end,
        serial_wall_time=statistics.median(serial_times),
        parrep_wall_time=statistics.median(parrep_times),
        phase_wall_times={k: statistics.median(p[k] for p in phases) for k in phases[0]},
        simulated_time=cfg.t_end * cfg.n_traj,
    )


def run_experiment(config: RunConfig) -> ExperimentResult:
    """Run a configured experiment and write its reports."""
    return ExperimentRunner(config).run()


def measure_speedup(serial: RunConfig, parrep: RunConfig) -> SpeedupRecord:
    """
    Compare an SSA config and a ParRep config on the same workload.

    Raises:
        ValueError: If the two configs differ in model, t_end or n_traj
    """
    for name in ("model", "t_end", "n_traj"):
        if getattr(serial, name) != getattr(parrep, name):
            raise ValueError(
                f"Speedup pair differs in {name}: "
                f"{getattr(serial, name)} vs {getattr(parrep, name)}"
            )
    return _time_pair(ExperimentRunner(serial), ExperimentRunner(parrep), parrep.parrep.replicas)


def reproduce(target: str, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentResult:
    """
    Run a shipped reproduce preset.

    Raises:
        KeyError: If the target is unknown
    """
    config = parse_config(preset_path(target), overrides)
    return run_experiment(config)
