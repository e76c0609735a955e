"""
Run configuration documents.

A run configuration is a YAML document describing one experiment: the
model, the mode, the engine parameters, observables, binning and outputs.
``parse_config`` validates a document against a fixed schema, rejecting
unknown keys with their dotted path, and fills omitted engine settings from
the per-model ``Settings``.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, MutableMapping, Optional, Sequence, Tuple, Union

import yaml

from ..exceptions import SchemaError
from ..models.network import ReactionNetwork
from ..models.observable import OBSERVABLE_KINDS, Binning, Observable
from ..models.region import ORIENTATIONS, RegionMap
from ..utils.file_handler import FileHandler
from .settings import Settings

logger = logging.getLogger(__name__)

MODES = ("ssa", "parrep", "compare", "cme", "sensitivity")
PRESET_DIR = Path(__file__).parent / "presets"

SpeciesRef = Union[int, str]


class _Number:
    """Schema marker for real numbers (ints, floats, or numeric strings like 1e5)."""


_SCHEMA: Dict[str, Any] = {
    "target": str,
    "mirrors": str,
    "model": str,
    "mode": str,
    "seed": int,
    "t_end": _Number,
    "n_traj": int,
    "threads": int,
    "backend": str,
    "initial_state": [int],
    "path_stride": int,
    "parrep": {
        "enabled": bool,
        "n_c": int,
        "n_p": int,
        "replicas": int,
        "block_rounds": int,
    },
    "region": {
        "species": (int, str),
        "threshold": _Number,
        "orientation": str,
        "labels": [str],
    },
    "observables": [
        {
            "label": str,
            "kind": str,
            "species": (int, str),
            "low": int,
            "high": int,
            "value": _Number,
        }
    ],
    "bins": {"species": (int, str), "low": int, "high": int, "width": int},
    "sensitivity": {
        "burn_in": _Number,
        "window": _Number,
        "observables": [str],
        "directions": dict,
        "inputs": {"fim": dict, "iaf": list},
    },
    "cme": {"box": [[int]], "observables": [str], "sensitivity": bool},
    "speedup": {"replicas": [int], "repetitions": int},
    "output": {"directory": str},
}


def _coerce_number(value: Any, path: str) -> float:
    if isinstance(value, bool):
        raise SchemaError(path, f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    raise SchemaError(path, f"expected a number, got {value!r}")


def _check(value: Any, schema: Any, path: str) -> Any:
    """Validate ``value`` against ``schema`` and return the normalized value."""
    if schema is _Number:
        return _coerce_number(value, path)
    if isinstance(schema, dict):
        if not isinstance(value, Mapping):
            raise SchemaError(path, f"expected a mapping, got {type(value).__name__}")
        out: Dict[str, Any] = {}
        for key, item in value.items():
            child = f"{path}.{key}" if path else str(key)
            if key not in schema:
                raise SchemaError(child, "unknown key")
            out[key] = _check(item, schema[key], child)
        return out
    if isinstance(schema, list):
        if not isinstance(value, (list, tuple)):
            raise SchemaError(path, f"expected a list, got {type(value).__name__}")
        return [_check(item, schema[0], f"{path}[{i}]") for i, item in enumerate(value)]
    if schema is dict or schema is list:
        if not isinstance(value, schema):
            raise SchemaError(path, f"expected a {schema.__name__}, got {type(value).__name__}")
        return value
    allowed = schema if isinstance(schema, tuple) else (schema,)
    if isinstance(value, bool) and bool not in allowed:
        raise SchemaError(path, f"expected {_names(allowed)}, got {value!r}")
    if int in allowed and isinstance(value, float) and value.is_integer():
        return int(value)
    if int in allowed and isinstance(value, str) and str not in allowed:
        try:
            number = float(value)
        except ValueError:
            number = float("nan")
        if number.is_integer():
            return int(number)
    if not isinstance(value, allowed):
        raise SchemaError(path, f"expected {_names(allowed)}, got {value!r}")
    return value


def _names(types: Tuple[type, ...]) -> str:
    return " or ".join(t.__name__ for t in types)


def _resolve_species(net: ReactionNetwork, ref: SpeciesRef, path: str) -> int:
    if isinstance(ref, str):
        try:
            return net.species_index(ref)
        except KeyError as e:
            raise SchemaError(path, str(e)) from None
    if not 0 <= ref < net.n_species:
        raise SchemaError(path, f"species index {ref} out of range [0, {net.n_species})")
    return ref


@dataclass(frozen=True)
class ParRepSection:
    enabled: bool
    n_c: int
    n_p: int
    replicas: int
    block_rounds: int = 0


@dataclass(frozen=True)
class RegionSection:
    species: SpeciesRef
    threshold: float
    orientation: str = "lower"
    labels: Tuple[str, str] = ("W+", "W-")

    def resolve(self, net: ReactionNetwork) -> RegionMap:
        return RegionMap(
            _resolve_species(net, self.species, "region.species"),
            self.threshold,
            self.orientation,
            self.labels,
        )


@dataclass(frozen=True)
class ObservableSection:
    label: str
    kind: str = "species"
    species: SpeciesRef = 0
    low: Optional[int] = None
    high: Optional[int] = None
    value: float = 1.0

    def resolve(self, net: ReactionNetwork, path: str) -> Observable:
        species = 0
        if self.kind != "constant":
            species = _resolve_species(net, self.species, f"{path}.species")
        return Observable(self.label, self.kind, species, self.low, self.high, self.value)


@dataclass(frozen=True)
class BinsSection:
    species: SpeciesRef
    low: int
    high: int
    width: int = 1

    def resolve(self, net: ReactionNetwork) -> Binning:
        species = _resolve_species(net, self.species, "bins.species")
        return Binning(species, self.low, self.high, self.width)


@dataclass(frozen=True)
class SensitivitySection:
    burn_in: float
    window: float
    observables: Tuple[str, ...] = ()
    directions: Optional[Dict[str, List[float]]] = None
    inputs: Optional[Dict[str, Any]] = None


@dataclass(frozen=True)
class CmeSection:
    box: Optional[Tuple[Tuple[int, int], ...]]
    observables: Tuple[str, ...] = ()
    sensitivity: bool = True


@dataclass(frozen=True)
class SpeedupSection:
    replicas: Tuple[int, ...] = (1, 2, 4)
    repetitions: int = 3


@dataclass
class RunConfig:
    """
    Validated run configuration.

    Attributes:
        model: Built-in model name or network document path
        mode: One of ssa, parrep, compare, cme, sensitivity
        seed: Run seed (mandatory)
        t_end: Simulated time per trajectory
        n_traj: Number of independent trajectories
        threads: Physical parallelism; never changes results
    """

    model: str
    mode: str
    seed: int
    t_end: float
    n_traj: int
    parrep: ParRepSection
    region: RegionSection
    observables: List[ObservableSection]
    initial_state: List[int]
    threads: int = 1
    backend: str = "process"
    bins: Optional[BinsSection] = None
    sensitivity: Optional[SensitivitySection] = None
    cme: Optional[CmeSection] = None
    speedup: SpeedupSection = field(default_factory=SpeedupSection)
    path_stride: int = 0
    output_dir: Path = Path("results")
    target: str = ""
    mirrors: str = ""

    def resolve_observables(self, net: ReactionNetwork) -> List[Observable]:
        return [o.resolve(net, f"observables[{i}]") for i, o in enumerate(self.observables)]

    def header(self) -> str:
        lines = []
        if self.target:
            lines.append(f"target: {self.target}")
        if self.mirrors:
            lines.append(f"mirrors: {self.mirrors}")
        lines.append(f"model: {self.model}, mode: {self.mode}, seed: {self.seed}")
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        """Result-relevant fields; threads, backend and output paths are left out."""
        data: Dict[str, Any] = {
            "target": self.target,
            "model": self.model,
            "mode": self.mode,
            "seed": self.seed,
            "t_end": self.t_end,
            "n_traj": self.n_traj,
            "initial_state": list(self.initial_state),
            "parrep": {
                "enabled": self.parrep.enabled,
                "n_c": self.parrep.n_c,
                "n_p": self.parrep.n_p,
                "replicas": self.parrep.replicas,
            },
            "region": {
                "species": self.region.species,
                "threshold": self.region.threshold,
                "orientation": self.region.orientation,
                "labels": list(self.region.labels),
            },
            "observables": [o.label for o in self.observables],
            "path_stride": self.path_stride,
        }
        if self.bins is not None:
            data["bins"] = {
                "species": self.bins.species,
                "low": self.bins.low,
                "high": self.bins.high,
                "width": self.bins.width,
            }
        if self.sensitivity is not None:
            data["sensitivity"] = {
                "burn_in": self.sensitivity.burn_in,
                "window": self.sensitivity.window,
                "observables": list(self.sensitivity.observables),
                "from_inputs": self.sensitivity.inputs is not None,
            }
        if self.cme is not None:
            data["cme"] = {
                "box": [list(b) for b in self.cme.box] if self.cme.box else None,
                "observables": list(self.cme.observables),
            }
        return data


def set_dotted(document: MutableMapping[str, Any], dotted: str, value: Any) -> None:
    """Set ``a.b.c = value`` in a nested mapping, creating levels as needed."""
    keys = dotted.split(".")
    node = document
    for key in keys[:-1]:
        child = node.get(key)
        if child is None:
            child = {}
            node[key] = child
        if not isinstance(child, MutableMapping):
            raise SchemaError(dotted, f"'{key}' is not a mapping")
        node = child
    node[keys[-1]] = value


def parse_override(assignment: str) -> Tuple[str, Any]:
    """Split ``dotted.key=value``; the value is read as YAML."""
    if "=" not in assignment:
        raise SchemaError(assignment, "override must have the form dotted.key=value")
    key, raw = assignment.split("=", 1)
    try:
        return key.strip(), yaml.safe_load(raw)
    except yaml.YAMLError as e:
        raise SchemaError(key.strip(), f"unreadable value {raw!r}: {e}") from None


def load_document(source: Union[str, Path, Mapping[str, Any]]) -> Dict[str, Any]:
    """Load a config document from a mapping, YAML text or a file path."""
    if isinstance(source, Mapping):
        return dict(source)
    is_path = isinstance(source, str) and "\n" not in source and Path(source).is_file()
    if isinstance(source, Path) or is_path:
        text = FileHandler.read_text(Path(source))
    else:
        text = str(source)
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise SchemaError("<document>", f"not a valid YAML document: {e}") from None
    if document is None:
        document = {}
    if not isinstance(document, Mapping):
        raise SchemaError("<document>", "run configuration must be a mapping")
    return dict(document)


def _require(condition: bool, path: str, message: str) -> None:
    if not condition:
        raise SchemaError(path, message)


def parse_config(
    document: Union[str, Path, Mapping[str, Any]],
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """
    Validate a run configuration document.

    Args:
        document: Mapping, YAML text or path to a YAML file
        overrides: Dotted keys replacing document values before validation

    Returns:
        RunConfig with model defaults filled in

    Raises:
        SchemaError: With the dotted path of the offending field
    """
    raw = load_document(document)
    for key, value in (overrides or {}).items():
        set_dotted(raw, key, value)
    data = _check(raw, _SCHEMA, "")

    _require("seed" in data, "seed", "is required")
    _require(data["seed"] >= 0, "seed", "must be nonnegative")
    model = data.get("model", "schlogl")
    mode = data.get("mode", "ssa")
    _require(mode in MODES, "mode", f"must be one of {list(MODES)}, got '{mode}'")
    defaults = Settings.for_model(model)

    sens = None
    if "sensitivity" in data:
        s = data["sensitivity"]
        sens = SensitivitySection(
            burn_in=s.get("burn_in", defaults.BURN_IN),
            window=s.get("window", defaults.WINDOW),
            observables=tuple(s.get("observables", ())),
            directions=s.get("directions"),
            inputs=s.get("inputs"),
        )
        _require(sens.burn_in >= 0, "sensitivity.burn_in", "must be nonnegative")
        _require(sens.window > 0, "sensitivity.window", "must be positive")
        if sens.inputs is not None:
            _require("fim" in sens.inputs, "sensitivity.inputs.fim", "is required")
            _require("iaf" in sens.inputs, "sensitivity.inputs.iaf", "is required")
    elif mode == "sensitivity":
        sens = SensitivitySection(defaults.BURN_IN, defaults.WINDOW)

    if mode == "sensitivity" and sens is not None and "t_end" not in data:
        t_end = sens.burn_in + sens.window
    else:
        t_end = data.get("t_end", 0.0)
    simulates = sens is None or sens.inputs is None
    if mode in ("ssa", "parrep", "compare", "sensitivity") and simulates:
        _require("t_end" in data or mode == "sensitivity", "t_end", "is required")
        _require(t_end > 0, "t_end", f"must be positive, got {t_end}")

    n_traj = data.get("n_traj", 1)
    _require(n_traj >= 1, "n_traj", "must be >= 1")
    threads = data.get("threads", 1)
    _require(threads >= 1, "threads", "must be >= 1")
    backend = data.get("backend", "process")
    _require(backend in ("thread", "process"), "backend", "must be 'thread' or 'process'")

    p = data.get("parrep", {})
    parrep = ParRepSection(
        enabled=p.get("enabled", mode in ("parrep", "compare")),
        n_c=p.get("n_c", defaults.DECORRELATION_THRESHOLD),
        n_p=p.get("n_p", defaults.DEPHASING_THRESHOLD),
        replicas=p.get("replicas", defaults.REPLICAS),
        block_rounds=p.get("block_rounds", 0),
    )
    _require(parrep.n_c >= 1, "parrep.n_c", "must be >= 1")
    _require(parrep.n_p >= 1, "parrep.n_p", "must be >= 1")
    _require(parrep.replicas >= 1, "parrep.replicas", "must be >= 1")
    _require(parrep.block_rounds >= 0, "parrep.block_rounds", "must be >= 0")

    r = data.get("region", {})
    labels = tuple(r.get("labels", ("W+", "W-")))
    _require(
        len(labels) == 2 and labels[0] != labels[1], "region.labels", "needs two distinct labels"
    )
    region = RegionSection(
        species=r.get("species", defaults.SEPARATRIX_SPECIES),
        threshold=r.get("threshold", defaults.SEPARATRIX),
        orientation=r.get("orientation", "lower"),
        labels=labels,  # type: ignore[arg-type]
    )
    _require(
        region.orientation in ORIENTATIONS,
        "region.orientation",
        f"must be one of {list(ORIENTATIONS)}",
    )

    observables = []
    for i, o in enumerate(data.get("observables", [])):
        path = f"observables[{i}]"
        _require("label" in o, f"{path}.label", "is required")
        kind = o.get("kind", "species")
        _require(
            kind in OBSERVABLE_KINDS, f"{path}.kind", f"must be one of {list(OBSERVABLE_KINDS)}"
        )
        observables.append(ObservableSection(**{**o, "kind": kind}))
    labels_seen = [o.label for o in observables]
    _require(len(set(labels_seen)) == len(labels_seen), "observables", "labels must be unique")

    bins = None
    if "bins" in data:
        b = data["bins"]
        for key in ("species", "low", "high"):
            _require(key in b, f"bins.{key}", "is required")
        _require(b["high"] >= b["low"], "bins.high", "must be >= bins.low")
        _require(b.get("width", 1) >= 1, "bins.width", "must be >= 1")
        bins = BinsSection(b["species"], b["low"], b["high"], b.get("width", 1))

    cme = None
    if "cme" in data or mode == "cme":
        c = data.get("cme", {})
        box = c.get("box", defaults.CME_BOX)
        if box is not None:
            for i, pair in enumerate(box):
                valid = len(pair) == 2 and 0 <= pair[0] <= pair[1]
                _require(valid, f"cme.box[{i}]", "must be [low, high]")
            box = tuple(tuple(pair) for pair in box)
        _require(box is not None or mode != "cme", "cme.box", "is required for this model")
        cme = CmeSection(box, tuple(c.get("observables", ())), c.get("sensitivity", True))

    for path, names in (
        ("sensitivity.observables", sens.observables if sens else ()),
        ("cme.observables", cme.observables if cme else ()),
    ):
        for name in names:
            _require(name in labels_seen, path, f"unknown observable '{name}'")

    sp = data.get("speedup", {})
    speedup = SpeedupSection(tuple(sp.get("replicas", (1, 2, 4))), sp.get("repetitions", 3))
    _require(all(v >= 1 for v in speedup.replicas), "speedup.replicas", "must be >= 1")
    _require(speedup.repetitions >= 1, "speedup.repetitions", "must be >= 1")

    path_stride = data.get("path_stride", 0)
    _require(path_stride >= 0, "path_stride", "must be >= 0")

    return RunConfig(
        model=model,
        mode=mode,
        seed=data["seed"],
        t_end=t_end,
        n_traj=n_traj,
        parrep=parrep,
        region=region,
        observables=observables,
        initial_state=list(data.get("initial_state", defaults.INITIAL_STATE or [])),
        threads=threads,
        backend=backend,
        bins=bins,
        sensitivity=sens,
        cme=cme,
        speedup=speedup,
        path_stride=path_stride,
        output_dir=Path(data.get("output", {}).get("directory", "results")),
        target=data.get("target", ""),
        mirrors=data.get("mirrors", ""),
    )


def preset_path(target: str) -> Path:
    """
    Path of a shipped reproduce preset.

    Raises:
        KeyError: If no preset has that name
    """
    path = PRESET_DIR / f"{target}.cfg"
    if not path.is_file():
        raise KeyError(f"Unknown reproduce target '{target}'; choose from {list_presets()}")
    return path


def list_presets() -> List[str]:
    return sorted(p.stem for p in PRESET_DIR.glob("*.cfg"))


def flag_overrides(
    seed: Optional[int] = None,
    t_end: Optional[float] = None,
    n_traj: Optional[int] = None,
    replicas: Optional[int] = None,
    threads: Optional[int] = None,
    output: Optional[str] = None,
    assignments: Sequence[str] = (),
) -> Dict[str, Any]:
    """Collect CLI flags as dotted overrides; generic assignments come last."""
    overrides: Dict[str, Any] = {}
    for key, value in (
        ("seed", seed),
        ("t_end", t_end),
        ("n_traj", n_traj),
        ("parrep.replicas", replicas),
        ("threads", threads),
        ("output.directory", output),
    ):
        if value is not None:
            overrides[key] = value
    for assignment in assignments:
        key, value = parse_override(assignment)
        overrides[key] = value
    return overrides
