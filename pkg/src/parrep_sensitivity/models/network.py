"""
Reaction network data structures.

A network is pure data: species, stoichiometry and declarative propensity
kinds whose parameter gradients are known in closed form. All evaluation is
vectorized over a batch of states so the simulation kernel can evaluate many
replicas in one call.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, ClassVar, Dict, NamedTuple, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from ..exceptions import NetworkDefinitionError

State = Tuple[int, ...]
FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]

# Propensity kind codes understood by the compiled kernel
KERNEL_MASS_ACTION = 0
KERNEL_HILL_ACTIVATION = 1
KERNEL_HILL_DEACTIVATION = 2

KernelRow = Tuple[int, Tuple[float, float, float], Tuple[int, int], Tuple[int, ...]]


@dataclass(frozen=True)
class ParameterVector:
    """Named, strictly positive rate constants and model constants."""

    names: Tuple[str, ...]
    values: Tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.names) == 0:
            raise NetworkDefinitionError("Parameter vector must not be empty")
        if len(self.names) != len(self.values):
            raise NetworkDefinitionError(
                f"Got {len(self.names)} parameter names but {len(self.values)} values"
            )
        if len(set(self.names)) != len(self.names):
            raise NetworkDefinitionError(f"Parameter names must be unique: {self.names}")
        for name, value in zip(self.names, self.values):
            if not np.isfinite(value) or value <= 0:
                raise NetworkDefinitionError(f"Parameter '{name}' must be positive, got {value}")

    def __len__(self) -> int:
        return len(self.values)

    def index(self, name: str) -> int:
        """Return the position of a parameter by name."""
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"Unknown parameter: {name}") from None

    def as_array(self) -> FloatArray:
        return np.asarray(self.values, dtype=np.float64)

    def with_value(self, k: int, value: float) -> "ParameterVector":
        """Return a copy with parameter ``k`` replaced."""
        values = list(self.values)
        values[k] = float(value)
        return ParameterVector(self.names, tuple(values))


class PropensityKind(ABC):
    """
    Abstract base class for declarative propensity functions.

    Subclasses evaluate the propensity and its parameter gradient for a
    batch of states at once.
    """

    kind: str = ""

    @abstractmethod
    def evaluate(self, states: IntArray, params: FloatArray, volume: float) -> FloatArray:
        """
        Evaluate the propensity on a batch of states.

        Args:
            states: Integer array of shape (N, n)
            params: Parameter values of shape (l,)
            volume: System size V

        Returns:
            Nonnegative propensities of shape (N,)
        """

    @abstractmethod
    def gradient(self, states: IntArray, params: FloatArray, volume: float) -> FloatArray:
        """
        Evaluate the parameter gradient on a batch of states.

        Returns:
            Array of shape (N, l) holding dlambda/dc_k
        """

    @abstractmethod
    def parameter_indices(self) -> Tuple[int, ...]:
        """Indices of the parameters the propensity depends on."""

    @abstractmethod
    def species_indices(self) -> Tuple[int, ...]:
        """Indices of the species the propensity reads."""

    @abstractmethod
    def kernel_row(self, params: FloatArray, volume: float, n_species: int) -> KernelRow:
        """
        Encode the propensity for the compiled simulation kernel.

        Returns:
            (kind code, three coefficients, two species links, falling
            factorial order per species)
        """

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """Convert to the network document representation."""


def falling_factorial(x: IntArray, order: int) -> FloatArray:
    """x (x-1) ... (x-order+1); zero whenever 0 <= x < order."""
    result = np.ones(x.shape, dtype=np.float64)
    for i in range(order):
        result *= x - i
    return result


@dataclass(frozen=True)
class MassActionProduct(PropensityKind):
    """
    Product of parameters, a constant prefactor, falling factorials of the
    species populations and a power of the volume.
    """

    param_indices: Tuple[int, ...]
    ff_exponents: Tuple[int, ...]
    const_prefactor: float = 1.0
    volume_power: int = 0
    kind: str = field(default="mass_action", init=False)

    def evaluate(self, states: IntArray, params: FloatArray, volume: float) -> FloatArray:
        scale = self.const_prefactor * float(volume) ** self.volume_power
        for k in self.param_indices:
            scale *= params[k]
        values = np.full(states.shape[0], scale, dtype=np.float64)
        for species, order in enumerate(self.ff_exponents):
            if order:
                values *= falling_factorial(states[:, species], order)
        return values

    def gradient(self, states: IntArray, params: FloatArray, volume: float) -> FloatArray:
        values = self.evaluate(states, params, volume)
        grad = np.zeros((states.shape[0], params.shape[0]), dtype=np.float64)
        for k in self.param_indices:
            grad[:, k] = values / params[k]
        return grad

    def parameter_indices(self) -> Tuple[int, ...]:
        return self.param_indices

    def species_indices(self) -> Tuple[int, ...]:
        return tuple(i for i, order in enumerate(self.ff_exponents) if order)

    def kernel_row(self, params: FloatArray, volume: float, n_species: int) -> KernelRow:
        scale = self.const_prefactor * float(volume) ** self.volume_power
        for k in self.param_indices:
            scale *= params[k]
        orders = tuple(self.ff_exponents) + (0,) * (n_species - len(self.ff_exponents))
        return KERNEL_MASS_ACTION, (scale, 0.0, 0.0), (0, 0), orders

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "param_indices": list(self.param_indices),
            "ff_exponents": list(self.ff_exponents),
            "const_prefactor": self.const_prefactor,
            "volume_power": self.volume_power,
        }


@dataclass(frozen=True)
class _HillSwitch(PropensityKind):
    """Gate-weighted Hill-type switching rate driven by a sensor species."""

    base_idx: int
    max_idx: int
    D_idx: int
    sensor_species: int
    gate_species: int
    kernel_code: ClassVar[int] = KERNEL_HILL_ACTIVATION

    def _parts(
        self, states: IntArray, params: FloatArray
    ) -> Tuple[FloatArray, FloatArray, FloatArray, float, float, float]:
        gate = states[:, self.gate_species].astype(np.float64)
        xs2 = states[:, self.sensor_species].astype(np.float64) ** 2
        D = params[self.D_idx]
        hill = xs2 / (xs2 + D * D)
        return gate, xs2, hill, params[self.base_idx], params[self.max_idx], D

    def parameter_indices(self) -> Tuple[int, ...]:
        return (self.base_idx, self.max_idx, self.D_idx)

    def species_indices(self) -> Tuple[int, ...]:
        return (self.sensor_species, self.gate_species)

    def kernel_row(self, params: FloatArray, volume: float, n_species: int) -> KernelRow:
        coeffs = (
            float(params[self.base_idx]),
            float(params[self.max_idx]),
            float(params[self.D_idx]),
        )
        links = (self.sensor_species, self.gate_species)
        return self.kernel_code, coeffs, links, (0,) * n_species

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "base_idx": self.base_idx,
            "max_idx": self.max_idx,
            "D_idx": self.D_idx,
            "sensor_species": self.sensor_species,
            "gate_species": self.gate_species,
        }


@dataclass(frozen=True)
class HillActivation(_HillSwitch):
    """gate * (k_base + (k_max - k_base) h), h = x_s^2 / (x_s^2 + D^2)."""

    kind: str = field(default="hill_activation", init=False)
    kernel_code: ClassVar[int] = KERNEL_HILL_ACTIVATION

    def evaluate(self, states: IntArray, params: FloatArray, volume: float) -> FloatArray:
        gate, _, hill, k_base, k_max, _ = self._parts(states, params)
        return gate * (k_base + (k_max - k_base) * hill)

    def gradient(self, states: IntArray, params: FloatArray, volume: float) -> FloatArray:
        gate, xs2, hill, k_base, k_max, D = self._parts(states, params)
        grad = np.zeros((states.shape[0], params.shape[0]), dtype=np.float64)
        grad[:, self.base_idx] += gate * (1.0 - hill)
        grad[:, self.max_idx] += gate * hill
        grad[:, self.D_idx] += -gate * (k_max - k_base) * 2.0 * D * xs2 / (xs2 + D * D) ** 2
        return grad


@dataclass(frozen=True)
class HillDeactivation(_HillSwitch):
    """gate * (k_max - (k_max - k_base) h), h = x_s^2 / (x_s^2 + D^2)."""

    kind: str = field(default="hill_deactivation", init=False)
    kernel_code: ClassVar[int] = KERNEL_HILL_DEACTIVATION

    def evaluate(self, states: IntArray, params: FloatArray, volume: float) -> FloatArray:
        gate, _, hill, k_base, k_max, _ = self._parts(states, params)
        return gate * (k_max - (k_max - k_base) * hill)

    def gradient(self, states: IntArray, params: FloatArray, volume: float) -> FloatArray:
        gate, xs2, hill, k_base, k_max, D = self._parts(states, params)
        grad = np.zeros((states.shape[0], params.shape[0]), dtype=np.float64)
        grad[:, self.base_idx] += gate * hill
        grad[:, self.max_idx] += gate * (1.0 - hill)
        grad[:, self.D_idx] += gate * (k_max - k_base) * 2.0 * D * xs2 / (xs2 + D * D) ** 2
        return grad


PROPENSITY_KINDS = {
    "mass_action": MassActionProduct,
    "hill_activation": HillActivation,
    "hill_deactivation": HillDeactivation,
}


@dataclass(frozen=True)
class Reaction:
    """One reaction channel: stoichiometric vector and propensity."""

    stoich: Tuple[int, ...]
    propensity: PropensityKind
    name: str = ""


@dataclass(frozen=True)
class ConservedSum:
    """A subset of species whose populations always add up to ``total``."""

    species: Tuple[int, ...]
    total: int


class KernelArrays(NamedTuple):
    """Arrays read by the compiled kernels; row j describes channel j."""

    codes: IntArray
    coeffs: FloatArray
    links: IntArray
    orders: IntArray
    stoich: IntArray


@dataclass(frozen=True)
class ReactionNetwork:
    """
    Immutable reaction network.

    Holds n species, m reaction channels, the system size V, the parameter
    vector and optional conservation laws. Safe to share across workers.
    """

    name: str
    species_names: Tuple[str, ...]
    reactions: Tuple[Reaction, ...]
    volume: float
    params: ParameterVector
    conserved_sums: Tuple[ConservedSum, ...] = ()

    def __post_init__(self) -> None:
        from ..utils.validation import NetworkValidator

        is_valid, errors = NetworkValidator.validate_network(self)
        if not is_valid:
            raise NetworkDefinitionError(f"Invalid network '{self.name}': " + "; ".join(errors))

    @property
    def n_species(self) -> int:
        return len(self.species_names)

    @property
    def n_reactions(self) -> int:
        return len(self.reactions)

    @property
    def n_params(self) -> int:
        return len(self.params)

    @cached_property
    def stoichiometry(self) -> IntArray:
        """Stoichiometric matrix of shape (m, n)."""
        return np.array([r.stoich for r in self.reactions], dtype=np.int64)

    @cached_property
    def param_array(self) -> FloatArray:
        return self.params.as_array()

    @cached_property
    def kernel_arrays(self) -> KernelArrays:
        """Flat encoding of the propensities and stoichiometry for compiled kernels."""
        rows = [
            r.propensity.kernel_row(self.param_array, self.volume, self.n_species)
            for r in self.reactions
        ]
        return KernelArrays(
            codes=np.array([row[0] for row in rows], dtype=np.int64),
            coeffs=np.array([row[1] for row in rows], dtype=np.float64),
            links=np.array([row[2] for row in rows], dtype=np.int64),
            orders=np.array([row[3] for row in rows], dtype=np.int64),
            stoich=self.stoichiometry,
        )

    def species_index(self, name: str) -> int:
        try:
            return self.species_names.index(name)
        except ValueError:
            raise KeyError(f"Unknown species: {name}") from None

    def check_state(self, x: Sequence[int]) -> State:
        """
        Validate a population vector for this network.

        Raises:
            ValueError: If the state has the wrong length, negative entries
                or breaks a conservation law
        """
        state = tuple(int(v) for v in x)
        if len(state) != self.n_species:
            raise ValueError(f"State {state} must have {self.n_species} entries")
        if any(v < 0 for v in state):
            raise ValueError(f"State {state} has negative populations")
        for law in self.conserved_sums:
            total = sum(state[i] for i in law.species)
            if total != law.total:
                raise ValueError(
                    f"State {state} breaks conservation of {law.species} "
                    f"(sum {total} != {law.total})"
                )
        return state

    def propensities_many(self, states: IntArray) -> FloatArray:
        """Propensities of shape (N, m) for a batch of states of shape (N, n)."""
        states = np.atleast_2d(np.asarray(states, dtype=np.int64))
        out = np.empty((states.shape[0], self.n_reactions), dtype=np.float64)
        for j, reaction in enumerate(self.reactions):
            out[:, j] = reaction.propensity.evaluate(states, self.param_array, self.volume)
        return out

    def gradients_many(self, states: IntArray) -> FloatArray:
        """Propensity gradients of shape (N, m, l)."""
        states = np.atleast_2d(np.asarray(states, dtype=np.int64))
        out = np.empty((states.shape[0], self.n_reactions, self.n_params), dtype=np.float64)
        for j, reaction in enumerate(self.reactions):
            out[:, j, :] = reaction.propensity.gradient(states, self.param_array, self.volume)
        return out

    def fim_integrand_many(self, states: IntArray) -> FloatArray:
        """
        Per-state path-space Fisher integrand sum_j grad_j grad_j^T / lambda_j.

        Channels with zero propensity contribute nothing.

        Returns:
            Array of shape (N, l, l)
        """
        props = self.propensities_many(states)
        grads = self.gradients_many(states)
        weights = np.divide(1.0, props, out=np.zeros_like(props), where=props > 0)
        return np.einsum("nj,njk,njl->nkl", weights, grads, grads)

    def with_params(self, params: ParameterVector) -> "ReactionNetwork":
        return replace(self, params=params)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to the network document representation."""
        return {
            "name": self.name,
            "species": list(self.species_names),
            "volume": self.volume,
            "parameters": [
                {"name": n, "value": v} for n, v in zip(self.params.names, self.params.values)
            ],
            "reactions": [
                {"name": r.name, "stoich": list(r.stoich), **r.propensity.to_dict()}
                for r in self.reactions
            ],
            "conserved_sums": [
                {"species": list(c.species), "total": c.total} for c in self.conserved_sums
            ],
        }


def evaluate_propensities(net: ReactionNetwork, x: Sequence[int]) -> FloatArray:
    """
    Evaluate all channel propensities at one state.

    Args:
        net: Reaction network
        x: Population vector

    Returns:
        Nonnegative propensities of shape (m,)
    """
    return net.propensities_many(np.asarray([x], dtype=np.int64))[0]


def propensity_gradients(net: ReactionNetwork, x: Sequence[int]) -> FloatArray:
    """
    Evaluate the parameter gradient of every propensity at one state.

    Returns:
        Matrix of shape (m, l) with entry (j, k) = dlambda_j/dc_k
    """
    return net.gradients_many(np.asarray([x], dtype=np.int64))[0]


def propensity_kind_from_dict(data: Dict[str, Any]) -> PropensityKind:
    """Build a propensity kind from its document representation."""
    fields = dict(data)
    kind = fields.pop("kind", None)
    if kind not in PROPENSITY_KINDS:
        raise NetworkDefinitionError(f"Unknown propensity kind: {kind}")
    if kind == "mass_action":
        return MassActionProduct(
            param_indices=tuple(int(k) for k in fields.get("param_indices", [])),
            ff_exponents=tuple(int(e) for e in fields.get("ff_exponents", [])),
            const_prefactor=float(fields.get("const_prefactor", 1.0)),
            volume_power=int(fields.get("volume_power", 0)),
        )
    cls = PROPENSITY_KINDS[kind]
    try:
        return cls(  # type: ignore[call-arg]
            base_idx=int(fields["base_idx"]),
            max_idx=int(fields["max_idx"]),
            D_idx=int(fields["D_idx"]),
            sensor_species=int(fields["sensor_species"]),
            gate_species=int(fields["gate_species"]),
        )
    except KeyError as e:
        raise NetworkDefinitionError(f"Propensity '{kind}' missing field {e}") from e
