"""
Truncated chemical master equation.

The generator is assembled on a finite box of states with reflecting
truncation: transitions that would leave the box are dropped together with
their share of the diagonal. The stationary distribution and its parameter
derivatives solve one bordered sparse system,

    [Q^T  1] [p]   [r]
    [1^T  0] [m] = [s],

factorized once and reused for every right-hand side.
"""

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu

from ..config.settings import DEFAULT_SETTINGS
from ..exceptions import BoxTooSmall, Reducible, SingularSystem
from ..models.network import FloatArray, IntArray, ReactionNetwork, State
from ..models.observable import Binning, Observable

logger = logging.getLogger(__name__)

StateFunction = Union[Observable, Callable[[IntArray], FloatArray], Sequence[float], FloatArray]


class StateBox:
    """
    Inclusive per-species bounds, enumerated lexicographically.

    States breaking one of the network's conservation laws are left out.
    """

    def __init__(
        self,
        bounds: Sequence[Tuple[int, int]],
        net: Optional[ReactionNetwork] = None,
        max_states: int = 0,
    ) -> None:
        self.bounds = tuple((int(lo), int(hi)) for lo, hi in bounds)
        if not self.bounds:
            raise ValueError("StateBox needs at least one species range")
        for lo, hi in self.bounds:
            if lo < 0 or hi < lo:
                raise ValueError(f"Invalid species range [{lo}, {hi}]")
        if net is not None and net.n_species != len(self.bounds):
            raise ValueError(
                f"Box has {len(self.bounds)} ranges, network has {net.n_species} species"
            )
        limit = max_states or DEFAULT_SETTINGS.MAX_BOX_STATES
        self._lows = np.array([lo for lo, _ in self.bounds], dtype=np.int64)
        self._extent = np.array([hi - lo + 1 for lo, hi in self.bounds], dtype=np.int64)
        full_size = int(np.prod(self._extent))
        if full_size > limit:
            raise ValueError(f"Box holds {full_size} states, above the limit of {limit}")

        grid = np.array(
            list(product(*(range(lo, hi + 1) for lo, hi in self.bounds))), dtype=np.int64
        ).reshape(full_size, len(self.bounds))
        keep = np.ones(full_size, dtype=bool)
        if net is not None:
            for law in net.conserved_sums:
                keep &= grid[:, list(law.species)].sum(axis=1) == law.total
        if not keep.any():
            raise ValueError(f"No state of box {self.bounds} satisfies the conservation laws")
        self.states: IntArray = grid[keep]
        # mixed-radix code -> position in self.states, -1 for filtered states
        self._lookup = np.full(full_size, -1, dtype=np.int64)
        self._lookup[np.flatnonzero(keep)] = np.arange(self.states.shape[0])
        self._strides = np.array(
            [int(np.prod(self._extent[i + 1 :])) for i in range(len(self.bounds))], dtype=np.int64
        )

    def __len__(self) -> int:
        return int(self.states.shape[0])

    def index_many(self, states: IntArray) -> IntArray:
        """Position of each state, -1 for states outside the box."""
        states = np.atleast_2d(states)
        offset = states - self._lows
        inside = np.all((offset >= 0) & (offset < self._extent), axis=1)
        codes = np.where(inside, offset @ self._strides, 0)
        return np.where(inside, self._lookup[codes], -1)

    def index_of(self, x: Sequence[int]) -> int:
        return int(self.index_many(np.asarray([x], dtype=np.int64))[0])

    def require(self, x: Sequence[int]) -> int:
        """
        Position of ``x``.

        Raises:
            BoxTooSmall: If ``x`` lies outside the box
        """
        position = self.index_of(x)
        if position < 0:
            raise BoxTooSmall(f"State {tuple(x)} lies outside the box {list(self.bounds)}")
        return position

    def to_dict(self) -> Dict[str, Any]:
        return {"bounds": [list(b) for b in self.bounds], "states": len(self)}


@dataclass
class TruncatedGenerator:
    """
    Generator Q on a box with reflecting truncation.

    Attributes:
        box: Enumerated states
        matrix: Sparse CSR generator, rows summing to zero
        dropped_outflow: Total rate of removed out-of-box transitions per state
    """

    box: StateBox
    matrix: sparse.csr_matrix
    dropped_outflow: FloatArray

    @property
    def size(self) -> int:
        return len(self.box)


@dataclass
class StationarySolution:
    """
    Stationary distribution on a box.

    Attributes:
        pi: Probability vector over the box states
        residual: Max-norm of pi^T Q
        boundary_mass: Probability of states with dropped outflow
    """

    generator: TruncatedGenerator
    pi: FloatArray
    residual: float
    boundary_mass: float
    _factor: Any = field(default=None, repr=False)

    @property
    def box(self) -> StateBox:
        return self.generator.box

    def records(self) -> List[Tuple[State, float]]:
        """(state, probability) pairs in box order."""
        return [(tuple(int(v) for v in s), float(p)) for s, p in zip(self.box.states, self.pi)]


def _assemble(
    box: StateBox, rates: FloatArray, net: ReactionNetwork, keep_positive: bool
) -> Tuple[sparse.csr_matrix, FloatArray]:
    """Generator-shaped matrix with off-diagonals ``rates[:, j]`` at x -> x + eta_j."""
    size = len(box)
    rows: List[IntArray] = []
    cols: List[IntArray] = []
    vals: List[FloatArray] = []
    dropped = np.zeros(size, dtype=np.float64)
    source = np.arange(size)
    for j, eta in enumerate(net.stoichiometry):
        target = box.index_many(box.states + eta)
        rate = rates[:, j]
        active = rate > 0 if keep_positive else rate != 0
        inside = active & (target >= 0)
        rows.append(source[inside])
        cols.append(target[inside])
        vals.append(rate[inside])
        outside = active & (target < 0)
        dropped[outside] += rate[outside]
    row = np.concatenate(rows)
    col = np.concatenate(cols)
    val = np.concatenate(vals)
    offdiag = sparse.coo_matrix((val, (row, col)), shape=(size, size)).tocsr()
    diagonal = -np.asarray(offdiag.sum(axis=1)).ravel()
    matrix = (offdiag + sparse.diags(diagonal)).tocsr()
    return matrix, dropped


def build_truncated_generator(net: ReactionNetwork, box: StateBox) -> TruncatedGenerator:
    """
    Assemble the reflecting-truncation generator of ``net`` on ``box``.

    Args:
        net: Reaction network
        box: Enumerated state box

    Returns:
        TruncatedGenerator with Q[x, x + eta_j] = lambda_j(x) inside the box
    """
    props = net.propensities_many(box.states)
    matrix, dropped = _assemble(box, props, net, keep_positive=True)
    logger.debug("Generator on %d states with %d nonzeros", len(box), matrix.nnz)
    return TruncatedGenerator(box, matrix, dropped)


def generator_derivatives(net: ReactionNetwork, box: StateBox) -> List[sparse.csr_matrix]:
    """dQ/dc_k for every parameter, with the same truncation as Q."""
    grads = net.gradients_many(box.states)
    props = net.propensities_many(box.states)
    # drop transitions whose propensity vanishes, as the generator does
    grads = np.where((props > 0)[:, :, None], grads, 0.0)
    return [
        _assemble(box, grads[:, :, k], net, keep_positive=False)[0] for k in range(net.n_params)
    ]


def _check_single_closed_class(matrix: sparse.csr_matrix) -> None:
    offdiag = matrix - sparse.diags(matrix.diagonal())
    graph = (abs(offdiag) > 0).astype(np.int8)
    n_comp, labels = connected_components(graph, directed=True, connection="strong")
    if n_comp == 1:
        return
    coo = graph.tocoo()
    leaving = labels[coo.row] != labels[coo.col]
    open_components = set(labels[coo.row[leaving]].tolist())
    closed = n_comp - len(open_components)
    if closed > 1:
        raise Reducible(f"Truncated generator has {closed} closed communicating classes")


def _bordered(matrix: sparse.csr_matrix) -> sparse.csc_matrix:
    size = matrix.shape[0]
    ones = np.ones((size, 1))
    return sparse.bmat(
        [[matrix.T, sparse.csr_matrix(ones)], [sparse.csr_matrix(ones.T), None]], format="csc"
    )


def stationary_solve(generator: TruncatedGenerator) -> StationarySolution:
    """
    Solve pi^T Q = 0 with sum(pi) = 1.

    Raises:
        Reducible: If the box holds more than one closed class
        SingularSystem: If the bordered system cannot be factorized
    """
    matrix = generator.matrix
    _check_single_closed_class(matrix)
    size = generator.size
    try:
        factor = splu(_bordered(matrix))
    except RuntimeError as e:
        raise SingularSystem(f"Bordered stationary system is singular: {e}") from e
    rhs = np.zeros(size + 1)
    rhs[-1] = 1.0
    pi = factor.solve(rhs)[:size]
    if not np.all(np.isfinite(pi)):
        raise SingularSystem("Bordered stationary system produced non-finite values")
    pi = np.where(pi < 0, 0.0, pi)
    pi /= pi.sum()

    residual = float(np.abs(matrix.T @ pi).max())
    if residual > DEFAULT_SETTINGS.CME_RESIDUAL_TOL:
        logger.warning(
            "Stationary residual %.3g exceeds %.1g", residual, DEFAULT_SETTINGS.CME_RESIDUAL_TOL
        )
    boundary_mass = float(pi[generator.dropped_outflow > 0].sum())
    if boundary_mass > DEFAULT_SETTINGS.BOUNDARY_MASS_TOL:
        logger.warning(
            "Stationary mass %.3g on truncated boundary states exceeds %.1g",
            boundary_mass,
            DEFAULT_SETTINGS.BOUNDARY_MASS_TOL,
        )
    return StationarySolution(generator, pi, residual, boundary_mass, factor)


def _values(f: StateFunction, box: StateBox) -> FloatArray:
    if isinstance(f, Observable):
        return f.evaluate_many(box.states)
    if callable(f):
        return np.asarray(f(box.states), dtype=np.float64)
    values = np.asarray(f, dtype=np.float64)
    if values.shape != (len(box),):
        raise ValueError(f"Expected {len(box)} values, got shape {values.shape}")
    return values


def stationary_moments(sol: StationarySolution, f: StateFunction) -> float:
    """Stationary expectation sum_x f(x) pi(x)."""
    return float(_values(f, sol.box) @ sol.pi)


def stationary_variance(sol: StationarySolution, f: StateFunction) -> float:
    values = _values(f, sol.box)
    mean = values @ sol.pi
    return float(((values - mean) ** 2) @ sol.pi)


def stationary_histogram(sol: StationarySolution, binning: Binning) -> FloatArray:
    """Stationary mass per slot of ``binning`` (underflow, bins, overflow)."""
    return np.bincount(
        binning.slot_many(sol.box.states), weights=sol.pi, minlength=binning.n_slots
    ).astype(np.float64)


def stationary_derivatives(net: ReactionNetwork, sol: StationarySolution) -> FloatArray:
    """
    d pi / d c_k for every parameter.

    Returns:
        Array of shape (l, N); each row sums to zero
    """
    size = sol.generator.size
    factor = sol._factor if sol._factor is not None else splu(_bordered(sol.generator.matrix))
    derivatives = np.empty((net.n_params, size), dtype=np.float64)
    for k, dq in enumerate(generator_derivatives(net, sol.box)):
        rhs = np.zeros(size + 1)
        rhs[:size] = -(dq.T @ sol.pi)
        derivatives[k] = factor.solve(rhs)[:size]
    if not np.all(np.isfinite(derivatives)):
        raise SingularSystem("Bordered sensitivity system produced non-finite values")
    return derivatives


def stationary_sensitivity(
    net: ReactionNetwork,
    box: StateBox,
    f: StateFunction,
    sol: Optional[StationarySolution] = None,
) -> FloatArray:
    """
    Derivative of the stationary mean of ``f`` with respect to every parameter.

    Args:
        net: Reaction network
        box: State box
        f: Observable, function of a state batch, or values per box state
        sol: Stationary solution to reuse; solved here when omitted

    Returns:
        Vector of length l

    Raises:
        SingularSystem: If the bordered system is rank-deficient
    """
    if sol is None:
        sol = stationary_solve(build_truncated_generator(net, box))
    return stationary_derivatives(net, sol) @ _values(f, sol.box)


def stationary_fim(net: ReactionNetwork, sol: StationarySolution) -> FloatArray:
    """Stationary Fisher information rate sum_x pi(x) sum_j grad_j grad_j^T / lambda_j."""
    return np.einsum("n,nkl->kl", sol.pi, net.fim_integrand_many(sol.box.states))
