"""
Deterministic reaction rate equation for mass-action networks.

In the large-volume limit the concentration x = X/V follows
dx/dt = sum_j eta_j lambda_j(V x) / V with falling factorials replaced by
plain powers. For single-species networks the fixed points locate the
stable states and the separatrix used to split the state space.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from scipy.optimize import brentq

from .network import FloatArray, MassActionProduct, ReactionNetwork

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FixedPoint:
    """A root of the rate equation."""

    concentration: float
    population: float
    stable: bool


def deterministic_drift(net: ReactionNetwork, concentration: Sequence[float]) -> FloatArray:
    """
    Right-hand side of the reaction rate equation.

    Args:
        net: Network whose channels are all mass-action products
        concentration: Concentration vector x of length n

    Returns:
        dx/dt of shape (n,)

    Raises:
        ValueError: If a channel is not a mass-action product
    """
    x = np.asarray(concentration, dtype=np.float64)
    population = net.volume * x
    params = net.param_array
    drift = np.zeros(net.n_species, dtype=np.float64)
    for reaction in net.reactions:
        kind = reaction.propensity
        if not isinstance(kind, MassActionProduct):
            raise ValueError(f"No rate equation for propensity kind '{kind.kind}'")
        rate = kind.const_prefactor * net.volume**kind.volume_power
        for k in kind.param_indices:
            rate *= params[k]
        for i, order in enumerate(kind.ff_exponents):
            rate *= population[i] ** order
        drift += np.asarray(reaction.stoich, dtype=np.float64) * rate / net.volume
    return drift


def fixed_points_1d(
    net: ReactionNetwork, low: float, high: float, grid: int = 4000
) -> List[FixedPoint]:
    """
    Find the fixed points of a single-species rate equation on [low, high].

    Sign changes on a uniform grid are refined with Brent's method; a root
    is stable when the drift crosses from positive to negative.

    Returns:
        Fixed points sorted by concentration
    """
    if net.n_species != 1:
        raise ValueError(f"fixed_points_1d needs one species, network has {net.n_species}")

    def f(value: float) -> float:
        return float(deterministic_drift(net, [value])[0])

    points = np.linspace(low, high, grid + 1)
    values = np.array([f(p) for p in points])
    roots: List[FixedPoint] = []
    for left, right, f_left, f_right in zip(points[:-1], points[1:], values[:-1], values[1:]):
        if f_left == 0.0:
            root = float(left)
        elif f_left * f_right < 0:
            root = float(brentq(f, left, right, xtol=1e-12))
        else:
            continue
        stable = f_left > 0 or (f_left == 0.0 and f_right < 0)
        roots.append(FixedPoint(root, root * net.volume, bool(stable)))
    logger.debug("Fixed points of %s: %s", net.name, roots)
    return roots
