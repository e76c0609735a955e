"""
Pytest configuration and shared fixtures.

This file contains test configuration and fixtures shared across all test modules.
"""

import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

from parrep_sensitivity.core.cme import StateBox, build_truncated_generator, stationary_solve
from parrep_sensitivity.models import builtin_birth_death, builtin_genetic_switch, builtin_schlogl
from parrep_sensitivity.models.network import (
    ConservedSum,
    MassActionProduct,
    ParameterVector,
    Reaction,
    ReactionNetwork,
)
from parrep_sensitivity.models.region import RegionMap

SCHLOGL_SEPARATRIX = 25.9649


@pytest.fixture
def temp_dir():
    """
    Create a temporary directory for test files.

    Yields:
        Path: Path to temporary directory

    The directory is automatically cleaned up after the test.
    """
    temp_path = Path(tempfile.mkdtemp())
    yield temp_path
    shutil.rmtree(temp_path)


@pytest.fixture(scope="session")
def schlogl():
    return builtin_schlogl()


@pytest.fixture(scope="session")
def genetic_switch():
    return builtin_genetic_switch()


@pytest.fixture(scope="session")
def birth_death():
    """Closed birth-death chain on S in {0, ..., 4}."""
    return builtin_birth_death(size=4)


@pytest.fixture(scope="session")
def two_state():
    """Birth-death chain with S in {0, 1}; pi(S = 1) = 1/3."""
    return builtin_birth_death(size=1, birth=1.0, death=2.0)


@pytest.fixture(scope="session")
def gated_chain():
    """
    Counter X driven by a two-state gate Y + Z = 1.

    The gate flips in both directions; Y produces X, optionally flipping
    itself off in the same event, and X decays. Leaving {X <= 2} can land
    in (3, 1, 0) or (3, 0, 1), and the jump chain is aperiodic.
    """
    params = ParameterVector(("k_off", "k_on", "b", "s", "d"), (1.0, 1.0, 1.0, 0.5, 1.0))
    reactions = (
        Reaction((0, -1, 1), MassActionProduct((0,), (0, 1, 0)), "Y->Z"),
        Reaction((0, 1, -1), MassActionProduct((1,), (0, 0, 1)), "Z->Y"),
        Reaction((1, 0, 0), MassActionProduct((2,), (0, 1, 0)), "Y->Y+X"),
        Reaction((1, -1, 1), MassActionProduct((3,), (0, 1, 0)), "Y->Z+X"),
        Reaction((-1, 0, 0), MassActionProduct((4,), (1, 0, 0)), "X->0"),
    )
    return ReactionNetwork(
        name="gated",
        species_names=("X", "Y", "Z"),
        reactions=reactions,
        volume=1.0,
        params=params,
        conserved_sums=(ConservedSum((1, 2), 1),),
    )


@pytest.fixture(scope="session")
def pure_death():
    """X -> 0 only; the state 0 is absorbing."""
    params = ParameterVector(("d",), (1.0,))
    reactions = (Reaction((-1,), MassActionProduct((0,), (1,)), "X->0"),)
    return ReactionNetwork("pure_death", ("X",), reactions, 1.0, params)


@pytest.fixture(scope="session")
def pure_birth():
    """0 -> X at constant rate; every jump increases X."""
    params = ParameterVector(("k",), (1.0,))
    reactions = (Reaction((1,), MassActionProduct((0,), (0,)), "0->X"),)
    return ReactionNetwork("pure_birth", ("X",), reactions, 1.0, params)


@pytest.fixture(scope="session")
def death_and_feed():
    """X -> 0 and Z -> Y; a replica holding only X dies out, one holding Z feeds Y."""
    params = ParameterVector(("d", "f"), (1.0, 1.0))
    reactions = (
        Reaction((-1, 0, 0), MassActionProduct((0,), (1, 0, 0)), "X->0"),
        Reaction((0, 1, -1), MassActionProduct((1,), (0, 0, 1)), "Z->Y"),
    )
    return ReactionNetwork("death_and_feed", ("X", "Y", "Z"), reactions, 1.0, params)


@pytest.fixture(scope="session")
def schlogl_region():
    return RegionMap(0, SCHLOGL_SEPARATRIX, "lower", ("W+", "W-"))


@pytest.fixture(scope="session")
def schlogl_solution(schlogl):
    """Stationary CME solution of the Schlogl network on [0, 149]."""
    box = StateBox([(0, 149)], schlogl)
    return stationary_solve(build_truncated_generator(schlogl, box))


def embedded_qsd(net, states, region_map):
    """
    Quasi-stationary law of the jump chain killed on leaving region 0.

    Args:
        net: Reaction network
        states: Enumeration of the region's states
        region_map: Partition whose region 0 the states fill

    Returns:
        (nu, rho): QSD over ``states`` and the survival probability per jump
    """
    position = {tuple(s): i for i, s in enumerate(states)}
    sub = np.zeros((len(states), len(states)))
    for i, x in enumerate(states):
        props = net.propensities_many(np.asarray([x]))[0]
        total = props.sum()
        for j, reaction in enumerate(net.reactions):
            y = tuple(a + b for a, b in zip(x, reaction.stoich))
            if region_map.region_of(y) == 0 and y in position:
                sub[i, position[y]] += props[j] / total
    values, vectors = np.linalg.eig(sub.T)
    lead = int(np.argmax(values.real))
    nu = np.abs(vectors[:, lead].real)
    return nu / nu.sum(), float(values[lead].real)


@pytest.fixture
def write_config(temp_dir):
    """
    Write a run config document into the temporary directory.

    Returns:
        Callable taking the YAML text (and an optional file name) and
        returning the written path
    """

    def _write(text, name="run.cfg"):
        path = temp_dir / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


@pytest.fixture
def minimal_ssa_config(temp_dir):
    """YAML text of a short Schlogl SSA run writing into the temporary directory."""
    return f"""
model: schlogl
mode: ssa
seed: 7
t_end: 50.0
n_traj: 2
observables:
  - {{label: X, species: S}}
bins: {{species: S, low: 0, high: 149}}
output: {{directory: {temp_dir / 'out'}}}
"""


# Test configuration
def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line(
        "markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')"
    )
    config.addinivalue_line(
        "markers", "integration: marks tests as integration tests"
    )
    config.addinivalue_line(
        "markers", "unit: marks tests as unit tests"
    )
