"""
Built-in reaction networks.

Ships the bistable Schlogl network, the genetic switch with positive
feedback and a small birth-death chain used by the exit-law oracles.
"""

from typing import Callable, Dict

from .network import (
    ConservedSum,
    HillActivation,
    HillDeactivation,
    MassActionProduct,
    ParameterVector,
    Reaction,
    ReactionNetwork,
)


def builtin_schlogl() -> ReactionNetwork:
    """
    Bistable Schlogl network with V = 25.

    The bath concentrations a = 1 and b = 2 enter as constant prefactors;
    the sensitivity parameters are (c1, c2, c3, c4).

    Returns:
        ReactionNetwork with one species and four channels
    """
    a, b = 1.0, 2.0
    params = ParameterVector(("c1", "c2", "c3", "c4"), (3.0, 0.6, 0.25, 2.95))
    reactions = (
        Reaction(
            (1,), MassActionProduct((0,), (2,), const_prefactor=a, volume_power=-1), "A+2S->3S"
        ),
        Reaction((-1,), MassActionProduct((1,), (3,), volume_power=-2), "3S->A+2S"),
        Reaction((1,), MassActionProduct((2,), (0,), const_prefactor=b, volume_power=1), "B->S"),
        Reaction((-1,), MassActionProduct((3,), (1,)), "S->B"),
    )
    return ReactionNetwork(
        name="schlogl",
        species_names=("S",),
        reactions=reactions,
        volume=25.0,
        params=params,
    )


def builtin_genetic_switch() -> ReactionNetwork:
    """
    Genetic switch with mRNA noise and Hill-type positive feedback.

    Species are (DNA_act, DNA_in, mRNA, Protein); the gate is held as two
    conserved species with DNA_act + DNA_in = 1. Parameters are ordered
    (a, b, gamma, k0_min, k0_max, k1_min, k1_max, D).

    Returns:
        ReactionNetwork with four species and six channels, V = ab = 2400
    """
    b = 22.5
    a = 2400.0 / b
    params = ParameterVector(
        ("a", "b", "gamma", "k0_min", "k0_max", "k1_min", "k1_max", "D"),
        (a, b, 50.0, 24.0 / b, 2400.0 / b, 24.0 / b, 2400.0 / b, 1000.0),
    )
    act, inact, mrna, protein = 0, 1, 2, 3
    reactions = (
        Reaction(
            (1, -1, 0, 0),
            HillActivation(
                base_idx=3, max_idx=4, D_idx=7, sensor_species=protein, gate_species=inact
            ),
            "DNA_in->DNA_act",
        ),
        Reaction(
            (-1, 1, 0, 0),
            HillDeactivation(
                base_idx=5, max_idx=6, D_idx=7, sensor_species=protein, gate_species=act
            ),
            "DNA_act->DNA_in",
        ),
        Reaction((0, 0, 1, 0), MassActionProduct((0,), (1, 0, 0, 0)), "DNA_act->DNA_act+mRNA"),
        Reaction((0, 0, -1, 0), MassActionProduct((2,), (0, 0, 1, 0)), "mRNA->0"),
        Reaction((0, 0, 0, 1), MassActionProduct((2, 1), (0, 0, 1, 0)), "mRNA->mRNA+Protein"),
        Reaction((0, 0, 0, -1), MassActionProduct((), (0, 0, 0, 1)), "Protein->0"),
    )
    return ReactionNetwork(
        name="genetic_switch",
        species_names=("DNA_act", "DNA_in", "mRNA", "Protein"),
        reactions=reactions,
        volume=a * b,
        params=params,
        conserved_sums=(ConservedSum((act, inact), 1),),
    )


def builtin_birth_death(size: int = 5, birth: float = 1.0, death: float = 1.0) -> ReactionNetwork:
    """
    Closed birth-death chain on S in {0, ..., size}.

    A complementary species E keeps S + E = size, so births stop at the top.

    Args:
        size: Total population of S and E
        birth: Rate constant of E -> S (propensity birth * E)
        death: Rate constant of S -> E (propensity death * S)
    """
    params = ParameterVector(("birth", "death"), (birth, death))
    reactions = (
        Reaction((1, -1), MassActionProduct((0,), (0, 1)), "E->S"),
        Reaction((-1, 1), MassActionProduct((1,), (1, 0)), "S->E"),
    )
    return ReactionNetwork(
        name="birth_death",
        species_names=("S", "E"),
        reactions=reactions,
        volume=1.0,
        params=params,
        conserved_sums=(ConservedSum((0, 1), size),),
    )


BUILTIN_MODELS: Dict[str, Callable[[], ReactionNetwork]] = {
    "schlogl": builtin_schlogl,
    "genetic_switch": builtin_genetic_switch,
    "birth_death": builtin_birth_death,
}


def get_builtin(name: str) -> ReactionNetwork:
    """
    Look up a built-in network by name.

    Raises:
        KeyError: If no built-in model has that name
    """
    if name not in BUILTIN_MODELS:
        raise KeyError(f"Unknown built-in model '{name}'; choose from {sorted(BUILTIN_MODELS)}")
    return BUILTIN_MODELS[name]()
