"""
Data validation utilities for reaction networks.

This module provides validation functions for network structures. Each
check returns ``(is_valid, errors)`` so callers can collect every problem
before raising.
"""

from typing import TYPE_CHECKING, List, Sequence, Tuple

import numpy as np

if TYPE_CHECKING:
    from ..models.network import ConservedSum, Reaction, ReactionNetwork


class NetworkValidator:
    """
    Validator for reaction network structures.

    Checks index ranges, stoichiometry and conservation laws.
    """

    @staticmethod
    def validate_network(net: "ReactionNetwork") -> Tuple[bool, List[str]]:
        """
        Validate a reaction network.

        Args:
            net: Network to validate

        Returns:
            Tuple of (is_valid, list_of_errors)
        """
        errors: List[str] = []

        if net.n_species == 0:
            errors.append("Network must declare at least one species")
        if len(set(net.species_names)) != net.n_species:
            errors.append(f"Species names must be unique: {net.species_names}")
        if net.n_reactions == 0:
            errors.append("Network must declare at least one reaction")
        if not np.isfinite(net.volume) or net.volume <= 0:
            errors.append(f"Volume must be positive, got {net.volume}")

        for j, reaction in enumerate(net.reactions):
            _, reaction_errors = NetworkValidator.validate_reaction(
                reaction, net.n_species, len(net.params)
            )
            errors.extend(f"Reaction {j}: {e}" for e in reaction_errors)

        for law in net.conserved_sums:
            _, law_errors = NetworkValidator.validate_conservation(
                law, net.reactions, net.n_species
            )
            errors.extend(law_errors)

        return len(errors) == 0, errors

    @staticmethod
    def validate_reaction(
        reaction: "Reaction", n_species: int, n_params: int
    ) -> Tuple[bool, List[str]]:
        """
        Validate one reaction channel against the network dimensions.

        Args:
            reaction: Reaction to validate
            n_species: Number of species n
            n_params: Length l of the parameter vector

        Returns:
            Tuple of (is_valid, list_of_errors)
        """
        errors: List[str] = []
        propensity = reaction.propensity

        if len(reaction.stoich) != n_species:
            errors.append(f"stoichiometry {reaction.stoich} must have {n_species} entries")
        elif all(v == 0 for v in reaction.stoich):
            errors.append("stoichiometry must not be the zero vector")

        indices = propensity.parameter_indices()
        if len(set(indices)) != len(indices):
            errors.append(f"parameter indices must be distinct: {indices}")
        for k in indices:
            if not 0 <= k < n_params:
                errors.append(f"parameter index {k} out of range [0, {n_params})")
        for i in propensity.species_indices():
            if not 0 <= i < n_species:
                errors.append(f"species index {i} out of range [0, {n_species})")

        exponents = getattr(propensity, "ff_exponents", None)
        if exponents is not None:
            if len(exponents) != n_species:
                errors.append(f"ff_exponents {exponents} must have {n_species} entries")
            elif any(e < 0 for e in exponents):
                errors.append(f"ff_exponents must be nonnegative: {exponents}")
            elif len(reaction.stoich) == n_species:
                # a consumed species must appear in the falling factorial
                for i, (change, order) in enumerate(zip(reaction.stoich, exponents)):
                    if change < 0 and order < -change:
                        errors.append(
                            f"species {i} is consumed {-change}x but its factorial order is {order}"
                        )
            prefactor = getattr(propensity, "const_prefactor", 1.0)
            if not np.isfinite(prefactor) or prefactor < 0:
                errors.append(f"const_prefactor must be nonnegative, got {prefactor}")

        gate = getattr(propensity, "gate_species", None)
        if gate is not None and len(reaction.stoich) == n_species and 0 <= gate < n_species:
            if reaction.stoich[gate] < -1:
                errors.append("a Hill switch may consume at most one gate copy")
            elif reaction.stoich[gate] >= 0 and any(v < 0 for v in reaction.stoich):
                errors.append("a Hill switch may only consume its gate species")

        return len(errors) == 0, errors

    @staticmethod
    def validate_conservation(
        law: "ConservedSum", reactions: Sequence["Reaction"], n_species: int
    ) -> Tuple[bool, List[str]]:
        """
        Check that every stoichiometric vector preserves a conserved sum.

        Returns:
            Tuple of (is_valid, list_of_errors)
        """
        errors: List[str] = []

        if law.total < 0:
            errors.append(f"Conserved total must be nonnegative, got {law.total}")
        for i in law.species:
            if not 0 <= i < n_species:
                errors.append(f"Conserved species index {i} out of range")
                return False, errors

        for j, reaction in enumerate(reactions):
            if len(reaction.stoich) != n_species:
                continue
            change = sum(reaction.stoich[i] for i in law.species)
            if change != 0:
                errors.append(f"Reaction {j} changes conserved sum {law.species} by {change}")

        return len(errors) == 0, errors

    @staticmethod
    def validate_positive(name: str, value: float) -> Tuple[bool, str]:
        """
        Validate that a scalar setting is strictly positive.

        Returns:
            Tuple of (is_valid, error_message)
        """
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            return False, f"'{name}' must be numeric, got {type(value).__name__}"
        if not np.isfinite(value) or value <= 0:
            return False, f"'{name}' must be positive, got {value}"
        return True, ""
