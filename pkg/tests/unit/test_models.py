"""
Unit tests for reaction networks, observables, regions and the rate equation.
"""

import numpy as np
import pytest

from parrep_sensitivity.core.parser import NetworkParser, load_network
from parrep_sensitivity.exceptions import NetworkDefinitionError
from parrep_sensitivity.models import Binning, Observable, RegionMap, fixed_points_1d, get_builtin
from parrep_sensitivity.models.network import (
    MassActionProduct,
    ParameterVector,
    Reaction,
    ReactionNetwork,
    evaluate_propensities,
    propensity_gradients,
)
from parrep_sensitivity.utils.validation import NetworkValidator

from ..conftest import SCHLOGL_SEPARATRIX


def _finite_difference(net, states, k, rel_step=1e-6):
    c = net.params.values[k]
    h = rel_step * c
    up = net.with_params(net.params.with_value(k, c + h)).propensities_many(states)
    down = net.with_params(net.params.with_value(k, c - h)).propensities_many(states)
    return (up - down) / (2 * h)


def _switch_states(rng, count):
    active = rng.integers(0, 2, count)
    return np.column_stack(
        [active, 1 - active, rng.integers(0, 60, count), rng.integers(0, 1500, count)]
    ).astype(np.int64)


@pytest.mark.unit
class TestParameterVector:
    """Test cases for ParameterVector."""

    def test_rejects_nonpositive_value(self):
        with pytest.raises(NetworkDefinitionError, match="must be positive"):
            ParameterVector(("k",), (0.0,))

    def test_rejects_length_mismatch(self):
        with pytest.raises(NetworkDefinitionError):
            ParameterVector(("a", "b"), (1.0,))

    def test_with_value_leaves_original(self):
        params = ParameterVector(("a", "b"), (1.0, 2.0))
        changed = params.with_value(1, 5.0)

        assert changed.values == (1.0, 5.0)
        assert params.values == (1.0, 2.0)

    def test_index_unknown_name(self):
        with pytest.raises(KeyError):
            ParameterVector(("a",), (1.0,)).index("b")


@pytest.mark.unit
class TestSchlogl:
    """Test cases for the built-in Schlogl network."""

    def test_propensities_at_25(self, schlogl):
        props = evaluate_propensities(schlogl, (25,))

        assert props == pytest.approx([72.0, 13.248, 12.5, 73.75], rel=1e-12)

    def test_propensities_vanish_where_reactants_missing(self, schlogl):
        props = evaluate_propensities(schlogl, (0,))

        assert props[0] == 0.0
        assert props[1] == 0.0
        assert props[3] == 0.0
        assert props[2] > 0.0

    def test_gradient_matches_finite_difference(self, schlogl):
        rng = np.random.default_rng(11)
        states = rng.integers(0, 150, size=(100, 1))
        grads = schlogl.gradients_many(states)

        for k in range(schlogl.n_params):
            np.testing.assert_allclose(
                grads[:, :, k], _finite_difference(schlogl, states, k), rtol=1e-6, atol=1e-8
            )

    def test_fisher_integrand_entry_for_c3(self, schlogl):
        integrand = schlogl.fim_integrand_many(np.array([[0], [25], [140]]))

        # lambda_3 = c3 b V does not depend on the state
        assert integrand[:, 2, 2] == pytest.approx([200.0, 200.0, 200.0], rel=1e-12)

    def test_fisher_integrand_is_symmetric(self, schlogl):
        integrand = schlogl.fim_integrand_many(np.arange(0, 150).reshape(-1, 1))

        np.testing.assert_allclose(integrand, np.transpose(integrand, (0, 2, 1)))


@pytest.mark.unit
class TestGeneticSwitch:
    """Test cases for the built-in genetic switch."""

    def test_dimensions(self, genetic_switch):
        assert genetic_switch.n_species == 4
        assert genetic_switch.n_reactions == 6
        assert genetic_switch.n_params == 8
        assert genetic_switch.volume == pytest.approx(2400.0)

    def test_only_activation_fires_from_empty_inactive_state(self, genetic_switch):
        props = evaluate_propensities(genetic_switch, (0, 1, 0, 0))

        assert props[0] == pytest.approx(24.0 / 22.5)
        assert np.count_nonzero(props) == 1

    def test_hill_switch_limits(self, genetic_switch):
        props = evaluate_propensities(genetic_switch, (1, 0, 0, 10**6))

        # deactivation saturates at its minimum rate for a huge protein count
        assert props[1] == pytest.approx(24.0 / 22.5, rel=1e-3)

    def test_gradient_matches_finite_difference(self, genetic_switch):
        states = _switch_states(np.random.default_rng(5), 100)
        grads = genetic_switch.gradients_many(states)

        for k in range(genetic_switch.n_params):
            np.testing.assert_allclose(
                grads[:, :, k],
                _finite_difference(genetic_switch, states, k),
                rtol=1e-5,
                atol=1e-8,
            )

    def test_single_state_gradient_shape(self, genetic_switch):
        assert propensity_gradients(genetic_switch, (1, 0, 3, 400)).shape == (6, 8)

    def test_check_state_enforces_gate_conservation(self, genetic_switch):
        with pytest.raises(ValueError, match="conservation"):
            genetic_switch.check_state((1, 1, 0, 0))

    def test_check_state_rejects_negative(self, genetic_switch):
        with pytest.raises(ValueError, match="negative"):
            genetic_switch.check_state((0, 1, -1, 0))


@pytest.mark.unit
class TestBirthDeath:
    """Test cases for the closed birth-death chain."""

    def test_top_state_cannot_grow(self, birth_death):
        props = evaluate_propensities(birth_death, (4, 0))

        assert props[0] == 0.0
        assert props[1] == pytest.approx(4.0)

    def test_get_builtin_unknown(self):
        with pytest.raises(KeyError, match="Unknown built-in model"):
            get_builtin("lotka")


@pytest.mark.unit
class TestObservables:
    """Test cases for observables and binnings."""

    def test_species_indicator_and_constant(self):
        states = np.array([[3], [10], [30]])

        assert Observable.population("X", 0).evaluate_many(states).tolist() == [3.0, 10.0, 30.0]
        indicator = Observable("low", "indicator", species=0, high=10)
        assert indicator.evaluate_many(states).tolist() == [1.0, 1.0, 0.0]
        assert Observable.constant(value=2.5).evaluate((7,)) == 2.5

    def test_indicator_needs_a_bound(self):
        with pytest.raises(ValueError, match="needs low or high"):
            Observable("bad", "indicator", species=0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="Unknown observable kind"):
            Observable("bad", "moment")

    def test_binning_slots_keep_under_and_overflow(self):
        binning = Binning(species=0, low=10, high=19, width=5)
        slots = binning.slot_many(np.array([[0], [10], [14], [15], [19], [20]]))

        assert binning.n_bins == 2
        assert slots.tolist() == [0, 1, 1, 2, 2, 3]
        assert binning.bin_lower_edges().tolist() == [10, 15]

    def test_binning_rejects_empty_range(self):
        with pytest.raises(ValueError):
            Binning(species=0, low=5, high=4)


@pytest.mark.unit
class TestRegionMap:
    """Test cases for the two-region partition."""

    def test_lower_orientation(self, schlogl_region):
        assert schlogl_region.region_of((25,)) == 0
        assert schlogl_region.region_of((26,)) == 1
        assert schlogl_region.label(0) == "W+"

    def test_upper_orientation_swaps_regions(self):
        region_map = RegionMap(0, 10.0, "upper")
        regions = region_map.region_many(np.array([[10], [11]]))

        assert regions.tolist() == [1, 0]

    def test_batch_matches_single(self, schlogl_region):
        states = np.arange(0, 60).reshape(-1, 1)
        batch = schlogl_region.region_many(states)

        assert batch.tolist() == [schlogl_region.region_of(tuple(s)) for s in states]

    def test_rejects_equal_labels(self):
        with pytest.raises(ValueError, match="distinct labels"):
            RegionMap(0, 1.0, labels=("A", "A"))


@pytest.mark.unit
class TestRateEquation:
    """Test cases for the deterministic fixed points."""

    def test_schlogl_has_two_stable_points_and_a_separatrix(self, schlogl):
        points = fixed_points_1d(schlogl, 0.0, 6.0)

        assert [p.stable for p in points] == [True, False, True]
        assert points[0].population == pytest.approx(5.35, abs=0.1)
        assert points[1].population == pytest.approx(SCHLOGL_SEPARATRIX, rel=1e-5)
        assert points[2].population == pytest.approx(93.7, abs=0.2)

    def test_multi_species_rejected(self, genetic_switch):
        with pytest.raises(ValueError, match="one species"):
            fixed_points_1d(genetic_switch, 0.0, 1.0)


@pytest.mark.unit
class TestNetworkValidator:
    """Test cases for NetworkValidator."""

    def test_builtins_are_valid(self, schlogl, genetic_switch, birth_death):
        for net in (schlogl, genetic_switch, birth_death):
            is_valid, errors = NetworkValidator.validate_network(net)
            assert is_valid, errors

    def test_consumed_species_needs_factorial_order(self):
        reaction = Reaction((-2,), MassActionProduct((0,), (1,)))
        is_valid, errors = NetworkValidator.validate_reaction(reaction, 1, 1)

        assert not is_valid
        assert "consumed" in errors[0]

    def test_parameter_index_out_of_range(self):
        reaction = Reaction((1,), MassActionProduct((3,), (0,)))
        is_valid, errors = NetworkValidator.validate_reaction(reaction, 1, 2)

        assert not is_valid
        assert any("out of range" in e for e in errors)

    def test_invalid_network_raises(self):
        params = ParameterVector(("k",), (1.0,))
        with pytest.raises(NetworkDefinitionError, match="zero vector"):
            ReactionNetwork(
                "bad", ("X",), (Reaction((0,), MassActionProduct((0,), (0,))),), 1.0, params
            )

    def test_validate_positive(self):
        assert NetworkValidator.validate_positive("t_end", 1.0) == (True, "")
        is_valid, message = NetworkValidator.validate_positive("t_end", -1.0)
        assert not is_valid
        assert "t_end" in message


@pytest.mark.unit
class TestNetworkParser:
    """Test cases for network documents."""

    @pytest.mark.parametrize("name", ["schlogl", "genetic_switch", "birth_death"])
    def test_dump_and_parse_reproduce_network(self, name):
        net = get_builtin(name)
        parsed = NetworkParser().parse_text(NetworkParser.dump(net))

        assert parsed.to_dict() == net.to_dict()

    def test_parse_file(self, temp_dir, schlogl):
        path = temp_dir / "schlogl.yaml"
        path.write_text(NetworkParser.dump(schlogl), encoding="utf-8")

        net = load_network(str(path))

        assert net.species_names == ("S",)
        assert evaluate_propensities(net, (25,)) == pytest.approx([72.0, 13.248, 12.5, 73.75])

    def test_missing_file(self, temp_dir):
        with pytest.raises(FileNotFoundError):
            NetworkParser().parse_file(temp_dir / "missing.yaml")

    def test_missing_keys(self):
        with pytest.raises(NetworkDefinitionError, match="missing keys"):
            NetworkParser().parse_text("name: x\nspecies: [X]\n")

    def test_unknown_propensity_kind(self, schlogl):
        document = schlogl.to_dict()
        document["reactions"][0]["kind"] = "michaelis_menten"

        with pytest.raises(NetworkDefinitionError, match="Unknown propensity kind"):
            NetworkParser().parse_document(document)

    def test_not_yaml(self):
        with pytest.raises(NetworkDefinitionError, match="not a valid YAML"):
            NetworkParser().parse_text("name: [unclosed")
