"""
Unit tests for the truncated master equation solver.
"""

import numpy as np
import pytest

from parrep_sensitivity.core.cme import (
    StateBox,
    build_truncated_generator,
    generator_derivatives,
    stationary_fim,
    stationary_histogram,
    stationary_moments,
    stationary_sensitivity,
    stationary_solve,
    stationary_variance,
)
from parrep_sensitivity.exceptions import BoxTooSmall, Reducible
from parrep_sensitivity.models import Binning, Observable
from parrep_sensitivity.models.network import (
    MassActionProduct,
    ParameterVector,
    Reaction,
    ReactionNetwork,
)

# Stationary sensitivities of E[X] for the Schlogl network
TABLE_CME_SENSITIVITY = [4.07e2, 9.10e2, 6.30e2, -2.65e2]

MEAN_S = Observable.population("S", 0)


def _two_state_box(net):
    return StateBox([(0, 1), (0, 1)], net)


@pytest.mark.unit
class TestStateBox:
    """Test cases for box enumeration."""

    def test_conservation_filters_states(self, two_state):
        box = _two_state_box(two_state)

        assert len(box) == 2
        assert box.states.tolist() == [[0, 1], [1, 0]]

    def test_index_lookup(self, schlogl):
        box = StateBox([(0, 149)], schlogl)

        assert box.index_of((0,)) == 0
        assert box.index_of((149,)) == 149
        assert box.index_of((150,)) == -1
        assert box.index_many(np.array([[3], [200]])).tolist() == [3, -1]

    def test_require_outside_box(self, schlogl):
        box = StateBox([(0, 10)], schlogl)

        with pytest.raises(BoxTooSmall):
            box.require((11,))

    def test_invalid_ranges(self, schlogl):
        with pytest.raises(ValueError):
            StateBox([(5, 2)], schlogl)
        with pytest.raises(ValueError, match="ranges"):
            StateBox([(0, 1), (0, 1)], schlogl)

    def test_state_limit(self):
        with pytest.raises(ValueError, match="limit"):
            StateBox([(0, 999), (0, 999)], max_states=1000)


@pytest.mark.unit
class TestGenerator:
    """Test cases for the truncated generator."""

    def test_rows_sum_to_zero(self, schlogl):
        generator = build_truncated_generator(schlogl, StateBox([(0, 149)], schlogl))
        row_sums = np.asarray(generator.matrix.sum(axis=1)).ravel()

        np.testing.assert_allclose(row_sums, 0.0, atol=1e-9)

    def test_dropped_outflow_only_on_boundary(self, schlogl):
        generator = build_truncated_generator(schlogl, StateBox([(0, 149)], schlogl))

        assert np.flatnonzero(generator.dropped_outflow).tolist() == [149]

    def test_derivatives_match_finite_difference(self, two_state):
        box = _two_state_box(two_state)
        derivatives = generator_derivatives(two_state, box)
        h = 1e-6
        for k in range(two_state.n_params):
            c = two_state.params.values[k]
            up = build_truncated_generator(
                two_state.with_params(two_state.params.with_value(k, c + h)), box
            )
            down = build_truncated_generator(
                two_state.with_params(two_state.params.with_value(k, c - h)), box
            )
            expected = (up.matrix - down.matrix).toarray() / (2 * h)
            np.testing.assert_allclose(derivatives[k].toarray(), expected, atol=1e-6)


@pytest.mark.unit
class TestTwoStateChain:
    """Test cases against closed-form answers on a two-state chain."""

    @pytest.fixture(scope="class")
    def solution(self, two_state):
        return stationary_solve(build_truncated_generator(two_state, _two_state_box(two_state)))

    def test_stationary_law(self, solution):
        assert solution.pi.tolist() == pytest.approx([2.0 / 3.0, 1.0 / 3.0], rel=1e-12)
        assert solution.residual < 1e-12
        assert solution.boundary_mass == 0.0

    def test_moments(self, solution):
        assert stationary_moments(solution, MEAN_S) == pytest.approx(1.0 / 3.0)
        assert stationary_variance(solution, MEAN_S) == pytest.approx(2.0 / 9.0)

    def test_sensitivity(self, two_state, solution):
        sensitivity = stationary_sensitivity(two_state, solution.box, MEAN_S, solution)

        assert sensitivity == pytest.approx([2.0 / 9.0, -1.0 / 9.0], rel=1e-10)

    def test_sensitivity_solves_its_own_system(self, two_state):
        sensitivity = stationary_sensitivity(two_state, _two_state_box(two_state), MEAN_S)

        assert sensitivity == pytest.approx([2.0 / 9.0, -1.0 / 9.0], rel=1e-10)

    def test_fisher_information(self, two_state, solution):
        fim = stationary_fim(two_state, solution)

        np.testing.assert_allclose(fim, np.diag([2.0 / 3.0, 1.0 / 6.0]), atol=1e-12)

    def test_records(self, solution):
        states = [state for state, _ in solution.records()]

        assert states == [(0, 1), (1, 0)]


@pytest.mark.unit
class TestSchloglStationary:
    """Test cases on the bistable Schlogl network."""

    def test_residual_and_boundary_mass(self, schlogl_solution):
        assert schlogl_solution.residual <= 1e-10
        assert abs(schlogl_solution.pi.sum() - 1.0) < 1e-12
        assert schlogl_solution.boundary_mass < 1e-6

    def test_bimodal(self, schlogl_solution):
        pi = schlogl_solution.pi
        peaks = [x for x in range(1, 149) if pi[x] > pi[x - 1] and pi[x] > pi[x + 1]]

        assert len(peaks) == 2
        assert peaks[0] < 26 < peaks[1]

    def test_histogram_covers_all_mass(self, schlogl_solution):
        histogram = stationary_histogram(schlogl_solution, Binning(0, 0, 149, width=10))

        assert histogram.sum() == pytest.approx(1.0)
        assert histogram[0] == 0.0
        assert histogram[-1] == 0.0

    def test_sensitivity_matches_finite_difference(self, schlogl, schlogl_solution):
        box = schlogl_solution.box
        sensitivity = stationary_sensitivity(schlogl, box, MEAN_S, schlogl_solution)
        for k in range(schlogl.n_params):
            c = schlogl.params.values[k]
            h = 1e-5 * c
            means = []
            for value in (c + h, c - h):
                net = schlogl.with_params(schlogl.params.with_value(k, value))
                solution = stationary_solve(build_truncated_generator(net, box))
                means.append(stationary_moments(solution, MEAN_S))
            assert sensitivity[k] == pytest.approx((means[0] - means[1]) / (2 * h), rel=1e-4)

    def test_rate_scaling_leaves_mean_unchanged(self, schlogl, schlogl_solution):
        # every propensity is linear in exactly one c_k, so sum_k c_k dE/dc_k = 0
        sensitivity = stationary_sensitivity(
            schlogl, schlogl_solution.box, MEAN_S, schlogl_solution
        )

        assert float(np.dot(schlogl.param_array, sensitivity)) == pytest.approx(0.0, abs=1e-6)

    def test_sensitivity_against_published_values(self, schlogl, schlogl_solution):
        sensitivity = stationary_sensitivity(
            schlogl, schlogl_solution.box, MEAN_S, schlogl_solution
        )

        for k in (0, 2, 3):
            assert sensitivity[k] == pytest.approx(TABLE_CME_SENSITIVITY[k], rel=0.01)

    def test_c2_sensitivity_follows_scaling_identity(self, schlogl, schlogl_solution):
        sensitivity = stationary_sensitivity(
            schlogl, schlogl_solution.box, MEAN_S, schlogl_solution
        )
        c = schlogl.param_array

        # the published c2 entry has the opposite sign
        implied = -(c[0] * sensitivity[0] + c[2] * sensitivity[2] + c[3] * sensitivity[3]) / c[1]
        assert sensitivity[1] < 0
        assert sensitivity[1] == pytest.approx(implied, rel=1e-6)
        assert sensitivity[1] == pytest.approx(-998.1, rel=1e-3)
        assert abs(sensitivity[1]) == pytest.approx(TABLE_CME_SENSITIVITY[1], rel=0.1)

    def test_fim_c3_entry(self, schlogl, schlogl_solution):
        assert stationary_fim(schlogl, schlogl_solution)[2, 2] == pytest.approx(200.0, rel=1e-9)


@pytest.mark.unit
class TestReducibility:
    """Test cases for chains with several closed classes."""

    def test_two_closed_classes(self):
        params = ParameterVector(("d",), (1.0,))
        net = ReactionNetwork(
            "decay_with_spectator",
            ("X", "Y"),
            (Reaction((-1, 0), MassActionProduct((0,), (1, 0))),),
            1.0,
            params,
        )
        generator = build_truncated_generator(net, StateBox([(0, 2), (0, 1)], net))

        with pytest.raises(Reducible, match="2 closed"):
            stationary_solve(generator)

    def test_single_absorbing_class_is_solvable(self, pure_death):
        box = StateBox([(0, 3)], pure_death)
        solution = stationary_solve(build_truncated_generator(pure_death, box))

        assert solution.pi.tolist() == pytest.approx([1.0, 0.0, 0.0, 0.0], abs=1e-12)
