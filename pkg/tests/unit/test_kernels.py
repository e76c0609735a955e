"""
Unit tests for the compiled simulation kernels.
"""

import numpy as np
import pytest

from parrep_sensitivity.core import kernels
from parrep_sensitivity.core.rng import SERIAL_KEY, RngStream
from parrep_sensitivity.core.ssa import SimulationKernel

# coordinate, threshold, lower, stop_on_exit, n_c, region, streak
NO_REGION = (-1, 0.0, True, False, 0, 0, 0)


def _advance(net, x, uniforms, t_end=np.inf, capacity=16):
    arrays = net.kernel_arrays
    logs = (
        np.empty((capacity, net.n_species), dtype=np.int64),
        np.empty(capacity, dtype=np.float64),
        np.empty(capacity, dtype=np.int64),
    )
    props = np.empty(net.n_reactions, dtype=np.float64)
    result = kernels.advance_path(
        x, 0.0, t_end, 0, capacity, uniforms, 0, *arrays, *NO_REGION, props, *logs
    )
    return (result, *logs)


@pytest.mark.unit
class TestSelectChannel:
    """Test cases for channel selection."""

    def test_picks_first_channel_past_target(self):
        props = np.array([1.0, 2.0, 3.0])

        assert kernels.select_channel(props, 0.5) == 0
        assert kernels.select_channel(props, 1.0) == 1
        assert kernels.select_channel(props, 5.9) == 2

    def test_skips_trailing_zero_channels(self):
        # u * total rounding up to total must not pick a channel of zero rate
        assert kernels.select_channel(np.array([1.0, 1.0, 0.0]), 2.0) == 1


@pytest.mark.unit
class TestPropensitiesInto:
    """Test cases for the compiled propensity evaluation."""

    @pytest.mark.parametrize("state", [(0,), (1,), (2,), (25,), (149,)])
    def test_matches_network_for_schlogl(self, schlogl, state):
        out = np.empty(schlogl.n_reactions)
        total = kernels.propensities_into(
            np.array(state, dtype=np.int64), *schlogl.kernel_arrays[:4], out
        )

        expected = schlogl.propensities_many(np.array([state]))[0]
        np.testing.assert_allclose(out, expected, rtol=1e-12)
        assert total == pytest.approx(expected.sum(), rel=1e-12)

    @pytest.mark.parametrize("state", [(0, 1, 0, 0), (1, 0, 7, 300), (0, 1, 3, 900)])
    def test_matches_network_for_hill_switch(self, genetic_switch, state):
        out = np.empty(genetic_switch.n_reactions)
        kernels.propensities_into(
            np.array(state, dtype=np.int64), *genetic_switch.kernel_arrays[:4], out
        )

        expected = genetic_switch.propensities_many(np.array([state]))[0]
        np.testing.assert_allclose(out, expected, rtol=1e-12, atol=1e-12)


@pytest.mark.unit
class TestAdvancePath:
    """Test cases for the compiled jump loop."""

    def test_stops_when_block_runs_out(self, schlogl):
        x = np.array([25], dtype=np.int64)
        (status, rows, clock, pos, _, _), states, taus, _ = _advance(
            schlogl, x, np.array([0.3, 0.6, 0.9])
        )

        assert status == kernels.NEED_UNIFORMS
        assert (rows, pos) == (1, 2)
        assert states[0, 0] == 25
        assert clock == taus[0] > 0.0

    def test_last_record_is_cut_at_t_end(self, schlogl):
        x = np.array([25], dtype=np.int64)
        uniforms = RngStream(5, SERIAL_KEY).take(200)
        (status, rows, clock, _, _, _), _, taus, channels = _advance(
            schlogl, x, uniforms, t_end=0.05, capacity=100
        )

        assert status == kernels.REACHED_T_END
        assert clock == 0.05
        assert channels[rows - 1] == -1
        assert taus[:rows].sum() == pytest.approx(0.05, rel=1e-12)

    def test_absorbing_state(self, pure_death):
        x = np.array([0], dtype=np.int64)
        (status, rows, _, pos, _, _), _, _, _ = _advance(pure_death, x, np.array([0.5, 0.5]))

        assert status == kernels.ABSORBING
        assert (rows, pos) == (0, 0)


@pytest.mark.unit
class TestSimulationKernel:
    """Test cases for the kernel driver."""

    def test_block_size_does_not_change_path(self, schlogl):
        logs = []
        for block in (3, 1024):
            x = np.array([25], dtype=np.int64)
            log = SimulationKernel(schlogl, log_size=64).run(
                x, RngStream(8, SERIAL_KEY, block_size=block), 0.0, 2.0, 64
            )
            logs.append((log, tuple(x)))

        (first, x_first), (second, x_second) = logs
        assert x_first == x_second
        np.testing.assert_array_equal(first.states, second.states)
        np.testing.assert_array_equal(first.channels, second.channels)
        np.testing.assert_array_equal(first.taus, second.taus)

    def test_run_consumes_two_uniforms_per_record(self, schlogl):
        rng = RngStream(2, SERIAL_KEY)
        log = SimulationKernel(schlogl, log_size=32).run(
            np.array([25], dtype=np.int64), rng, 0.0, np.inf, 32
        )

        assert log.status == kernels.LOG_FULL
        assert rng.draws == 2 * len(log.taus) == 64
