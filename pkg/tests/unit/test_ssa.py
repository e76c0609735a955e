"""
Unit tests for random streams and the direct-method simulator.
"""

import math

import numpy as np
import pytest
from scipy import stats

from parrep_sensitivity.core.rng import (
    SERIAL_KEY,
    Phase,
    Purpose,
    RngStream,
    StreamKey,
    derive_seed,
)
from parrep_sensitivity.core.ssa import (
    SimulationKernel,
    TrajectoryAccumulator,
    draw_jump,
    embedded_step,
    new_accumulator,
    run_ssa,
)
from parrep_sensitivity.exceptions import AbsorbingState
from parrep_sensitivity.models import Binning, Observable


@pytest.mark.unit
class TestRngStream:
    """Test cases for keyed random streams."""

    def test_same_key_same_sequence(self):
        a = RngStream(42, SERIAL_KEY)
        b = RngStream(42, SERIAL_KEY)

        assert [a.uniform() for _ in range(10)] == [b.uniform() for _ in range(10)]

    def test_keys_give_different_streams(self):
        serial = RngStream(42, SERIAL_KEY).take(8)
        replica = RngStream(42, StreamKey(1, Phase.SERIAL, 0, Purpose.JUMPS)).take(8)
        resample = RngStream(42, StreamKey(0, Phase.SERIAL, 0, Purpose.RESAMPLE)).take(8)

        assert not np.array_equal(serial, replica)
        assert not np.array_equal(serial, resample)

    def test_block_size_does_not_change_values(self):
        small = RngStream(3, SERIAL_KEY, block_size=7)
        large = RngStream(3, SERIAL_KEY)

        np.testing.assert_array_equal(small.take(50), large.take(50))

    def test_take_and_uniform_share_position(self):
        a = RngStream(9, SERIAL_KEY, block_size=4)
        b = RngStream(9, SERIAL_KEY, block_size=4)
        first = [a.uniform() for _ in range(3)] + a.take(6).tolist()

        assert first == b.take(9).tolist()
        assert a.draws == 9

    def test_reserve_then_consume(self):
        stream = RngStream(6, SERIAL_KEY, block_size=4)
        block, pos = stream.reserve(10)

        assert len(block) - pos >= 10
        stream.consume(pos + 10)
        assert stream.draws == 10
        np.testing.assert_array_equal(block[pos : pos + 10], RngStream(6, SERIAL_KEY).take(10))

    def test_reserve_keeps_unread_uniforms(self):
        stream = RngStream(6, SERIAL_KEY, block_size=4)
        first = stream.take(3)
        block, pos = stream.reserve(5)
        stream.consume(pos + 5)

        expected = RngStream(6, SERIAL_KEY).take(8)
        np.testing.assert_array_equal(np.concatenate((first, block[pos : pos + 5])), expected)

    def test_consume_rejects_moving_backwards(self):
        stream = RngStream(6, SERIAL_KEY)
        _, pos = stream.reserve(2)
        stream.consume(pos + 2)

        with pytest.raises(ValueError, match="Read position"):
            stream.consume(pos)

    def test_index_in_range(self):
        stream = RngStream(1, SERIAL_KEY)

        assert all(0 <= stream.index(5) < 5 for _ in range(200))

    def test_negative_seed_rejected(self):
        with pytest.raises(ValueError):
            RngStream(-1, SERIAL_KEY)

    def test_derive_seed_is_deterministic_and_distinct(self):
        seeds = [derive_seed(2024, i) for i in range(50)]

        assert seeds == [derive_seed(2024, i) for i in range(50)]
        assert len(set(seeds)) == 50
        assert all(0 <= s < 2**64 for s in seeds)


@pytest.mark.unit
class TestDrawJump:
    """Test cases for the single-state jump law."""

    def test_holding_times_are_exponential(self, schlogl):
        rng = RngStream(17, SERIAL_KEY)
        draws = [draw_jump(schlogl, (25,), rng) for _ in range(4000)]
        taus = np.array([tau for tau, _ in draws])

        total = 72.0 + 13.248 + 12.5 + 73.75
        assert stats.kstest(taus, stats.expon(scale=1.0 / total).cdf).pvalue > 0.001

    def test_channel_frequencies(self, schlogl):
        rng = RngStream(18, SERIAL_KEY)
        channels = [draw_jump(schlogl, (25,), rng)[1] for _ in range(4000)]
        observed = np.bincount(channels, minlength=4)

        props = np.array([72.0, 13.248, 12.5, 73.75])
        expected = 4000 * props / props.sum()
        assert stats.chisquare(observed, expected).pvalue > 0.001

    def test_two_uniforms_per_draw(self, schlogl):
        rng = RngStream(1, SERIAL_KEY)
        draw_jump(schlogl, (25,), rng)

        assert rng.draws == 2

    def test_single_active_channel(self, genetic_switch):
        rng = RngStream(2, SERIAL_KEY)

        assert {draw_jump(genetic_switch, (0, 1, 0, 0), rng)[1] for _ in range(50)} == {0}
        assert embedded_step(genetic_switch, (0, 1, 0, 0), rng) == 0

    def test_absorbing_state(self, pure_death):
        with pytest.raises(AbsorbingState):
            draw_jump(pure_death, (0,), RngStream(0, SERIAL_KEY))


@pytest.mark.unit
class TestRunSsa:
    """Test cases for whole trajectories."""

    def test_clock_lands_on_t_end(self, schlogl):
        acc = run_ssa(schlogl, (25,), 37.5, seed=4)

        assert acc.clock == 37.5
        assert math.fsum(acc.occupancy.values()) == pytest.approx(37.5, rel=1e-12)

    def test_jump_bookkeeping(self, schlogl):
        acc = run_ssa(schlogl, (25,), 20.0, seed=5)

        assert sum(acc.jump_counts) == acc.n_jumps
        assert acc.n_jumps > 0
        assert all(x[0] >= 0 for x in acc.occupancy)

    def test_same_seed_same_trajectory(self, genetic_switch):
        a = run_ssa(genetic_switch, (0, 1, 0, 0), 0.5, seed=11)
        b = run_ssa(genetic_switch, (0, 1, 0, 0), 0.5, seed=11)

        assert a.occupancy == b.occupancy
        assert a.state == b.state

    def test_different_seed_different_trajectory(self, schlogl):
        a = run_ssa(schlogl, (25,), 10.0, seed=1)
        b = run_ssa(schlogl, (25,), 10.0, seed=2)

        assert a.occupancy != b.occupancy

    def test_observable_integrals(self, schlogl):
        one = Observable.constant()
        observables = (one, Observable.population("X", 0))
        acc = run_ssa(schlogl, (25,), 12.0, observables=observables, seed=3)

        assert acc.integrals[0] == pytest.approx(12.0, rel=1e-12)
        assert acc.averages[1] >= 0.0

    def test_histogram_mass_equals_clock(self, schlogl):
        acc = run_ssa(schlogl, (25,), 30.0, binning=Binning(0, 0, 49), seed=6)

        assert acc.histogram.sum() == pytest.approx(30.0, rel=1e-12)
        assert len(acc.histogram_pairs()) == 52

    def test_path_recording(self, schlogl):
        acc = run_ssa(schlogl, (25,), 5.0, seed=7, path_stride=10)

        assert acc.path[0] == (0.0, (25,))
        assert len(acc.path) == 1 + acc.n_jumps // 10

    def test_rejects_nonpositive_t_end(self, schlogl):
        with pytest.raises(ValueError, match="t_end"):
            run_ssa(schlogl, (25,), 0.0)

    def test_rejects_invalid_state(self, birth_death):
        with pytest.raises(ValueError):
            run_ssa(birth_death, (2, 1), 1.0)

    def test_absorbing_state_carries_partial(self, pure_death):
        with pytest.raises(AbsorbingState) as info:
            run_ssa(pure_death, (3,), 1.0e6, seed=1)

        partial = info.value.partial
        assert partial.state == (0,)
        assert partial.n_jumps == 3
        assert partial.clock < 1.0e6

    def test_pure_death_mean_extinction_time(self, pure_death):
        # from 5 molecules at unit rate: 1 + 1/2 + 1/3 + 1/4 + 1/5
        kernel = SimulationKernel(pure_death)
        times = []
        for seed in range(4000):
            with pytest.raises(AbsorbingState) as info:
                run_ssa(pure_death, (5,), 1.0e6, seed=seed, kernel=kernel)
            times.append(info.value.partial.clock)

        assert np.mean(times) == pytest.approx(2.2833, abs=0.06)


@pytest.mark.unit
class TestTrajectoryAccumulator:
    """Test cases for accumulator merging."""

    def _piece(self, schlogl, seed, t_end):
        observables = (Observable.population("X", 0),)
        return run_ssa(schlogl, (25,), t_end, observables=observables, seed=seed)

    def test_merge_adds_time_and_jumps(self, schlogl):
        first = self._piece(schlogl, 1, 5.0)
        second = self._piece(schlogl, 2, 7.0)
        expected_integral = first.integrals[0] + second.integrals[0]
        expected_jumps = first.n_jumps + second.n_jumps

        first.merge(second)

        assert first.clock == pytest.approx(12.0)
        assert first.n_jumps == expected_jumps
        assert first.integrals[0] == pytest.approx(expected_integral, rel=1e-12)
        assert first.state == second.state

    def test_merge_is_associative(self, schlogl):
        pieces = [self._piece(schlogl, s, 3.0) for s in (1, 2, 3)]

        left = new_accumulator(schlogl, (25,), pieces[0].observables)
        left.merge(pieces[0])
        left.merge(pieces[1])
        left.merge(pieces[2])

        tail = new_accumulator(schlogl, (25,), pieces[0].observables)
        tail.merge(pieces[1])
        tail.merge(pieces[2])
        right = new_accumulator(schlogl, (25,), pieces[0].observables)
        right.merge(pieces[0])
        right.merge(tail)

        assert left.occupancy.keys() == right.occupancy.keys()
        assert left.integrals == pytest.approx(right.integrals, rel=1e-12)
        assert left.jump_counts == right.jump_counts

    def test_empty_averages_are_nan(self):
        acc = TrajectoryAccumulator(n_reactions=1, observables=(Observable.constant(),), state=(0,))

        assert np.isnan(acc.averages[0])

    def test_report(self, schlogl):
        report = self._piece(schlogl, 4, 2.0).to_report()

        assert report["clock"] == 2.0
        assert set(report["integrals"]) == {"X"}
