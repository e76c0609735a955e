"""
Reproducible random streams keyed by structured stream keys.

Every stream is a Philox counter-based generator seeded through
``numpy.random.SeedSequence`` with the run seed as entropy and the stream
key as spawn key. Uniforms are drawn in numpy blocks that compiled kernels
read directly; the sequence a stream yields never depends on how it is
consumed, on the number of worker threads or on the platform.
"""

from enum import IntEnum
from typing import NamedTuple, Tuple

import numpy as np

from ..config.settings import DEFAULT_SETTINGS
from ..models.network import FloatArray


class Phase(IntEnum):
    SERIAL = 0
    DEPHASE = 1
    PARALLEL = 2


class Purpose(IntEnum):
    JUMPS = 0
    RESAMPLE = 1


class StreamKey(NamedTuple):
    """(replica id, phase tag, cycle index, purpose tag)."""

    replica: int
    phase: Phase
    cycle: int
    purpose: Purpose


SERIAL_KEY = StreamKey(0, Phase.SERIAL, 0, Purpose.JUMPS)


def derive_seed(seed: int, trajectory: int) -> int:
    """
    Derive the 64-bit seed of one trajectory from the run seed.

    Args:
        seed: Run seed
        trajectory: Trajectory index

    Returns:
        Independent 64-bit seed for the trajectory
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trajectory),))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


class RngStream:
    """
    Buffered uniform stream for one (seed, key) pair.

    Attributes:
        seed: 64-bit seed
        key: Structured stream key
        draws: Number of uniforms consumed so far
    """

    def __init__(self, seed: int, key: StreamKey, block_size: int = 0) -> None:
        if seed < 0:
            raise ValueError(f"Seed must be nonnegative, got {seed}")
        self.seed = int(seed)
        self.key = key
        self.draws = 0
        self._block_size = block_size or DEFAULT_SETTINGS.RNG_BLOCK_SIZE
        sequence = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(key.replica, int(key.phase), key.cycle, int(key.purpose))
        )
        self._generator = np.random.Generator(np.random.Philox(sequence))
        self._buffer: FloatArray = np.empty(0, dtype=np.float64)
        self._pos = 0

    def reserve(self, count: int) -> Tuple[FloatArray, int]:
        """
        Make at least ``count`` unread uniforms available.

        Returns:
            (block, read position); hand the advanced position back with
            ``consume``
        """
        available = len(self._buffer) - self._pos
        if available < count:
            fresh = self._generator.random(max(self._block_size, count - available))
            self._buffer = np.concatenate((self._buffer[self._pos :], fresh))
            self._pos = 0
        return self._buffer, self._pos

    def consume(self, pos: int) -> None:
        """Move the read position of the current block to ``pos``."""
        if not self._pos <= pos <= len(self._buffer):
            raise ValueError(f"Read position {pos} outside [{self._pos}, {len(self._buffer)}]")
        self.draws += pos - self._pos
        self._pos = pos

    def uniform(self) -> float:
        """Next uniform in [0, 1)."""
        buffer, pos = self.reserve(1)
        self.consume(pos + 1)
        return float(buffer[pos])

    def take(self, count: int) -> FloatArray:
        """Next ``count`` uniforms as an array."""
        buffer, pos = self.reserve(count)
        self.consume(pos + count)
        return buffer[pos : pos + count].copy()

    def index(self, n: int) -> int:
        """Uniform integer in [0, n) from one draw."""
        return min(int(self.uniform() * n), n - 1)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, key={tuple(self.key)}, draws={self.draws})"
