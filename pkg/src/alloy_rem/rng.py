"""Counter-based random streams.

A stream is an immutable ``(seed, stream_id, counter)`` triple. Word ``k`` of
the stream is ``splitmix64(key + k * golden)`` where ``key`` is derived from
``(seed, stream_id)``; nothing is carried between draws, so any range of a
stream can be regenerated independently and in any order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0
    counter: int = 0

    def __post_init__(self):
        if self.counter < 0:
            raise ValueError("counter must be nonnegative")

    @property
    def key(self) -> np.uint64:
        return np.uint64(_kernels.derive_key(self.seed, self.stream_id))

    def advance(self, k: int) -> RngStream:
        return replace(self, counter=self.counter + k)

    def substream(self, stream_id: int) -> RngStream:
        """Independent stream for the same seed."""
        return RngStream(self.seed, stream_id)

    def words(self, size: int) -> np.ndarray:
        out = np.empty(size, dtype=np.uint64)
        _kernels.fill_words(self.key, self.counter, out)
        return out

    def uniforms(self, size: int) -> np.ndarray:
        """Uniform(0, 1) draws (open interval) at counters ``counter ...``."""
        out = np.empty(size, dtype=np.float64)
        _kernels.fill_uniforms(self.key, self.counter, out)
        return out

    def normals(self, size: int, with_branch: bool = False):
        """Standard normal draws at normal-indices ``counter ...``.

        Normals come in Box-Muller pairs, pair ``p`` covering indices
        ``2p, 2p + 1``. With ``with_branch`` the mixture-branch bit that the
        partition-function engine uses for each index is returned as well.
        """
        lo = self.counter - (self.counter % 2)
        total = self.counter - lo + size
        total += total % 2
        z = np.empty(total, dtype=np.float64)
        comp = np.empty(total, dtype=np.int64)
        _kernels.fill_normals(self.key, lo // 2, z, comp)
        off = self.counter - lo
        z = z[off:off + size]
        if with_branch:
            return z, comp[off:off + size]
        return z
