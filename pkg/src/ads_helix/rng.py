"""SplitMix64 generator used for reproducible sample points.

numpy's bit generators are not SplitMix64, and report reproducibility is keyed
on the raw 64-bit stream, so the generator is spelled out here.
"""

import numpy as np

_MASK = (1 << 64) - 1


class SplitMix64:
    """Minimal SplitMix64 stream with float helpers."""

    def __init__(self, seed=0):
        self.seed = int(seed) & _MASK
        self._state = self.seed

    def next_u64(self):
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self, size=None):
        """Uniform floats in [0, 1) built from the top 53 bits."""
        if size is None:
            return (self.next_u64() >> 11) * (1.0 / (1 << 53))
        n = int(np.prod(size))
        out = np.fromiter(((self.next_u64() >> 11) * (1.0 / (1 << 53)) for _ in range(n)), float, n)
        return out.reshape(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return low + (high - low) * self.random(size)
