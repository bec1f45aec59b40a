"""Splittable counter-based pseudo-random numbers.

Each stream is keyed by (seed, label) and draws values by hashing a counter,
so adding a new stream never perturbs the draws of existing ones and results
are stable across platforms and Python versions.
"""

from __future__ import annotations

import hashlib


class CounterRng:
    def __init__(self, seed: int, label: str = ""):
        self.seed = seed
        self.label = label
        self.counter = 0

    def _next(self) -> int:
        payload = f"{self.seed}|{self.label}|{self.counter}".encode()
        self.counter += 1
        digest = hashlib.sha256(payload).digest()
        return int.from_bytes(digest[:8], "big")

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], inclusive."""
        if hi < lo:
            raise ValueError("empty range")
        span = hi - lo + 1
        # rejection sampling keeps the draw unbiased
        limit = (2**64 // span) * span
        while True:
            value = self._next()
            if value < limit:
                return lo + value % span

    def choice(self, seq):
        return seq[self.randint(0, len(seq) - 1)]

    def sample(self, seq, k: int) -> list:
        """k distinct elements, order of first draw."""
        if k > len(seq):
            raise ValueError("sample larger than population")
        pool = list(seq)
        out = []
        for _ in range(k):
            out.append(pool.pop(self.randint(0, len(pool) - 1)))
        return out
