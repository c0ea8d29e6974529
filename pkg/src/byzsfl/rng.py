"""Deterministic byte stream used for all protocol randomness.

SHA-256 in counter mode. Every party derives its own stream from the
experiment seed plus a role label, so removing one party never shifts
the draws of another (required for transcript-equality experiments).
"""

from __future__ import annotations

import hashlib
import math


class DeterministicRandom:
    """CSPRNG-style deterministic generator seeded from bytes."""

    def __init__(self, seed: bytes | str | int, label: str = ""):
        if isinstance(seed, int):
            seed = seed.to_bytes(max(1, (seed.bit_length() + 7) // 8), "big", signed=False)
        elif isinstance(seed, str):
            seed = seed.encode()
        self._key = hashlib.sha256(seed + b"|" + label.encode()).digest()
        self._counter = 0
        self._buffer = b""

    def derive(self, label: str) -> "DeterministicRandom":
        """Independent child stream; order of sibling use does not matter."""
        return DeterministicRandom(self._key, label)

    def next_bytes(self, n: int) -> bytes:
        while len(self._buffer) < n:
            block = hashlib.sha256(self._key + self._counter.to_bytes(8, "big")).digest()
            self._counter += 1
            self._buffer += block
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out

    def getrandbits(self, k: int) -> int:
        if k <= 0:
            return 0
        nbytes = (k + 7) // 8
        val = int.from_bytes(self.next_bytes(nbytes), "big")
        return val >> (nbytes * 8 - k)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("randbelow needs a positive bound")
        k = n.bit_length()
        while True:
            v = self.getrandbits(k)
            if v < n:
                return v

    def randrange(self, lo: int, hi: int) -> int:
        return lo + self.randbelow(hi - lo)

    def gauss(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        # Box-Muller on two uniform 53-bit draws.
        u1 = (self.getrandbits(53) + 1) / (1 << 53)
        u2 = self.getrandbits(53) / (1 << 53)
        return mu + sigma * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
