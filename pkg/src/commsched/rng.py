"""Version-pinned random stream.

Only the raw 64-bit output of numpy's PCG64 bit generator is used; its
stream is fixed by the algorithm, unlike ``Generator`` methods whose
sampling code may change between numpy releases. Bounded draws and
shuffles are done here so results never depend on the numpy version.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


class StableRng:
    def __init__(self, seed):
        seed = int(seed)
        if seed < 0 or seed > _MASK64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
        self._bits = np.random.PCG64(seed)

    def raw(self):
        return int(self._bits.random_raw())

    def below(self, n):
        """Uniform integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        if n == 1:
            return 0
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.raw()
            if x < limit:
                return x % n

    def random(self):
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.raw() >> 11) * (1.0 / (1 << 53))

    def randint(self, lo, hi):
        """Uniform integer in [lo, hi] inclusive."""
        return lo + self.below(hi - lo + 1)

    def choice(self, seq):
        return seq[self.below(len(seq))]

    def shuffle(self, items):
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items


def derive_seed(*parts):
    """Mix integers into a single 64-bit seed (splitmix64 finaliser)."""
    h = 0x9E3779B97F4A7C15
    for p in parts:
        h = (h ^ (int(p) & _MASK64)) & _MASK64
        h = (h + 0x9E3779B97F4A7C15) & _MASK64
        z = h
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        h = z ^ (z >> 31)
    return h
