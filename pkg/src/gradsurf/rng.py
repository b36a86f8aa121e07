"""Deterministic, platform-independent random streams.

Every random draw in this package comes from a :class:`Stream`: a
xoshiro256** generator whose 256-bit state is expanded from a 64-bit key
with the splitmix64 finalizer.  Keys are derived by absorbing a text label
into a parent key one byte at a time, so any (seed, label) pair names the
same stream on every platform and in any execution order.  The platform
default generators are never used.

Algorithm summary (all arithmetic mod 2**64):

* ``mix64(z)``: the splitmix64 finalizer
  ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
  z *= 0x94D049BB133111EB; z ^= z >> 31``.
* key derivation: ``k = mix64(seed + GOLDEN)`` then, for each UTF-8 byte
  ``b`` of the label, ``k = mix64(k ^ b)``.
* state expansion: ``s[i] = mix64(key + (i + 1) * GOLDEN)``.
* output: standard xoshiro256**; uniform doubles take the top 53 bits.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """Finalizing 64-bit avalanche function (splitmix64)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_key(seed: int, label: str) -> int:
    """Absorb a label into a 64-bit seed, returning a stream key."""
    if not 0 <= seed <= _MASK:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    k = mix64((seed + _GOLDEN) & _MASK)
    for b in label.encode("utf-8"):
        k = mix64(k ^ b)
    return k


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


class Stream:
    """xoshiro256** generator addressed by a 64-bit key."""

    def __init__(self, key: int):
        if not 0 <= key <= _MASK:
            raise ValueError(f"key must be a 64-bit unsigned integer, got {key}")
        self.key = key
        s = [mix64((key + (i + 1) * _GOLDEN) & _MASK) for i in range(4)]
        if not any(s):
            # all-zero state is the one fixed point of xoshiro; unreachable
            # in practice but guarded anyway
            s[0] = _GOLDEN
        self._s = s

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK, 7) * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), bias-free via rejection."""
        if n <= 0:
            raise ValueError(f"n must be positive, got {n}")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def choose(self, n: int, k: int) -> list[int]:
        """k distinct integers from range(n), in draw order.

        Partial Fisher-Yates over an index pool; O(n) memory, O(k) draws.
        """
        if not 0 <= k <= n:
            raise ValueError(f"cannot choose {k} items from {n}")
        pool = list(range(n))
        for i in range(k):
            j = i + self.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def derive(self, label: str) -> "Stream":
        """Child stream addressed by this stream's key plus a label."""
        return Stream(derive_key(self.key, label))


def derive_stream(seed: int, label: str) -> Stream:
    """Stream for a (seed, label) pair; the root of all experiment draws."""
    return Stream(derive_key(seed, label))
