"""Deterministic random number generation.

Everything stochastic in this package flows through one generator: a
xorshift128 recurrence over two 64-bit words.  The update uses only xor
and shift operations, so it produces the identical bit stream whether it
runs as interpreted numpy scalar code or inside a numba kernel, on any
platform with 64-bit integers.  Seeding and seed derivation use the
splitmix64 finalizer on plain Python integers (masked to 64 bits), which
keeps them outside the hot path and immune to integer overflow concerns.

Derived quantities are built on the raw stream in documented ways:

* uniform doubles take the top 53 bits, ``(x >> 11) * 2**-53``;
* bounded integers use rejection sampling, so every residue is exactly
  equally likely;
* Gaussians use the cosine branch of the Box-Muller transform, consuming
  exactly two raw draws each (``u1`` is shifted into ``(0, 1]`` so the
  logarithm never sees zero; the sine companion is discarded to keep the
  draw count fixed);
* subsets come from a partial Fisher-Yates shuffle, consuming one bounded
  integer per selected element, and are returned sorted.
"""

from __future__ import annotations

import math

import numpy as np

from ._backend import maybe_njit

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_TWO_PI = 2.0 * math.pi


def _mix64(x: int) -> int:
    """splitmix64 finalizer on a plain Python integer."""
    x &= MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & MASK64
    x ^= x >> 31
    return x


def seed_state(seed: int) -> np.ndarray:
    """Expand a 64-bit seed into the two-word xorshift128 state."""
    s = int(seed) & MASK64
    s0 = _mix64((s + _GOLDEN) & MASK64)
    s1 = _mix64((s + 2 * _GOLDEN) & MASK64)
    if s0 == 0 and s1 == 0:
        s1 = _GOLDEN
    return np.array([s0, s1], dtype=np.uint64)


def derive_seed(master: int, *parts: int) -> int:
    """Derive a child seed from a master seed and an index path.

    The derivation is order sensitive: ``derive_seed(m, a, b)`` and
    ``derive_seed(m, b, a)`` differ.  Used to hand every run of a study
    its own independent stream.
    """
    h = _mix64(int(master) & MASK64)
    for part in parts:
        h = _mix64(h ^ _mix64((int(part) + _GOLDEN) & MASK64))
    return h


@maybe_njit
def _next_u64(state):
    s1 = state[0]
    s0 = state[1]
    state[0] = s0
    s1 ^= s1 << np.uint64(23)
    s1 ^= s1 >> np.uint64(17)
    s1 ^= s0
    s1 ^= s0 >> np.uint64(26)
    state[1] = s1
    return s1


@maybe_njit
def _next_double(state):
    return (_next_u64(state) >> np.uint64(11)) * 2.0**-53


@maybe_njit
def _rand_below(state, n):
    """Uniform integer in [0, n) by rejection, free of modulo bias."""
    un = np.uint64(n)
    threshold = (~(un - np.uint64(1))) % un
    while True:
        x = _next_u64(state)
        if x >= threshold:
            return np.int64(x % un)


@maybe_njit
def _sample_indices(state, n, s):
    """Partial Fisher-Yates draw of ``s`` distinct values from [0, n),
    returned sorted."""
    pool = np.arange(n)
    for t in range(s):
        j = t + _rand_below(state, n - t)
        tmp = pool[t]
        pool[t] = pool[j]
        pool[j] = tmp
    sel = pool[:s].copy()
    sel.sort()
    return sel


@maybe_njit
def _fill_gaussian(state, out):
    for i in range(out.shape[0]):
        u1 = ((_next_u64(state) >> np.uint64(11)) + np.uint64(1)) * 2.0**-53
        u2 = (_next_u64(state) >> np.uint64(11)) * 2.0**-53
        out[i] = math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)


class SeededRng:
    """Deterministic random source; one instance per independent stream.

    Identical seeds yield bit-identical draw sequences regardless of
    backend or platform.  Streams for different purposes should come from
    :func:`derive_seed`, never from sharing an instance.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self._state = seed_state(self.seed)

    def state_words(self) -> tuple[int, int]:
        return int(self._state[0]), int(self._state[1])

    def next_uint64(self) -> int:
        return int(_next_u64(self._state))

    def uniform(self) -> float:
        """Double in [0, 1)."""
        return float(_next_double(self._state))

    def randbelow(self, n: int) -> int:
        if n < 1:
            raise ValueError(f"randbelow needs n >= 1, got {n}")
        return int(_rand_below(self._state, n))

    def gaussian(self) -> float:
        out = np.empty(1, dtype=np.float64)
        _fill_gaussian(self._state, out)
        return float(out[0])

    def gaussian_vector(self, size: int) -> np.ndarray:
        if size < 0:
            raise ValueError(f"size must be nonnegative, got {size}")
        out = np.empty(size, dtype=np.float64)
        _fill_gaussian(self._state, out)
        return out


def sample_subset(n: int, s: int, rng: SeededRng) -> np.ndarray:
    """Uniformly random subset of ``s`` distinct indices from [0, n).

    Every size-``s`` subset has probability ``1 / C(n, s)``.  The result
    is sorted ascending, dtype int64.  ``s = 0`` gives an empty array and
    ``s = n`` the full range.
    """
    if n < 1:
        raise ValueError(f"population size must be >= 1, got {n}")
    if not 0 <= s <= n:
        raise ValueError(f"subset size {s} not in [0, {n}]")
    return _sample_indices(rng._state, n, s)
