"""Tiny counter-free PRNG usable inside numba kernels.

splitmix64 for seeding independent streams, xorshift64* for draws. Kept
here rather than using numba's global ``np.random`` state so that every walk
owns a stream derived from ``(seed, node, walk)`` and results do not depend
on execution order.
"""
import numba
import numpy as np

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)


@numba.njit(cache=True, inline="always")
def splitmix64(x):
    x = (x + np.uint64(0x9E3779B97F4A7C15)) & _MASK
    z = x
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _MASK
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _MASK
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True, inline="always")
def stream_state(seed, a, b):
    s = splitmix64(np.uint64(seed))
    s = splitmix64(s ^ np.uint64(a))
    s = splitmix64(s ^ np.uint64(b))
    if s == np.uint64(0):
        s = np.uint64(0x2545F4914F6CDD1D)
    return s


@numba.njit(cache=True, inline="always")
def next_u64(state):
    """Advance a one-element uint64 state array and return a draw."""
    x = state[0]
    x ^= x >> np.uint64(12)
    x ^= (x << np.uint64(25)) & _MASK
    x ^= x >> np.uint64(27)
    state[0] = x
    return (x * np.uint64(0x2545F4914F6CDD1D)) & _MASK


@numba.njit(cache=True, inline="always")
def next_float(state):
    """Uniform double in [0, 1)."""
    return (next_u64(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@numba.njit(cache=True, inline="always")
def next_below(state, n):
    """Uniform integer in [0, n)."""
    return np.int64(next_float(state) * n)
