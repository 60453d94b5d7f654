"""Reproducible random streams.

Every random object in the package is driven by a 64-bit seed.  Replicate
streams are derived by hashing a tuple of integers (base seed, grid index,
replicate index, ...) into 128 bits, so streams do not depend on the order
in which replicates are scheduled.

Two generator families are used:

* ``numpy.random.Generator`` over ``Philox`` (counter-based) for graph
  sampling, mark streams and bootstrap resampling;
* SplitMix64, a counter-based 64-bit mixer, inside numba kernels where a
  numpy Generator cannot be passed.
"""
import hashlib

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1


def derive_key(*parts):
    """Hash a tuple of non-negative integers into a 128-bit integer key."""
    h = hashlib.blake2b(digest_size=16, person=b"metastable-epi")
    for p in parts:
        p = int(p)
        if p < 0:
            raise ValueError("seed components must be non-negative")
        h.update(p.to_bytes(16, "little"))
    return int.from_bytes(h.digest(), "little")


def generator(*parts):
    """Return a Philox-backed ``numpy.random.Generator`` keyed by ``parts``."""
    return np.random.Generator(np.random.Philox(key=derive_key(*parts)))


def kernel_seed(*parts):
    """64-bit SplitMix64 starting state for the numba kernels."""
    return np.uint64(derive_key(*parts) & MASK64)


@njit(cache=True, inline="always")
def splitmix_next(state):
    """Advance a SplitMix64 counter; return ``(new_state, output)``."""
    state = state + np.uint64(0x9E3779B97F4A7C15)
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True, inline="always")
def uniform_open(state):
    """Uniform double in (0, 1) from the top 53 bits."""
    state, z = splitmix_next(state)
    u = (np.float64(z >> np.uint64(11)) + 0.5) * (1.0 / 9007199254740992.0)
    return state, u
