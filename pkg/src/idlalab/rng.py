"""Seeded, splittable random streams for lattice walks.

Every stochastic routine in this package draws from an xoshiro256++ stream
whose 256-bit state is derived from ``numpy.random.SeedSequence([seed,
stream_id])``.  Distinct ``stream_id`` values therefore give statistically
independent streams without any coordination, which is what lets ensembles
run in parallel while staying bit-reproducible: the stream consumed by run
``r`` depends only on ``(seed, r)``, never on scheduling.

The generator step itself lives in a tiny ``@njit`` function so that the hot
simulation kernels can inline it; it is also callable from plain Python.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

_U64 = np.uint64


@dataclass(frozen=True)
class WalkRng:
    """Identity of one random stream: ``(seed, stream_id)``.

    The same pair always yields the same step sequence.  Use a fresh
    ``stream_id`` per independent run (ensembles enumerate runs 0,1,2,...).
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if not 0 <= int(self.stream_id) < 2**64:
            raise ValueError("stream_id must fit in an unsigned 64-bit integer")

    def state(self) -> np.ndarray:
        """Fresh xoshiro256++ state (uint64[4]) for this stream."""
        ss = np.random.SeedSequence([int(self.seed), int(self.stream_id)])
        state = ss.generate_state(4, dtype=np.uint64)
        # an all-zero state would be a fixed point of the generator
        if not state.any():  # pragma: no cover - probability 2**-256
            state[0] = _U64(0x9E3779B97F4A7C15)
        return state

    def stream(self, stream_id: int) -> "WalkRng":
        """Same master seed, different stream."""
        return WalkRng(self.seed, stream_id)


@njit(cache=True, nogil=True, inline="always")
def xoshiro_next(s):
    """Advance an xoshiro256++ state in place and return 64 random bits."""
    x = s[0] + s[3]
    result = ((x << _U64(23)) | (x >> _U64(41))) + s[0]
    t = s[1] << _U64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = (s[3] << _U64(45)) | (s[3] >> _U64(19))
    return result


@njit(cache=True, nogil=True)
def direction_counts(state, nsteps, d):
    """Tally ``nsteps`` single-step draws over the 2d directions.

    Uses exactly the same rejection sampling as the walk kernels, so a
    uniformity test on these counts exercises the production path.
    """
    ndirs = 2 * d
    bbits = 1
    while (1 << bbits) < ndirs:
        bbits += 1
    bmask = _U64((1 << bbits) - 1)
    counts = np.zeros(ndirs, dtype=np.int64)
    buf = _U64(0)
    nbits = 0
    for _ in range(nsteps):
        while True:
            if nbits < bbits:
                buf = xoshiro_next(state)
                nbits = 64
            r = np.int64(buf & bmask)
            buf >>= _U64(bbits)
            nbits -= bbits
            if r < ndirs:
                break
        counts[r] += 1
    return counts
