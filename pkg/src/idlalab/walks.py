"""Simple random walks on Z^d with exit- and hitting-time stopping rules.

Conventions, fixed once for the whole package:

* step t goes to one of the 2d neighbors, uniformly; direction index k
  means axis k>>1, minus if k is even, plus if k is odd (same order as
  ``lattice.neighbors``);
* a "visit to y" is any time t with S(t) = y and t <= stopping time, the
  position at the stopping time included.  For targets strictly inside an
  exit region the stopped position can never be the target, so this count
  agrees with the usual visits-before-exit count;
* the hitting time of the start site is 0.

``walk_until_exit_set`` is the pure-Python reference implementation for an
arbitrary membership predicate.  Ball-domain walks and all the Monte Carlo
ensembles run in numba kernels that consume the random stream in exactly
the same order, so kernel and reference walks with equal ``(seed,
stream_id)`` coincide bit for bit (tested).
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .lattice import norm_sq, radius_sq_int
from .rng import WalkRng, xoshiro_next

_U64 = np.uint64

DEFAULT_STEP_BUDGET = 10**10


class StepBudgetExceeded(RuntimeError):
    """A walk ran longer than its step budget (usually a predicate bug)."""


@dataclass
class WalkOutcome:
    path_length: int
    exit_site: tuple
    visits: dict | None = None
    path: list | None = None


def _direction_bits(d):
    ndirs = 2 * d
    bbits = 1
    while (1 << bbits) < ndirs:
        bbits += 1
    return ndirs, bbits, (1 << bbits) - 1


@njit(cache=True, nogil=True, inline="always")
def _draw_dir(state, buf, nbits, ndirs, bbits, bmask):
    while True:
        if nbits < bbits:
            buf = xoshiro_next(state)
            nbits = 64
        r = np.int64(buf & bmask)
        buf >>= _U64(bbits)
        nbits -= bbits
        if r < ndirs:
            return r, buf, nbits


@njit(cache=True, nogil=True)
def _ball_walk(state, pos, r2, tracked, visits, budget):
    """Walk until |pos|^2 > r2, tallying visits to the tracked sites.

    Mutates ``pos`` and ``visits``; returns (path_length, status) where
    status 1 means the step budget ran out.
    """
    d = pos.shape[0]
    ndirs = 2 * d
    bbits = 1
    while (1 << bbits) < ndirs:
        bbits += 1
    bmask = _U64((1 << bbits) - 1)
    buf = _U64(0)
    nbits = 0
    t = np.int64(0)
    while True:
        for m in range(tracked.shape[0]):
            hit = True
            for i in range(d):
                if pos[i] != tracked[m, i]:
                    hit = False
                    break
            if hit:
                visits[m] += 1
        n2 = np.int64(0)
        for i in range(d):
            n2 += pos[i] * pos[i]
        if n2 > r2:
            return t, 0
        if t >= budget:
            return t, 1
        r, buf, nbits = _draw_dir(state, buf, nbits, ndirs, bbits, bmask)
        axis = r >> 1
        if r & 1:
            pos[axis] += 1
        else:
            pos[axis] -= 1
        t += 1


@njit(cache=True, nogil=True)
def _hit_before_exit(state, pos, target, r2, budget):
    """1 if the walk reaches ``target`` strictly before leaving the ball,
    0 if it exits first, 2 if the budget ran out."""
    d = pos.shape[0]
    ndirs = 2 * d
    bbits = 1
    while (1 << bbits) < ndirs:
        bbits += 1
    bmask = _U64((1 << bbits) - 1)
    buf = _U64(0)
    nbits = 0
    t = np.int64(0)
    while True:
        n2 = np.int64(0)
        for i in range(d):
            n2 += pos[i] * pos[i]
        if n2 > r2:
            return 0
        hit = True
        for i in range(d):
            if pos[i] != target[i]:
                hit = False
                break
        if hit:
            return 1
        if t >= budget:
            return 2
        r, buf, nbits = _draw_dir(state, buf, nbits, ndirs, bbits, bmask)
        axis = r >> 1
        if r & 1:
            pos[axis] += 1
        else:
            pos[axis] -= 1
        t += 1


@njit(cache=True, nogil=True)
def _visit_count_ensemble(state, d, start, target, r2, n_walks, budget):
    counts = np.zeros(n_walks, dtype=np.int64)
    pos = np.empty(d, dtype=np.int64)
    tracked = np.empty((1, d), dtype=np.int64)
    tracked[0, :] = target
    visits = np.zeros(1, dtype=np.int64)
    for w in range(n_walks):
        pos[:] = start
        visits[0] = 0
        _t, status = _ball_walk(state, pos, r2, tracked, visits, budget)
        if status != 0:
            return counts, np.int64(1)
        counts[w] = visits[0]
    return counts, np.int64(0)


@njit(cache=True, nogil=True)
def _exit_site_ensemble(state, d, start, r2, n_walks, budget):
    exits = np.zeros((n_walks, d), dtype=np.int64)
    lengths = np.zeros(n_walks, dtype=np.int64)
    pos = np.empty(d, dtype=np.int64)
    tracked = np.empty((0, d), dtype=np.int64)
    visits = np.zeros(0, dtype=np.int64)
    for w in range(n_walks):
        pos[:] = start
        t, status = _ball_walk(state, pos, r2, tracked, visits, budget)
        if status != 0:
            return exits, lengths, np.int64(1)
        exits[w, :] = pos
        lengths[w] = t
    return exits, lengths, np.int64(0)


@njit(cache=True, nogil=True)
def _hitting_count_ensemble(state, d, start, target, r2, n_walks, budget):
    hits = np.int64(0)
    pos = np.empty(d, dtype=np.int64)
    for w in range(n_walks):
        pos[:] = start
        res = _hit_before_exit(state, pos, target, r2, budget)
        if res == 2:
            return np.int64(-1)
        hits += res
    return hits


def walk_until_exit_set(start, inside, rng: WalkRng, tracked=None,
                        step_budget=DEFAULT_STEP_BUDGET, record_path=False):
    """Reference walk: step until ``inside(pos)`` is false.

    ``tracked`` is an optional iterable of sites whose visit counts are
    tallied (through the stopped position inclusive).  ``record_path``
    additionally returns the full position sequence, for cross-checking
    the bookkeeping on small instances.
    """
    pos = tuple(int(c) for c in start)
    d = len(pos)
    ndirs, bbits, bmask = _direction_bits(d)
    state = rng.state()
    visits = {tuple(int(c) for c in s): 0 for s in tracked} if tracked is not None else None
    path = [pos] if record_path else None
    buf = 0
    nbits = 0
    t = 0
    while True:
        if visits is not None and pos in visits:
            visits[pos] += 1
        if not inside(pos):
            break
        if t >= step_budget:
            raise StepBudgetExceeded(f"walk exceeded {step_budget} steps without exiting")
        while True:
            if nbits < bbits:
                buf = int(xoshiro_next(state))
                nbits = 64
            r = buf & bmask
            buf >>= bbits
            nbits -= bbits
            if r < ndirs:
                break
        axis = r >> 1
        step = 1 if r & 1 else -1
        pos = pos[:axis] + (pos[axis] + step,) + pos[axis + 1:]
        t += 1
        if record_path:
            path.append(pos)
    return WalkOutcome(path_length=t, exit_site=pos, visits=visits, path=path)


def walk_until_exit_ball(start, radius, rng: WalkRng, tracked=None,
                         step_budget=DEFAULT_STEP_BUDGET):
    """Walk until the first position with |pos| > radius (kernel-backed)."""
    pos = np.asarray(start, dtype=np.int64).copy()
    d = pos.shape[0]
    r2 = np.int64(radius_sq_int(radius))
    if tracked is not None:
        sites = [tuple(int(c) for c in s) for s in tracked]
        tracked_arr = np.array(sites, dtype=np.int64).reshape(len(sites), d)
    else:
        sites = []
        tracked_arr = np.empty((0, d), dtype=np.int64)
    visits = np.zeros(tracked_arr.shape[0], dtype=np.int64)
    t, status = _ball_walk(rng.state(), pos, r2, tracked_arr, visits, np.int64(step_budget))
    if status != 0:
        raise StepBudgetExceeded(f"walk exceeded {step_budget} steps without exiting")
    vdict = {s: int(v) for s, v in zip(sites, visits)} if tracked is not None else None
    return WalkOutcome(path_length=int(t), exit_site=tuple(int(c) for c in pos), visits=vdict)


def hitting_before_exit(start, target, radius, rng: WalkRng,
                        step_budget=DEFAULT_STEP_BUDGET) -> bool:
    """True iff the walk reaches ``target`` strictly before exiting the ball."""
    pos = np.asarray(start, dtype=np.int64).copy()
    tgt = np.asarray(target, dtype=np.int64)
    res = _hit_before_exit(rng.state(), pos, tgt, np.int64(radius_sq_int(radius)),
                           np.int64(step_budget))
    if res == 2:
        raise StepBudgetExceeded(f"walk exceeded {step_budget} steps")
    return bool(res)


def visit_count_ensemble(radius, target, n_walks, rng: WalkRng, start=None,
                         step_budget=DEFAULT_STEP_BUDGET):
    """Visit counts to ``target`` before ball exit, one entry per walk.

    All walks consume a single sequential stream, so the whole ensemble is
    reproducible from ``rng`` alone.
    """
    tgt = np.asarray(target, dtype=np.int64)
    d = tgt.shape[0]
    s = np.zeros(d, dtype=np.int64) if start is None else np.asarray(start, dtype=np.int64)
    counts, status = _visit_count_ensemble(rng.state(), d, s, tgt,
                                           np.int64(radius_sq_int(radius)),
                                           n_walks, np.int64(step_budget))
    if status != 0:
        raise StepBudgetExceeded(f"some walk exceeded {step_budget} steps")
    return counts


def exit_site_ensemble(radius, n_walks, rng: WalkRng, start=None, d=None,
                       step_budget=DEFAULT_STEP_BUDGET):
    """Exit sites and path lengths of repeated ball-exit walks."""
    if start is None:
        if d is None:
            raise ValueError("give either start or d")
        start = (0,) * d
    s = np.asarray(start, dtype=np.int64)
    exits, lengths, status = _exit_site_ensemble(rng.state(), s.shape[0], s,
                                                 np.int64(radius_sq_int(radius)),
                                                 n_walks, np.int64(step_budget))
    if status != 0:
        raise StepBudgetExceeded(f"some walk exceeded {step_budget} steps")
    return exits, lengths


def hitting_frequency(radius, start, target, n_walks, rng: WalkRng,
                      step_budget=DEFAULT_STEP_BUDGET) -> float:
    """Empirical probability of hitting ``target`` before exiting the ball."""
    s = np.asarray(start, dtype=np.int64)
    tgt = np.asarray(target, dtype=np.int64)
    hits = _hitting_count_ensemble(rng.state(), s.shape[0], s, tgt,
                                   np.int64(radius_sq_int(radius)),
                                   n_walks, np.int64(step_budget))
    if hits < 0:
        raise StepBudgetExceeded(f"some walk exceeded {step_budget} steps")
    return float(hits) / float(n_walks)
