"""Internal DLA: grow the cluster and track the odometer exactly.

Walker 0 is placed at the origin and never moves (its path length is 0);
every later walker starts at the origin, walks until it first stands on a
site outside the current cluster, and that site joins the cluster.  The
odometer counts every position of every walker from time 0 through its
stopping time inclusive, so the bookkeeping identity

    sum_z u(z) = sum_j (sigma_j + 1)        (walkers j = 0, 1, ..., N)

holds exactly on every run.

The growth loop runs on a dense occupancy/odometer pair over a cubic box
that is regrown on demand; a walker can never wander farther than one step
beyond the current cluster radius, so the box always covers every visit.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .grids import BoxGrid
from .lattice import ball_volume, scale_point
from .rng import WalkRng
from .walks import DEFAULT_STEP_BUDGET, StepBudgetExceeded, _draw_dir

_U64 = np.uint64


class UntrackedSiteError(KeyError):
    """Asked for the odometer at a site that was not recorded."""


@dataclass
class Cluster:
    """Occupied sites in insertion order; entry 0 is always the origin."""

    d: int
    insertion_order: list
    sites: set = field(repr=False, default=None)

    def __post_init__(self):
        if self.sites is None:
            self.sites = set(self.insertion_order)

    def __len__(self):
        return len(self.sites)

    def __contains__(self, site):
        return tuple(site) in self.sites

    def max_norm(self) -> float:
        return max(math.sqrt(sum(c * c for c in s)) for s in self.sites)


@dataclass
class OdometerField:
    """Visit counts per site, either full-field (dense box) or site-list."""

    d: int
    n_walkers: int
    grid: BoxGrid | None = None
    counts: np.ndarray | None = field(repr=False, default=None)
    site_counts: dict | None = None

    def at(self, site) -> int:
        site = tuple(int(c) for c in site)
        if self.site_counts is not None:
            try:
                return self.site_counts[site]
            except KeyError:
                raise UntrackedSiteError(site) from None
        if not self.grid.contains(site):
            return 0  # the box covers every visited site
        return int(self.counts[self.grid.index(site)])

    def total(self) -> int:
        if self.site_counts is not None:
            return sum(self.site_counts.values())
        return int(self.counts.sum())

    def items(self):
        """(site, count) pairs with count > 0, in a deterministic order."""
        if self.site_counts is not None:
            for site in sorted(self.site_counts):
                c = self.site_counts[site]
                if c > 0:
                    yield site, c
            return
        for idx in np.nonzero(self.counts)[0]:
            yield self.grid.site(int(idx)), int(self.counts[idx])


@dataclass
class GrowthRecord:
    d: int
    n_walkers: int
    seed: int
    stream_id: int
    sigma: np.ndarray = field(repr=False, default=None)
    n: float | None = None
    delta_inner: float | None = None
    delta_outer: float | None = None

    @property
    def sigma_sum(self) -> int:
        """Total steps taken, sum_j sigma_j (walker starts not counted)."""
        return int(self.sigma.sum())

    @property
    def visit_total(self) -> int:
        """sum_j (sigma_j + 1) over walkers 0..n_walkers; equals sum_z u(z)."""
        return self.sigma_sum + self.n_walkers + 1


@njit(cache=True, nogil=True)
def _grow_kernel(state, carry, occ, odo, sigma, added, start_j, n_walkers,
                 deltas, strides, radius, origin, budget, limit_r2):
    """Run walkers start_j..n_walkers-1; returns (next_j, status, max_r2).

    status: 0 all walkers done, 1 cluster near the box edge (regrow and
    resume at next_j), 2 step budget exceeded.  ``carry`` holds the
    partially consumed random word across re-entries, so regrowing the box
    never changes the step sequence.
    """
    d = strides.shape[0]
    ndirs = 2 * d
    bbits = 1
    while (1 << bbits) < ndirs:
        bbits += 1
    bmask = _U64((1 << bbits) - 1)
    buf = carry[0]
    nbits = np.int64(carry[1])
    max_r2 = np.int64(0)
    for j in range(start_j, n_walkers):
        idx = origin
        t = np.int64(0)
        while True:
            odo[idx] += 1
            if occ[idx] == 0:
                break
            if t >= budget:
                return j, 2, max_r2
            r, buf, nbits = _draw_dir(state, buf, nbits, ndirs, bbits, bmask)
            idx += deltas[r]
            t += 1
        occ[idx] = 1
        sigma[j] = t
        rem = idx
        n2 = np.int64(0)
        for i in range(d):
            q = rem // strides[i]
            rem -= q * strides[i]
            c = q - radius
            added[j, i] = c
            n2 += c * c
        if n2 > max_r2:
            max_r2 = n2
        if n2 >= limit_r2:
            carry[0] = buf
            carry[1] = _U64(nbits)
            return j + 1, 1, max_r2
    return n_walkers, 0, max_r2


def _grow_impl(n_walkers: int, d: int, rng: WalkRng, track,
               step_budget, init_radius):
    if n_walkers < 0:
        raise ValueError("n_walkers must be >= 0")
    if d < 2:
        raise ValueError("need dimension d >= 2")
    n_est = (max(n_walkers, 1) / ball_volume(d)) ** (1.0 / d)
    radius = init_radius or max(8, int(math.ceil(1.25 * n_est)) + 4)
    grid = BoxGrid(d, radius)
    occ = np.zeros(grid.size, dtype=np.uint8)
    odo = np.zeros(grid.size, dtype=np.int64)
    occ[grid.origin_index] = 1
    odo[grid.origin_index] = 1  # walker 0 sits at the origin
    sigma = np.zeros(n_walkers, dtype=np.int64)
    added = np.zeros((n_walkers, d), dtype=np.int64)
    state = rng.state()
    carry = np.zeros(2, dtype=np.uint64)
    j = 0
    max_r2 = 0
    while j < n_walkers:
        limit_r2 = np.int64((grid.radius - 2) ** 2)
        j, status, r2 = _grow_kernel(state, carry, occ, odo, sigma, added, j,
                                     n_walkers, grid.step_deltas(), grid.strides,
                                     np.int64(grid.radius),
                                     np.int64(grid.origin_index),
                                     np.int64(step_budget), limit_r2)
        max_r2 = max(max_r2, int(r2))
        if status == 2:
            raise StepBudgetExceeded(f"walker {j} exceeded {step_budget} steps")
        if status == 1:
            grid, occ, odo = grid.grow(int(math.ceil(grid.radius * 1.3)) + 8, occ, odo)

    order = [(0,) * d] + [tuple(int(c) for c in added[i]) for i in range(n_walkers)]
    cluster = Cluster(d=d, insertion_order=order)

    if isinstance(track, str) and track == "full":
        odometer = OdometerField(d=d, n_walkers=n_walkers, grid=grid, counts=odo)
    else:
        wanted = [] if track is None else [tuple(int(c) for c in s) for s in track]
        counts = {}
        for s in wanted:
            counts[s] = int(odo[grid.index(s)]) if grid.contains(s) else 0
        odometer = OdometerField(d=d, n_walkers=n_walkers, site_counts=counts)

    record = GrowthRecord(d=d, n_walkers=n_walkers, seed=rng.seed,
                          stream_id=rng.stream_id, sigma=sigma)
    return cluster, odometer, record, occ, grid, max_r2


def grow(n_walkers: int, d: int, rng: WalkRng, track="full",
         step_budget=DEFAULT_STEP_BUDGET, init_radius=None):
    """Grow the cluster of ``n_walkers`` walkers (plus walker 0 at 0).

    ``track`` selects the odometer representation: ``"full"`` keeps the
    dense field (needed for whole-cluster sums), a list of sites keeps a
    site->count map for just those sites, ``None`` keeps none.
    Deterministic given ``rng``.
    """
    cluster, odometer, record, _occ, _grid, _max_r2 = _grow_impl(
        n_walkers, d, rng, track, step_budget, init_radius)
    return cluster, odometer, record


def grow_for_radius(n: int, d: int, rng: WalkRng, track="full",
                    step_budget=DEFAULT_STEP_BUDGET):
    """Grow the cluster with floor(omega_d n^d) walkers, the walker count
    whose occupied volume matches the ball of radius n, and record the
    inner/outer deviations from that ball."""
    if n < 1:
        raise ValueError("need n >= 1")
    n_walkers = int(math.floor(ball_volume(d) * float(n) ** d))
    cluster, odometer, record, occ, grid, max_r2 = _grow_impl(
        n_walkers, d, rng, track, step_budget, None)
    norm2 = grid.norm_sq_array()
    min_out = float(np.min(norm2[occ == 0]))
    record.n = float(n)
    record.delta_inner = n - math.sqrt(min_out)
    record.delta_outer = math.sqrt(max_r2) - n
    return cluster, odometer, record


def odometer_at(odometer: OdometerField, z, n: int) -> int:
    """Odometer count at the lattice image of the real point z at scale n."""
    return odometer.at(scale_point(z, n))
