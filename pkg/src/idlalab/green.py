"""Lattice Green's functions for the simple random walk.

``stopped_green_exact`` builds the full matrix G_k(x, y) of expected visit
counts before exiting the ball of radius k, by solving (I - P) G = I with P
the walk's transition matrix restricted to the ball.  Rows then satisfy

    G_k(x, y) = delta_xy + (1/2d) * sum_{w ~ x, w in ball} G_k(w, y)

to solver precision, and G_k vanishes whenever either argument lies
outside the ball.

Single-source columns (``stopped_green_column``) are solved sparsely so
radii far beyond the dense-table regime stay cheap; the free-space Green's
function for d >= 3 is obtained from two stopped columns at radii (k, 2k)
by Richardson extrapolation of the known k^(2-d) deficit.

``hit_probability`` solves the discrete Dirichlet problem directly (h = 1
at the target, h = 0 off the ball, h harmonic elsewhere).  It deliberately
does not reuse the Green's matrix, so the first-hit identity

    P(hit z before exit) * G_k(z, z) = G_k(0, z)

is a genuine cross-check between two independent solvers.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .grids import BoxGrid
from .lattice import ball_sites, ball_volume, norm_sq, radius_sq_int

DENSE_SITE_LIMIT = 20_000


@dataclass
class GreensTable:
    """Dense stopped Green's matrix on the ball of radius k."""

    k: float
    d: int
    sites: np.ndarray          # (N, d) int64, lexicographic
    values: np.ndarray         # (N, N) float64

    def __post_init__(self):
        self._index = {tuple(int(c) for c in s): i for i, s in enumerate(self.sites)}

    @property
    def n_sites(self) -> int:
        return self.sites.shape[0]

    def site_index(self):
        return self._index

    def _idx(self, x):
        return self._index.get(tuple(int(c) for c in x))

    def value(self, x, y) -> float:
        """G_k(x, y); zero if either site lies outside the ball."""
        ix = self._idx(x)
        iy = self._idx(y)
        if ix is None or iy is None:
            return 0.0
        return float(self.values[ix, iy])

    def row(self, x) -> np.ndarray:
        ix = self._idx(x)
        if ix is None:
            return np.zeros(self.n_sites)
        return self.values[ix].copy()

    def symmetry_error(self) -> float:
        return float(np.max(np.abs(self.values - self.values.T)))

    def row_identity_error(self) -> float:
        """max |(I - P) G - I| over all entries."""
        P = _transition_matrix(self.sites, self.d)
        resid = self.values - P @ self.values
        resid[np.diag_indices_from(resid)] -= 1.0
        return float(np.max(np.abs(resid)))


def _transition_matrix(sites: np.ndarray, d: int):
    """Sub-stochastic in-ball transition matrix as CSR, entries 1/2d."""
    index = {tuple(int(c) for c in s): i for i, s in enumerate(sites)}
    rows, cols = [], []
    for i, s in enumerate(sites):
        s = tuple(int(c) for c in s)
        for axis in range(d):
            for step in (-1, 1):
                q = s[:axis] + (s[axis] + step,) + s[axis + 1:]
                j = index.get(q)
                if j is not None:
                    rows.append(i)
                    cols.append(j)
    data = np.full(len(rows), 1.0 / (2 * d))
    n = sites.shape[0]
    return scipy.sparse.csr_matrix((data, (rows, cols)), shape=(n, n))


def stopped_green_exact(k: float, d: int) -> GreensTable:
    """Full G_k table on the ball of radius k by a dense symmetric solve."""
    return _stopped_green_exact(float(k), int(d))


@lru_cache(maxsize=64)
def _stopped_green_exact(k: float, d: int) -> GreensTable:
    sites = ball_sites(k, d)
    n = sites.shape[0]
    if n > DENSE_SITE_LIMIT:
        raise ValueError(f"{n} sites exceeds the dense-solve limit {DENSE_SITE_LIMIT}; "
                         "use stopped_green_column for single sources")
    A = np.eye(n) - _transition_matrix(sites, d).toarray()
    values = scipy.linalg.solve(A, np.eye(n), assume_a="pos")
    return GreensTable(k=float(k), d=d, sites=sites, values=np.ascontiguousarray(values))


@dataclass(frozen=True)
class BallField:
    """A scalar field on the ball of radius k, stored on a padded box grid.

    ``values`` is flat in grid order and exactly zero outside the ball.
    """

    k: float
    d: int
    grid: BoxGrid
    values: np.ndarray

    def at(self, site) -> float:
        if not self.grid.contains(site):
            return 0.0
        return float(self.values[self.grid.index(site)])


def _ball_system(k: float, d: int):
    """In-ball adjacency on a padded BoxGrid; returns (grid, inball_flat,
    compact_of_flat, csr A = I - P)."""
    r2 = radius_sq_int(k)
    radius = int(math.isqrt(r2)) + 1
    grid = BoxGrid(d, radius)
    mask = grid.norm_sq_array() <= r2
    inball = np.nonzero(mask)[0].astype(np.int64)
    compact = np.full(grid.size, -1, dtype=np.int64)
    compact[inball] = np.arange(inball.size)
    rows, cols = [], []
    for delta in grid.step_deltas():
        nb = inball + delta
        ok = mask[nb]
        rows.append(compact[inball[ok]])
        cols.append(compact[nb[ok]])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    data = np.full(rows.size, -1.0 / (2 * d))
    n = inball.size
    A = scipy.sparse.csr_matrix((data, (rows, cols)), shape=(n, n))
    A = A + scipy.sparse.identity(n, format="csr")
    return grid, inball, compact, A


def _solve_spd(A, b, rtol=1e-13):
    x, info = scipy.sparse.linalg.cg(A, b, rtol=rtol, atol=0.0, maxiter=100_000)
    if info != 0:
        raise RuntimeError(f"conjugate gradient failed to converge (info={info})")
    return x


@lru_cache(maxsize=32)
def _origin_column(k: float, d: int) -> BallField:
    return stopped_green_column(k, d, source=None)


def stopped_green_column(k: float, d: int, source=None) -> BallField:
    """One column G_k(source, .) by a sparse SPD solve (any feasible k)."""
    if source is None:
        source = (0,) * d
    source = tuple(int(c) for c in source)
    if norm_sq(source) > radius_sq_int(k):
        raise ValueError(f"source {source} outside the ball of radius {k}")
    grid, inball, compact, A = _ball_system(k, d)
    b = np.zeros(inball.size)
    b[compact[grid.index(source)]] = 1.0
    g = _solve_spd(A, b)
    values = np.zeros(grid.size)
    values[inball] = g
    return BallField(k=float(k), d=d, grid=grid, values=values)


def green_asymptotic(k: float, z, d: int) -> float:
    """Leading-order G_k(0, z): (2/omega_2) ln(k/|z|) in d=2,
    (2/((d-2) omega_d)) (|z|^(2-d) - k^(2-d)) for d >= 3."""
    r = math.sqrt(norm_sq(z))
    if r == 0:
        raise ValueError("asymptotic form is singular at z = 0")
    if not 0 < r <= k:
        raise ValueError("need 0 < |z| <= k")
    if d == 2:
        return (2.0 / math.pi) * math.log(k / r)
    w = ball_volume(d)
    return 2.0 / ((d - 2) * w) * (r ** (2 - d) - k ** (2 - d))


def free_green(z, d: int, mode: str = "exact", k: float | None = None) -> float:
    """Free-space G(0, z) for a transient walk (d >= 3).

    ``exact`` mode extrapolates stopped columns at radii (k, 2k); the
    k^(2-d) deficit cancels, leaving an O(k^(1-d) + k^-2) error.
    ``asymptotic`` mode returns (2/((d-2) omega_d)) |z|^(2-d).
    """
    if d < 3:
        raise ValueError("free Green's function diverges for d < 3 (recurrent walk)")
    z = tuple(int(c) for c in z)
    if len(z) != d:
        raise ValueError("dimension mismatch")
    r = math.sqrt(norm_sq(z))
    if mode == "asymptotic":
        if r == 0:
            raise ValueError("asymptotic form is singular at z = 0")
        return 2.0 / ((d - 2) * ball_volume(d)) * r ** (2 - d)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    if k is None:
        k = max(20.0, 2.0 * math.ceil(r))
    g1 = _origin_column(float(k), d).at(z)
    g2 = _origin_column(float(2 * k), d).at(z)
    # G - G_k ~ c k^(2-d): Richardson with ratio 2
    w = 2.0 ** (d - 2)
    return (w * g2 - g1) / (w - 1.0)


def hit_probability(k: float, start, target, d: int | None = None) -> float:
    """P(walk from ``start`` reaches ``target`` strictly before exiting the
    ball of radius k), by solving the discrete Dirichlet problem."""
    start = tuple(int(c) for c in start)
    target = tuple(int(c) for c in target)
    if d is None:
        d = len(start)
    r2 = radius_sq_int(k)
    if norm_sq(target) > r2 or norm_sq(start) > r2:
        return 0.0
    if start == target:
        return 1.0
    sites = ball_sites(k, d)
    index = {tuple(int(c) for c in s): i for i, s in enumerate(sites)}
    keep = [i for i, s in enumerate(sites) if tuple(int(c) for c in s) != target]
    sub = {old: new for new, old in enumerate(keep)}
    n = len(keep)
    A = np.eye(n)
    b = np.zeros(n)
    inv2d = 1.0 / (2 * d)
    for new, old in enumerate(keep):
        s = tuple(int(c) for c in sites[old])
        for axis in range(d):
            for step in (-1, 1):
                q = s[:axis] + (s[axis] + step,) + s[axis + 1:]
                if q == target:
                    b[new] += inv2d
                    continue
                j = index.get(q)
                if j is not None:
                    A[new, sub[j]] -= inv2d
    h = scipy.linalg.solve(A, b)
    return float(h[sub[index[start]]])


@dataclass(frozen=True)
class ChiLaw:
    """Law of the visit count chi to a fixed site z before ball exit.

    P(chi = 0) = q0 and P(chi = i) = (1 - q0) p^(i-1) (1 - p) for i >= 1:
    reach the site or not, then a geometric number of returns with
    per-excursion return probability p = 1 - 1/G_k(z, z).
    """

    k: float
    d: int
    z: tuple
    q0: float
    p: float
    mean: float
    variance: float

    def pmf(self, i: int) -> float:
        if i < 0:
            return 0.0
        if i == 0:
            return self.q0
        return (1.0 - self.q0) * self.p ** (i - 1) * (1.0 - self.p)

    def tail(self, i: int) -> float:
        """P(chi >= i) for i >= 1."""
        if i <= 0:
            return 1.0
        return (1.0 - self.q0) * self.p ** (i - 1)


def chi_law(k: float, z, d: int | None = None,
            greens: GreensTable | None = None) -> ChiLaw:
    """First-principles visit-count law at z from the exact solvers."""
    z = tuple(int(c) for c in z)
    if d is None:
        d = len(z)
    if norm_sq(z) > radius_sq_int(k):
        raise ValueError(f"site {z} outside the ball of radius {k}")
    if norm_sq(z) == 0:
        raise ValueError("visit-count law is for z != 0")
    if greens is None:
        greens = stopped_green_exact(float(k), d)
    mean = greens.value((0,) * d, z)
    gzz = greens.value(z, z)
    p = 1.0 - 1.0 / gzz
    q0 = 1.0 - hit_probability(k, (0,) * d, z, d)
    variance = (1.0 - q0) * (1.0 + p) / (1.0 - p) ** 2 - mean * mean
    return ChiLaw(k=float(k), d=d, z=z, q0=q0, p=p, mean=mean, variance=variance)


def chi_variance_paper(k: float, z, d: int | None = None,
                       greens: GreensTable | None = None) -> float:
    """The closed-form variance expression

        (1 - q0/G_k(0,z)) G_k(0,z) G_k(z,z) (2 + 1/(G_k(z,z)-1)) - G_k(0,z)^2

    evaluated verbatim.  Kept separate from :func:`chi_law`'s
    first-principles variance so the two can be compared; see the
    comparison report in the test suite.
    """
    z = tuple(int(c) for c in z)
    if d is None:
        d = len(z)
    if norm_sq(z) > radius_sq_int(k):
        raise ValueError(f"site {z} outside the ball of radius {k}")
    if greens is None:
        greens = stopped_green_exact(float(k), d)
    g0z = greens.value((0,) * d, z)
    gzz = greens.value(z, z)
    if gzz <= 1.0:
        raise ValueError("G_k(z,z) <= 1 cannot occur for z with an in-ball neighbor")
    q0 = 1.0 - hit_probability(k, (0,) * d, z, d)
    return (1.0 - q0 / g0z) * g0z * gzz * (2.0 + 1.0 / (gzz - 1.0)) - g0z * g0z
