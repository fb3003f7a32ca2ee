"""Geometry of the integer lattice Z^d.

Sites are plain tuples of Python ints, so squared norms are exact integers
at any scale we care about.  A Euclidean ball of radius ``r`` contains the
sites with ``|x|^2 <= floor(r^2)``; since site norms are integers this is
the exact closed-ball membership for every real ``r >= 0``.

Neighbor order is fixed and documented (axis index ascending, minus before
plus) so that seeded walks are bit-reproducible.
"""

import math
from itertools import product

import numpy as np

Site = tuple


def ball_volume(d: int) -> float:
    """Volume of the unit ball of R^d: pi^(d/2) / Gamma(d/2 + 1)."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def norm_sq(p) -> int:
    """Exact integer squared Euclidean norm of a lattice site."""
    return sum(int(c) * int(c) for c in p)


def radius_sq_int(r: float) -> int:
    """Largest integer norm^2 inside the closed ball of radius r."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    return int(math.floor(r * r))


def in_ball(p, r: float) -> bool:
    """Closed-ball membership |p| <= r, decided on exact integers."""
    return norm_sq(p) <= radius_sq_int(r)


def neighbors(p):
    """The 2d neighbors of p: for each axis i ascending, p - e_i then p + e_i."""
    d = len(p)
    out = []
    for i in range(d):
        minus = list(p)
        minus[i] -= 1
        plus = list(p)
        plus[i] += 1
        out.append(tuple(minus))
        out.append(tuple(plus))
    return out


def discrete_laplacian(f, p) -> float:
    """Lattice Laplacian (1/2d) * sum_{q ~ p} f(q) - f(p).

    ``f`` is any mapping from sites to reals; it must be defined on ``p``
    and all its neighbors.
    """
    d = len(p)
    try:
        total = 0.0
        for q in neighbors(p):
            total += f[q]
        return total / (2 * d) - f[p]
    except KeyError as exc:
        raise KeyError(f"field not defined at site {exc.args[0]}; extend the field") from exc


def ball_sites(r: float, d: int) -> np.ndarray:
    """All sites of Z^d with |x| <= r, lexicographically sorted, shape (N, d)."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if d < 1:
        raise ValueError("dimension must be >= 1")
    r2 = radius_sq_int(r)
    m = int(math.isqrt(r2))
    axis = range(-m, m + 1)
    sites = [p for p in product(axis, repeat=d) if norm_sq(p) <= r2]
    return np.array(sites, dtype=np.int64).reshape(len(sites), d)


def scale_point(z, n: int):
    """Lattice image of a real point: componentwise floor of n*z."""
    return tuple(int(math.floor(n * float(c))) for c in z)
