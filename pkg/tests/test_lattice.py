import math
from itertools import product

import numpy as np
import pytest

from idlalab.lattice import (ball_sites, ball_volume, discrete_laplacian, in_ball,
                             neighbors, norm_sq, radius_sq_int, scale_point)


def test_ball_volume_closed_forms():
    assert ball_volume(2) == pytest.approx(math.pi, abs=1e-15)
    assert ball_volume(3) == pytest.approx(4 * math.pi / 3, abs=1e-15)
    # general formula spot checks
    assert ball_volume(4) == pytest.approx(math.pi**2 / 2, rel=1e-14)
    assert ball_volume(5) == pytest.approx(8 * math.pi**2 / 15, rel=1e-14)


def test_neighbors_documented_order_d2():
    assert neighbors((0, 0)) == [(-1, 0), (1, 0), (0, -1), (0, 1)]


def test_neighbors_d3_unit_distance():
    ns = neighbors((1, 2, 3))
    assert len(ns) == 6
    assert len(set(ns)) == 6
    for q in ns:
        assert norm_sq(tuple(a - b for a, b in zip(q, (1, 2, 3)))) == 1


def test_neighbors_unit_distance_random_points():
    rng = np.random.default_rng(42)
    for _ in range(50):
        d = int(rng.integers(2, 5))
        p = tuple(int(c) for c in rng.integers(-1000, 1000, size=d))
        for q in neighbors(p):
            assert norm_sq(tuple(a - b for a, b in zip(q, p))) == 1


def test_laplacian_of_constant_is_zero():
    field = {p: 7.5 for p in product(range(-2, 3), repeat=2)}
    assert discrete_laplacian(field, (0, 0)) == 0.0
    assert discrete_laplacian(field, (1, -1)) == 0.0


def test_laplacian_of_linear_is_zero():
    field = {p: float(p[0]) for p in product(range(-3, 4), repeat=2)}
    for p in [(0, 0), (1, 1), (-2, 2)]:
        assert discrete_laplacian(field, p) == 0.0


@pytest.mark.parametrize("d", [2, 3])
def test_laplacian_of_norm_squared_is_one(d):
    # each axis contributes ((x+1)^2 + (x-1)^2 - 2x^2) / 2d = 2/2d
    field = {p: float(norm_sq(p)) for p in product(range(-3, 4), repeat=d)}
    for p in [(0,) * d, (1,) + (0,) * (d - 1), (1, -2) + (0,) * (d - 2)]:
        assert discrete_laplacian(field, p) == pytest.approx(1.0, abs=1e-12)


def test_laplacian_missing_site_errors():
    field = {(0, 0): 1.0, (1, 0): 1.0}
    with pytest.raises(KeyError):
        discrete_laplacian(field, (0, 0))


def test_ball_sites_small_counts():
    assert len(ball_sites(1, 2)) == 5
    assert len(ball_sites(2, 2)) == 13
    assert len(ball_sites(1, 3)) == 7


def test_ball_sites_matches_bruteforce():
    for r in (1.0, 2.0, 3.5):
        got = {tuple(s) for s in ball_sites(r, 2)}
        want = {p for p in product(range(-5, 6), repeat=2) if norm_sq(p) <= r * r}
        assert got == want


def test_ball_sites_unique_and_sorted():
    sites = ball_sites(3, 3)
    as_tuples = [tuple(s) for s in sites]
    assert len(set(as_tuples)) == len(as_tuples)
    assert as_tuples == sorted(as_tuples)


def test_ball_count_approaches_volume():
    r = 50
    count = len(ball_sites(r, 2))
    assert abs(count / r**2 - ball_volume(2)) / ball_volume(2) < 0.02


def test_scale_point_floor_semantics():
    assert scale_point((0.5, 0.0), 10) == (5, 0)
    assert scale_point((0.5, 0.5), 3) == (1, 1)
    assert scale_point((-0.3, 0.7), 10) == (-3, 7)
    assert scale_point((-0.35, 0.0), 10) == (-4, 0)


def test_scale_point_norm_gap_bounded():
    rng = np.random.default_rng(7)
    for _ in range(200):
        d = int(rng.integers(2, 5))
        z = rng.uniform(-1, 1, size=d)
        n = int(rng.integers(1, 500))
        zn = scale_point(z, n)
        gap = abs(math.sqrt(norm_sq(zn)) - n * math.sqrt(float(z @ z)))
        assert gap <= math.sqrt(d) + 1e-9


def test_ball_membership_exact():
    assert in_ball((3, 4), 5)
    assert not in_ball((3, 4), 4.99)
    assert radius_sq_int(5) == 25
    assert radius_sq_int(0) == 0
    with pytest.raises(ValueError):
        radius_sq_int(-1)
