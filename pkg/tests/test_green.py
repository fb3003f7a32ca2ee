import math

import numpy as np
import pytest
from scipy.stats import chi2

from idlalab.green import (chi_law, chi_variance_paper, free_green, green_asymptotic,
                           hit_probability, stopped_green_column, stopped_green_exact)
from idlalab.lattice import ball_sites, ball_volume
from idlalab.rng import WalkRng
from idlalab.walks import visit_count_ensemble


def test_unit_ball_values_first_step_analysis():
    # from a neighbor of 0 the return probability is 1/4: G(0,0) = 1/(1-1/4)
    t = stopped_green_exact(1, 2)
    assert t.value((0, 0), (0, 0)) == pytest.approx(4 / 3, abs=1e-12)
    assert t.value((0, 0), (1, 0)) == pytest.approx(1 / 3, abs=1e-12)


@pytest.mark.parametrize("k,d", [(1, 2), (3, 2), (5, 2), (8, 2), (2, 3), (4, 3)])
def test_table_symmetry_and_row_identity(k, d):
    t = stopped_green_exact(k, d)
    assert t.symmetry_error() < 1e-10
    assert t.row_identity_error() < 1e-10


def test_zero_outside_ball():
    t = stopped_green_exact(3, 2)
    assert t.value((4, 0), (0, 0)) == 0.0
    assert t.value((0, 0), (0, 4)) == 0.0


def test_monotone_in_radius():
    z = (1, 1)
    values = [stopped_green_exact(k, 2).value((0, 0), z) for k in (2, 3, 4, 6)]
    assert all(b > a for a, b in zip(values, values[1:]))
    # and G_k(0,0) grows too
    diag = [stopped_green_exact(k, 2).value((0, 0), (0, 0)) for k in (1, 2, 4)]
    assert all(b > a for a, b in zip(diag, diag[1:]))


def test_column_solver_matches_dense_table():
    t = stopped_green_exact(5, 2)
    col = stopped_green_column(5, 2)
    for z in [(0, 0), (2, 1), (4, 0), (0, -3)]:
        assert col.at(z) == pytest.approx(t.value((0, 0), z), abs=1e-9)
    col_z = stopped_green_column(5, 2, source=(2, 1))
    assert col_z.at((1, -1)) == pytest.approx(t.value((2, 1), (1, -1)), abs=1e-9)


def test_first_hit_factorization():
    # P(hit z before exit) * G(z,z) = G(0,z), two independent solvers
    pairs = [(3, (1, 0)), (3, (1, 1)), (5, (2, 1)), (5, (0, 3)), (5, (4, 0)),
             (6, (2, 2)), (8, (3, 1)), (8, (5, 0)), (4, (2, 1)), (7, (1, 2))]
    for k, z in pairs:
        t = stopped_green_exact(k, 2)
        h = hit_probability(k, (0, 0), z)
        assert h * t.value(z, z) == pytest.approx(t.value((0, 0), z), abs=1e-10)


def test_hit_probability_trivials():
    assert hit_probability(5, (2, 1), (2, 1)) == 1.0
    assert hit_probability(5, (0, 0), (6, 0)) == 0.0
    assert hit_probability(5, (6, 0), (0, 0)) == 0.0


def test_boundary_site_mostly_missed():
    q0 = 1.0 - hit_probability(5, (0, 0), (5, 0))
    assert q0 > 0.5


def test_diagonal_lower_bound():
    # any in-ball site with an in-ball neighbor has G(z,z) >= 1 + 1/(4 d^2)
    for d, k in [(2, 5), (3, 3)]:
        t = stopped_green_exact(k, d)
        for z in map(tuple, t.sites):
            assert t.value(z, z) >= 1 + 1 / (4 * d * d) - 1e-12


def test_translation_bound_d2():
    # a walk from z exits B_k(0) before the ball of radius n+k around z;
    # with k <= n this gives G_k(z,z) <= G_2n(0,0)
    for n in (6, 9, 12):
        g2n = stopped_green_column(2 * n, 2).at((0, 0))
        for k in (3, n // 2, n):
            t = stopped_green_exact(k, 2)
            for z in [(0, 0), (1, 1), (k - 1, 0), (0, -k + 1)]:
                assert t.value(z, z) <= g2n + 1e-12


def test_chi_law_consistency():
    law = chi_law(5, (2, 1))
    t = stopped_green_exact(5, 2)
    assert law.mean == pytest.approx(t.value((0, 0), (2, 1)), abs=1e-10)
    # (1 - q0) G(z,z) = G(0,z)
    assert (1 - law.q0) * t.value((2, 1), (2, 1)) == pytest.approx(law.mean, abs=1e-10)
    # law is a probability distribution
    total = law.pmf(0) + sum(law.pmf(i) for i in range(1, 2000))
    assert total == pytest.approx(1.0, abs=1e-12)
    # closed-form mean/variance agree with direct summation of the pmf
    mean = sum(i * law.pmf(i) for i in range(1, 3000))
    second = sum(i * i * law.pmf(i) for i in range(1, 3000))
    assert mean == pytest.approx(law.mean, rel=1e-10)
    assert second - mean**2 == pytest.approx(law.variance, rel=1e-9)


def test_chi_law_domain_errors():
    with pytest.raises(ValueError):
        chi_law(5, (0, 0))
    with pytest.raises(ValueError):
        chi_law(5, (6, 0))


def test_chi_empirical_distribution():
    k, z = 5, (2, 1)
    law = chi_law(k, z)
    n = 100_000
    counts = visit_count_ensemble(k, z, n, WalkRng(40, 0))
    # empirical mean within 3 sigma
    assert abs(counts.mean() - law.mean) <= 3 * math.sqrt(law.variance / n)
    # chi-square against the law, lumping the geometric tail
    m = 8
    observed = [int((counts == i).sum()) for i in range(m)] + [int((counts >= m).sum())]
    expected = [n * law.pmf(i) for i in range(m)] + [n * law.tail(m)]
    while expected[-1] < 5:  # keep bins well populated
        expected[-2] += expected.pop()
        observed[-2] += observed.pop()
    stat = sum((o - e) ** 2 / e for o, e in zip(observed, expected))
    assert stat < chi2.ppf(1 - 1e-3, len(observed) - 1)


def test_variance_expressions_compared():
    # the verbatim closed-form variance does not match the first-principles
    # law; record all three values (law, closed form, Monte Carlo)
    k, z = 5, (2, 1)
    law = chi_law(k, z)
    paper = chi_variance_paper(k, z)
    counts = visit_count_ensemble(k, z, 200_000, WalkRng(41, 0))
    mc = float(counts.var(ddof=1))
    print(f"\nchi variance comparison (k={k}, z={z}): "
          f"first-principles={law.variance:.6f} closed-form={paper:.6f} mc={mc:.6f}")
    # Monte Carlo decides: the first-principles value is the truth.
    # sd of the sample variance is sqrt((mu4 - var^2)/n).
    n = counts.size
    mu = law.mean
    mu4 = sum((i - mu) ** 4 * law.pmf(i) for i in range(0, 4000))
    assert abs(mc - law.variance) <= 4 * math.sqrt((mu4 - law.variance**2) / n)
    k3, z3 = 6, (1, 1, 1)
    law3 = chi_law(k3, z3)
    paper3 = chi_variance_paper(k3, z3)
    counts3 = visit_count_ensemble(k3, z3, 200_000, WalkRng(42, 0))
    print(f"chi variance comparison (k={k3}, z={z3}): "
          f"first-principles={law3.variance:.6f} closed-form={paper3:.6f} "
          f"mc={float(counts3.var(ddof=1)):.6f}")


def test_free_green_requires_transience():
    with pytest.raises(ValueError):
        free_green((1, 0), 2)


def test_free_green_origin_value():
    # independent reference: the known simple-random-walk constant 1.5163860
    g = free_green((0, 0, 0), 3)
    assert abs(g - 1.5163860) < 1e-2


def test_free_green_tail_ratio():
    g = free_green((12, 0, 0), 3)
    c = 2.0 / ((3 - 2) * ball_volume(3))  # = 3/(2 pi)
    assert abs(g * 12.0 - c) / c < 0.05


def test_free_green_monotone_vs_stopped():
    col20 = stopped_green_column(20.0, 3)
    col40 = stopped_green_column(40.0, 3)
    for z in [(0, 0, 0), (3, 0, 0), (2, 2, 1)]:
        assert col20.at(z) < col40.at(z) < free_green(z, 3) + 1e-9


def test_asymptotic_values():
    assert green_asymptotic(7, (7, 0), 2) == 0.0
    v = green_asymptotic(100, (10, 0), 2)
    assert v == pytest.approx((2 / math.pi) * math.log(10), rel=1e-12)
    exact = stopped_green_column(100, 2).at((10, 0))
    assert abs(v - exact) <= 0.1
    # d=3, k -> infinity limit at |z| = 2
    v3 = 2.0 / ball_volume(3) * (1 / 2)
    assert v3 == pytest.approx(3 / (2 * math.pi) / 2, rel=1e-12)
    assert abs(free_green((2, 0, 0), 3) - v3) / v3 < 0.10


def test_asymptotic_error_shrinks_with_distance():
    errs = []
    for r in (4, 8, 16):
        k = 4 * r
        exact = stopped_green_column(float(k), 2).at((r, 0))
        errs.append(abs(green_asymptotic(k, (r, 0), 2) - exact))
    assert errs[0] > errs[1] > errs[2]


def test_asymptotic_singularity():
    with pytest.raises(ValueError):
        green_asymptotic(5, (0, 0), 2)
    with pytest.raises(ValueError):
        free_green((0, 0, 0), 3, mode="asymptotic")
