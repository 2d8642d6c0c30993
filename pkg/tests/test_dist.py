import numpy as np
import pytest
from hypothesis import given, strategies as st

from prophet_signaling.dist import (
    Dist, discrete, linear, mixture, point_mass, two_point, uniform,
)
from prophet_signaling.generators import random_dist

MEDIANH_H1 = mixture([5 / 6, 1 / 6], [uniform(0.0, 1 / 24), uniform(23 / 24, 1.0)])
BIN = discrete([(0.0, 0.8), (1.0, 0.2)])


@st.composite
def dists(draw):
    return random_dist(np.random.default_rng(draw(st.integers(0, 2**32 - 1))))


def riemann_tail(d: Dist, t: float, n: int = 10**6) -> float:
    """Midpoint rule on the density plus exact atom sums; independent of the prefix tables."""
    total = sum(v * m for v, m in d.atoms if v > t)
    for lo, hi, f_lo, f_hi in d.segments:
        a = max(lo, t)
        if a >= hi:
            continue
        xs = a + (np.arange(n) + 0.5) * (hi - a) / n
        dens = f_lo + (f_hi - f_lo) * (xs - lo) / (hi - lo)
        total += float(np.sum(xs * dens) * (hi - a) / n)
    return total


# construction ------------------------------------------------------------------


def test_means():
    assert uniform(0, 0.92).mean() == pytest.approx(0.46, abs=1e-15)
    assert point_mass(0.2).mean() == 0.2
    assert BIN.mean() == pytest.approx(0.2, abs=1e-15)


def test_rejects_bad_mass():
    with pytest.raises(ValueError):
        discrete([(0.0, 0.5), (1.0, 0.4)])
    with pytest.raises(ValueError):
        uniform(1.0, 0.5)


def test_overlapping_segments_merge():
    d = mixture([0.5, 0.5], [uniform(0, 2), uniform(1, 3)])
    segs = d.segments
    assert all(a[1] <= b[0] + 1e-15 for a, b in zip(segs, segs[1:]))
    assert d.cdf(1.0) == pytest.approx(0.25)
    assert d.cdf(2.0) == pytest.approx(0.75)


def test_atoms_merge_and_sort():
    d = mixture([0.5, 0.5], [discrete([(0.7, 0.5), (0.1, 0.5)]), point_mass(0.7)])
    assert d.atoms == [(0.1, pytest.approx(0.25)), (0.7, pytest.approx(0.75))]


def test_linear_density():
    d = linear(0.0, 1.0, 0.0, 2.0)
    assert d.cdf(0.5) == pytest.approx(0.25)
    assert d.mean() == pytest.approx(2 / 3)


def test_two_point():
    d = two_point(0.0, 4.0, 0.25)
    assert d.mean() == 1.0
    assert d.cdf(3.9) == 0.75


# cdf --------------------------------------------------------------------------


def test_cdf_examples():
    assert BIN.cdf(0.0) == pytest.approx(0.8)
    assert BIN.cdf_left(0.0) == 0.0
    assert uniform(0, 0.5).cdf(0.25) == pytest.approx(0.5)
    assert MEDIANH_H1.cdf(1 / 24) == pytest.approx(5 / 6, abs=1e-15)


def test_cdf_vectorized():
    xs = np.linspace(-1, 2, 7)
    assert np.allclose(uniform(0, 1).cdf(xs), np.clip(xs, 0, 1))


# tails and moments ----------------------------------------------------------------


def test_upper_tail_examples():
    assert uniform(0, 1).upper_tail_value(0.5) == pytest.approx(0.375, abs=1e-15)
    assert BIN.upper_tail_value(0.5) == pytest.approx(0.2)
    assert BIN.upper_tail_value(1.0) == 0.0
    assert BIN.upper_tail_value(1.0, include_atom=True) == pytest.approx(0.2)


def test_upper_tail_riemann_oracle():
    d = uniform(0, 0.92)
    assert d.upper_tail_value(0.25) == pytest.approx(riemann_tail(d, 0.25), abs=1e-10)
    frozen = (0.92**2 - 0.25**2) / (2 * 0.92)
    assert d.upper_tail_value(0.25) == pytest.approx(frozen, abs=1e-14)


def test_upper_tail_riemann_mixed():
    d = mixture([0.3, 0.3, 0.4], [point_mass(0.6), linear(0, 1, 2, 0), uniform(0.4, 0.9)])
    for t in (0.0, 0.3, 0.6, 0.85):
        assert d.upper_tail_value(t) == pytest.approx(riemann_tail(d, t, 200_000), abs=1e-8)


def test_expected_excess():
    assert uniform(0, 1).expected_excess(0.5) == pytest.approx(0.125)
    assert BIN.expected_excess(0.5) == pytest.approx(0.1)


# quantiles ------------------------------------------------------------------------


def test_quantile_examples():
    assert uniform(0, 0.5).quantile(0.5) == pytest.approx(0.25)
    assert BIN.lower_median() == 0.0
    # first box of the frozen-median instance: its own median sits inside the low block
    assert MEDIANH_H1.lower_median() == pytest.approx(0.6 / 24)


def test_quantile_fast_matches_scalar():
    d = mixture([0.3, 0.3, 0.4], [point_mass(0.6), linear(0, 1, 2, 0), uniform(0.4, 0.9)])
    us = np.linspace(0.001, 0.999, 101)
    assert np.allclose(d.quantile_fast(us), [d.quantile(u) for u in us], atol=1e-12)


def test_superquantile_examples():
    assert BIN.superquantile(0.5) == pytest.approx(0.4, abs=1e-15)
    assert uniform(0, 1).superquantile(0.5) == pytest.approx(0.75)
    assert BIN.superquantile(1.0) == pytest.approx(BIN.mean())


def test_superquantile_sampling_oracle():
    rng = np.random.default_rng(5)
    xs = np.sort(rng.random(200_000))[::-1]
    top = xs[: xs.size // 2].mean()
    assert uniform(0, 1).superquantile(0.5) == pytest.approx(top, abs=3e-3)


def test_conditional_split_examples():
    assert uniform(0, 1).conditional_split(0.5) == pytest.approx((0.25, 0.75, 0.5))
    assert BIN.conditional_split(1.0) == pytest.approx((0.0, 1.0, 0.8))


def test_conditional_split_resubstitution():
    d = uniform(0, 0.2)
    for t in (0.03, 0.1, 0.17):
        a, b, m = d.conditional_split(t)
        assert a == pytest.approx(t / 2) and b == pytest.approx((t + 0.2) / 2)
        assert m * a + (1 - m) * b == pytest.approx(d.mean(), abs=1e-12)


def test_integrated_cdf():
    assert uniform(0, 1).integrated_cdf(0.5) == pytest.approx(0.125)
    assert BIN.integrated_cdf(2.0) == pytest.approx(0.8 + 1.0)


# properties -------------------------------------------------------------------------


@given(dists())
def test_mass_normalized(d):
    total = sum(m for _, m in d.atoms) + sum(0.5 * (fa + fb) * (hi - lo) for lo, hi, fa, fb in d.segments)
    assert abs(total - 1.0) <= 1e-12
    assert d.cdf(d.upper) == pytest.approx(1.0, abs=1e-12)


@given(dists())
def test_sorted_disjoint(d):
    vs = [v for v, _ in d.atoms]
    assert vs == sorted(set(vs))
    segs = d.segments
    assert all(s[1] <= t[0] + 1e-12 for s, t in zip(segs, segs[1:]))
    assert all(fa >= 0 and fb >= 0 for _, _, fa, fb in segs)
    assert d.lower >= 0 and d.upper <= 10


@given(dists())
def test_superquantile_nonincreasing(d):
    ws = np.linspace(0.01, 1.0, 100)
    vals = [d.superquantile(w) for w in ws]
    assert all(b <= a + 1e-10 for a, b in zip(vals, vals[1:]))


@given(dists(), st.floats(0.0, 10.0))
def test_total_expectation(d, t):
    if d.cdf_left(t) <= 1e-9 or d.sf_incl(t) <= 1e-9:
        return
    a, b, m = d.conditional_split(t)
    assert m * a + (1 - m) * b == pytest.approx(d.mean(), abs=1e-10)


@given(dists(), st.floats(-1.0, 11.0))
def test_cdf_left_le_cdf(d, x):
    assert d.cdf_left(x) <= d.cdf(x) + 1e-15
    if d.atom_mass_at(x) == 0:
        assert d.cdf_left(x) == pytest.approx(d.cdf(x), abs=1e-12)


@given(dists())
def test_tail_at_zero_is_mean(d):
    assert d.upper_tail_value(0.0, include_atom=True) == pytest.approx(d.mean(), abs=1e-12)
