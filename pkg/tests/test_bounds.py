import math

import numpy as np
import pytest

from sinrcs.bounds import (
    TABULATED_TERMS_1D,
    TABULATED_TERMS_2D,
    hex_ring_points,
    i_bar_1,
    i_bar_2,
    i_bound,
    lower_bound_separation,
    packed_interference_1d,
    packing_1d,
    partial_sums,
)
from sinrcs.carrier_sense import cpcs_sequence_admits
from sinrcs.channel import ChannelParams, Link

from oracles import bisect, series_i1, series_i2

TABLE_1D = {2: 2.74438, 3: 2.24708, 4: 2.09705, 5: 2.04166, 6: 2.01887}
TABLE_2D = {3: 9.56077, 4: 7.17297, 5: 6.48636, 6: 6.21992, 7: 6.10368}


def greedy_packing_oracle(alpha, k_max):
    """Alternate right/left placements, each solved by plain bisection."""
    right, left = [0.0], []
    for _ in range(k_max):
        existing = right + left
        edge = right[-1]
        gap = bisect(lambda x: sum(abs(edge + x - p) ** -alpha for p in existing) - 1, 1e-9, 1e3)
        right.append(edge + gap)
        existing = right + left
        edge = left[-1] if left else 0.0
        gap = bisect(lambda x: sum(abs(edge - x - p) ** -alpha for p in existing) - 1, 1e-9, 1e3)
        left.append(edge - gap)
    return right[1:], left


def test_first_packing_gaps():
    for alpha in (1.5, 2.0, 4.0, 7.0):
        assert packing_1d(alpha, 1).d[0] == pytest.approx(1.0, rel=1e-12)
    c1 = bisect(lambda c: c**-2 + (c + 1) ** -2 - 1, 1.0, 2.0)
    assert packing_1d(2.0, 1).c[0] == pytest.approx(c1, rel=1e-11)
    assert c1 == pytest.approx(1.13, abs=5e-3)


@pytest.mark.parametrize("alpha", [2.0, 3.0, 4.5])
def test_packing_matches_independent_greedy(alpha):
    right, left = greedy_packing_oracle(alpha, 12)
    p = packing_1d(alpha, 12)
    np.testing.assert_allclose(p.right, right, rtol=1e-10)
    np.testing.assert_allclose(p.left, left, rtol=1e-10)


def test_lower_bound_separation_examples():
    assert lower_bound_separation(3.0, 1)[0] == 1.0
    assert lower_bound_separation(2.0, 1)[1] == pytest.approx(math.sqrt(1.25), rel=1e-15)
    with pytest.raises(ValueError):
        lower_bound_separation(2.0, 0)


@pytest.mark.parametrize("alpha", [2.0, 3.0, 4.0, 6.0])
def test_packing_gaps_exceed_lower_bounds(alpha):
    p = packing_1d(alpha, 30)
    for k in range(2, 31):
        d_lb, c_lb = lower_bound_separation(alpha, k)
        assert p.d[k - 1] > d_lb
        assert p.c[k - 1] > c_lb
    # the first right gap meets its bound exactly; the first left gap exceeds it
    assert p.d[0] == pytest.approx(lower_bound_separation(alpha, 1)[0])
    assert p.c[0] > lower_bound_separation(alpha, 1)[1]


@pytest.mark.parametrize("alpha", [2.0, 3.0, 4.0])
def test_packing_is_admitted_in_placement_order(alpha):
    xs = packing_1d(alpha, 15).admission_order()
    # the solver returns the upper end of its bracket, so each node measures at most unit power
    links = [Link(k, (x, 0.0), (x, 1.0)) for k, x in enumerate(xs)]
    assert cpcs_sequence_admits(links, 1.0, ChannelParams(1, 0, alpha))


def test_packed_interference_single_pair():
    p = packing_1d(3.0, 1)
    assert packed_interference_1d(3.0, 1) == pytest.approx(p.d[0] ** -3 + p.c[0] ** -3, rel=1e-15)


@pytest.mark.parametrize("alpha", [2.0, 2.5, 3.0, 4.0, 6.0])
def test_packed_interference_below_series_bound(alpha):
    assert packed_interference_1d(alpha, 300) < i_bar_1(alpha).value


def test_packed_interference_increases_with_k():
    vals = [packed_interference_1d(2.0, k) for k in (1, 5, 20, 100)]
    assert vals == sorted(vals)


@pytest.mark.parametrize("alpha", [2.0, 3.5, 6.0])
def test_i1_partial_sum_matches_naive_series(alpha):
    assert i_bar_1(alpha, terms=40).value == pytest.approx(series_i1(alpha, 40), rel=1e-12)


@pytest.mark.parametrize("alpha", [3.0, 5.0])
def test_i2_partial_sum_matches_naive_series(alpha):
    assert i_bar_2(alpha, terms=60).value == pytest.approx(series_i2(alpha, 60), rel=1e-12)


@pytest.mark.parametrize("alpha,expected", sorted(TABLE_1D.items()))
def test_i1_table(alpha, expected):
    assert i_bar_1(alpha, terms=TABULATED_TERMS_1D).value == pytest.approx(expected, abs=1e-4)


@pytest.mark.parametrize("alpha,expected", sorted(TABLE_2D.items()))
def test_i2_table(alpha, expected):
    assert i_bar_2(alpha, terms=TABULATED_TERMS_2D).value == pytest.approx(expected, abs=1e-4)


def test_table_sums_equal_naive_oracle_at_table_length():
    assert i_bar_1(4.0, terms=TABULATED_TERMS_1D).value == pytest.approx(series_i1(4.0, TABULATED_TERMS_1D), rel=1e-12)


@pytest.mark.parametrize("alpha", [4.0, 5.0, 6.0])
def test_converged_series_agree_with_table_where_tail_is_small(alpha):
    assert i_bar_1(alpha).value == pytest.approx(TABLE_1D[int(alpha)], abs=1e-4)
    assert i_bar_2(alpha + 1).value == pytest.approx(TABLE_2D[int(alpha) + 1], abs=1e-4)


@pytest.mark.parametrize("series,alpha", [(i_bar_1, 3.0), (i_bar_2, 4.0), (i_bar_2, 5.0)])
def test_tail_estimate_bounds_the_remaining_sum(series, alpha):
    short = series(alpha, terms=100)
    long = series(alpha, tolerance=1e-9)
    remaining = long.value - short.value
    assert 0 < remaining <= short.truncation_estimate


def test_tolerance_controls_term_count():
    loose = i_bar_2(4.0, tolerance=1e-4)
    tight = i_bar_2(4.0, tolerance=1e-8)
    assert tight.terms_used > loose.terms_used
    assert tight.truncation_estimate < 1e-8


def test_series_preconditions():
    with pytest.raises(ValueError):
        i_bar_1(1.9)
    with pytest.raises(ValueError):
        i_bar_2(2.0)
    with pytest.raises(ValueError):
        i_bar_1(3.0, terms=0)


@pytest.mark.parametrize("dim", [1, 2])
def test_partial_sums_monotone_and_decelerating(dim):
    s = partial_sums(4.0, 200, dim)
    steps = np.diff(s)
    assert np.all(steps > 0)
    assert np.all(steps[1:] / steps[:-1] < 1)


def test_series_decrease_with_alpha():
    one = [i_bar_1(a, terms=500).value for a in (2, 3, 4, 5, 6, 8, 12)]
    two = [i_bar_2(a, terms=500).value for a in (3, 4, 5, 6, 7, 9, 14)]
    assert one == sorted(one, reverse=True) and one[-1] > 2
    assert two == sorted(two, reverse=True) and two[-1] > 6


def test_i_bound_adds_tail():
    r = i_bar_2(4.0, tolerance=1e-9)
    assert i_bound(4.0, 2) == r.value + r.truncation_estimate
    with pytest.raises(ValueError):
        i_bound(4.0, 3)


def test_hex_rings_population():
    pts = hex_ring_points(4.0, 4)
    radii = np.floor(np.cumsum([lower_bound_separation(4.0, k)[0] for k in range(1, 5)])).astype(int)
    assert len(pts) == 6 * radii.sum()
    # the origin node is not part of any ring
    assert np.min(np.hypot(pts[:, 0], pts[:, 1])) >= radii[0] * math.sqrt(3) / 2 - 1e-12


@pytest.mark.parametrize("alpha,dim", [(3.0, 2), (2.5, 2), (2.0, 1)])
def test_i_bound_slow_series_stays_an_upper_bound(alpha, dim):
    # the tolerance is out of reach here; the budgeted sum plus its tail still bounds the limit
    small = i_bound(alpha, dim, max_terms=10_000)
    big = i_bound(alpha, dim)
    oracle = series_i2(alpha, 150) if dim == 2 else series_i1(alpha, 150)
    longer = (i_bar_2 if dim == 2 else i_bar_1)(alpha, terms=8_000_000).value
    assert oracle < longer < big <= small
