import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weft.errors import CapacityError
from weft.intervals import (
    INF,
    complement_into,
    contains,
    empty,
    from_pairs,
    intersect_into,
    is_canonical,
    mark_into,
    to_pairs,
    trim_before,
    union_into,
)
from weft.syntax import TimeBound

HORIZON = 64


def iv(*pairs):
    return from_pairs(pairs)


def points(view, horizon=HORIZON):
    return {t for b, e in to_pairs(view) for t in range(b, min(e, horizon))}


def from_points(pts):
    pairs = []
    for t in sorted(pts):
        if pairs and pairs[-1][1] == t:
            pairs[-1][1] = t + 1
        else:
            pairs.append([t, t + 1])
    return from_pairs(pairs)


point_sets = st.sets(st.integers(0, HORIZON - 1), max_size=40).map(from_points)


def test_union_examples():
    assert to_pairs(union_into(iv((1, 3)), iv((3, 5)), empty(2))) == [(1, 5)]
    assert to_pairs(union_into(iv(), iv((0, 2)), empty(1))) == [(0, 2)]
    # brute-force membership over 0..8 gives 0..7
    assert to_pairs(union_into(iv((0, 2), (6, 8)), iv((1, 7)), empty(3))) == [(0, 8)]


def test_intersect_examples():
    assert to_pairs(intersect_into(iv((0, 5)), iv((3, 9)), empty(2))) == [(3, 5)]
    assert to_pairs(intersect_into(iv((0, 5)), iv(), empty(1))) == []
    assert to_pairs(intersect_into(iv((0, 2), (4, 6)), iv((1, 5)), empty(3))) == [(1, 2), (4, 5)]


def test_complement_examples():
    assert to_pairs(complement_into(iv((2, 4)), (0, 6), empty(2))) == [(0, 2), (4, 6)]
    assert to_pairs(complement_into(iv(), (0, 6), empty(1))) == [(0, 6)]
    assert to_pairs(complement_into(iv((0, 6)), (0, 6), empty(1))) == []


def test_mark_examples():
    assert to_pairs(mark_into(iv((0, 1)), TimeBound(2, 3), empty(1))) == [(3, 4)]
    assert to_pairs(mark_into(iv((0, 1)), TimeBound(0, 10), empty(1))) == [(1, 11)]
    assert to_pairs(mark_into(iv(), TimeBound(1, 4), empty(1))) == []
    assert to_pairs(mark_into(iv((2, 5)), TimeBound(3, None), empty(1))) == [(6, INF)]


def test_mark_point_window_is_empty():
    # with strict quantification t-b <= t' < t-b no instant qualifies
    assert to_pairs(mark_into(iv((0, 10)), TimeBound(4, 4), empty(4))) == []


def test_mark_saturates():
    assert to_pairs(mark_into(iv((INF - 3, INF - 1)), TimeBound(5, 9), empty(1))) == []
    assert to_pairs(mark_into(iv((INF - 9, INF - 8)), TimeBound(0, 20), empty(1))) == [(INF - 8, INF)]


def test_trim_examples():
    assert to_pairs(trim_before(iv((0, 5)), 3, empty(1))) == [(3, 5)]
    assert to_pairs(trim_before(iv((0, 2)), 3, empty(1))) == []
    assert to_pairs(trim_before(iv((0, 2), (4, 6)), 2, empty(2))) == [(4, 6)]


def test_contains():
    a = iv((1, 3), (5, INF))
    assert [contains(a, t) for t in range(7)] == [False, True, True, False, False, True, True]


def test_capacity_overflow_raises():
    with pytest.raises(CapacityError):
        union_into(iv((0, 1)), iv((2, 3)), empty(1))
    with pytest.raises(CapacityError):
        complement_into(iv((2, 3)), (0, 6), empty(1))


def test_is_canonical():
    assert is_canonical(iv((0, 1), (2, 3)))
    assert not is_canonical(iv((0, 1), (1, 3)))
    assert not is_canonical(iv((2, 2)))
    assert not is_canonical(iv((4, 5), (0, 1)))


# ------------------------------------------------------------ properties


@given(point_sets, point_sets)
def test_union_pointwise(a, b):
    out = union_into(a, b, empty(len(a) + len(b)))
    assert is_canonical(out)
    assert points(out) == points(a) | points(b)


@given(point_sets, point_sets)
def test_intersect_pointwise(a, b):
    out = intersect_into(a, b, empty(len(a) + len(b)))
    assert is_canonical(out)
    assert points(out) == points(a) & points(b)


@given(point_sets, st.integers(0, HORIZON), st.integers(0, HORIZON))
def test_complement_pointwise(a, lo, hi):
    lo, hi = min(lo, hi), max(lo, hi)
    out = complement_into(a, (lo, hi), empty(len(a) + 1))
    assert is_canonical(out)
    assert points(out) == set(range(lo, hi)) - points(a)


@given(point_sets, st.integers(0, 10), st.one_of(st.none(), st.integers(0, 10)))
def test_mark_pointwise(origins, lo, width):
    hi = None if width is None else lo + width
    out = mark_into(origins, TimeBound(lo, hi), empty(max(1, len(origins))))
    assert is_canonical(out)
    horizon = 2 * HORIZON
    expected = {
        t for t in range(horizon)
        if any(tp < t - lo and (hi is None or t - hi <= tp) for tp in points(origins))
    }
    assert points(out, horizon) == expected


@given(point_sets, st.integers(0, HORIZON))
def test_trim_pointwise(a, t):
    out = trim_before(a, t, empty(max(1, len(a))))
    assert is_canonical(out)
    assert points(out) == {x for x in points(a) if x >= t}


@given(point_sets, point_sets)
def test_inputs_unchanged(a, b):
    a0, b0 = a.copy(), b.copy()
    union_into(a, b, empty(len(a) + len(b)))
    intersect_into(a, b, empty(len(a) + len(b)))
    assert np.array_equal(a, a0) and np.array_equal(b, b0)
