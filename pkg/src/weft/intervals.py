"""Canonical half-open interval sets over the integer timeline.

A set is an ``(k, 2)`` int64 array of ``[begin, end)`` rows, strictly ordered,
pairwise disjoint and non-adjacent (``end_i < begin_{i+1}``).  ``INF`` stands
for an unbounded end.

The ``_``-prefixed kernels are compiled with numba and write into a
caller-provided output view, returning the number of rows written or ``-1``
when the view is too small.  They never allocate, so the evaluation engine
can call them on slices of its arena.  The public wrappers raise
:class:`CapacityError` instead and return the written prefix of ``out``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import CapacityError
from .syntax import TimeBound

INF = (1 << 63) - 1

_DTYPE = np.int64


@njit(cache=True, inline="always")
def sat_add(x, y):
    if x >= INF - y:
        return INF
    return x + y


@njit(cache=True, inline="always")
def push(out, n, b, e):
    """Append ``[b, e)`` coalescing with the last row; rows arrive sorted by begin."""
    if n < 0 or b >= e:
        return n
    if n > 0 and b <= out[n - 1, 1]:
        if e > out[n - 1, 1]:
            out[n - 1, 1] = e
        return n
    if n >= out.shape[0]:
        return -1
    out[n, 0] = b
    out[n, 1] = e
    return n + 1


@njit(cache=True)
def _union(a, b, out):
    n = 0
    i = 0
    j = 0
    while i < a.shape[0] or j < b.shape[0]:
        if j >= b.shape[0] or (i < a.shape[0] and a[i, 0] <= b[j, 0]):
            n = push(out, n, a[i, 0], a[i, 1])
            i += 1
        else:
            n = push(out, n, b[j, 0], b[j, 1])
            j += 1
        if n < 0:
            return -1
    return n


@njit(cache=True)
def _intersect(a, b, out):
    n = 0
    i = 0
    j = 0
    while i < a.shape[0] and j < b.shape[0]:
        lo = max(a[i, 0], b[j, 0])
        hi = min(a[i, 1], b[j, 1])
        if lo < hi:
            n = push(out, n, lo, hi)
            if n < 0:
                return -1
        if a[i, 1] < b[j, 1]:
            i += 1
        else:
            j += 1
    return n


@njit(cache=True)
def _complement(a, lo, hi, out):
    n = 0
    cur = lo
    for i in range(a.shape[0]):
        if cur >= hi:
            break
        if a[i, 1] <= cur:
            continue
        if a[i, 0] > cur:
            n = push(out, n, cur, min(a[i, 0], hi))
            if n < 0:
                return -1
        cur = a[i, 1]
    if cur < hi:
        n = push(out, n, cur, hi)
    return n


@njit(cache=True)
def _mark(origins, lo, hi, out):
    # window of an origin t' is [t'+lo+1, t'+hi+1); empty when hi <= lo
    if hi <= lo:
        return 0
    n = 0
    for i in range(origins.shape[0]):
        b = sat_add(origins[i, 0], sat_add(lo, 1))
        e = INF if hi == INF else sat_add(origins[i, 1], hi)
        n = push(out, n, b, e)
        if n < 0:
            return -1
    return n


@njit(cache=True)
def _trim(a, t, out):
    n = 0
    for i in range(a.shape[0]):
        if a[i, 1] <= t:
            continue
        n = push(out, n, max(a[i, 0], t), a[i, 1])
        if n < 0:
            return -1
    return n


@njit(cache=True)
def _contains(a, t):
    for i in range(a.shape[0]):
        if a[i, 0] > t:
            return False
        if t < a[i, 1]:
            return True
    return False


# ------------------------------------------------------------ Python surface


def from_pairs(pairs) -> np.ndarray:
    arr = np.asarray(list(pairs), dtype=_DTYPE).reshape(-1, 2)
    return np.ascontiguousarray(arr)


def to_pairs(view) -> list[tuple[int, int]]:
    return [(int(b), int(e)) for b, e in view]


def empty(capacity: int) -> np.ndarray:
    return np.zeros((capacity, 2), dtype=_DTYPE)


def is_canonical(view) -> bool:
    prev_end = None
    for b, e in view:
        if not b < e:
            return False
        if prev_end is not None and not prev_end < b:
            return False
        prev_end = e
    return True


def _checked(n: int, out, op: str) -> np.ndarray:
    if n < 0:
        raise CapacityError(f"{op}: output view of {out.shape[0]} slots is too small")
    return out[:n]


def _window_params(bound) -> tuple[int, int]:
    if isinstance(bound, TimeBound):
        return bound.lower, INF if bound.upper is None else bound.upper
    lo, hi = bound
    return lo, INF if hi is None else hi


def union_into(a, b, out) -> np.ndarray:
    return _checked(_union(a, b, out), out, "union")


def intersect_into(a, b, out) -> np.ndarray:
    return _checked(_intersect(a, b, out), out, "intersect")


def complement_into(a, window, out) -> np.ndarray:
    """``window \\ a`` where ``window`` is a ``(begin, end)`` pair."""
    lo, hi = window
    return _checked(_complement(a, lo, hi, out), out, "complement")


def mark_into(origins, bound, out) -> np.ndarray:
    """Points t with some origin t' in ``origins`` and t-b <= t' < t-a."""
    lo, hi = _window_params(bound)
    return _checked(_mark(origins, lo, hi, out), out, "mark")


def trim_before(a, t: int, out) -> np.ndarray:
    return _checked(_trim(a, t, out), out, "trim")


def contains(a, t: int) -> bool:
    return bool(_contains(a, t))
