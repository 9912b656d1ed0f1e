"""Single-pass evaluation of a compiled schedule.

Every temporal node keeps an *origin set*: the past instants t' that could
still witness its window, i.e. points where the origin operand held and the
continuation operand has held ever since.  Previous is the window [0:1],
Once is Since with an always-true continuation and Historically tracks
violations (origin = child is false) and negates.  The node holds at t when
some origin t' satisfies t - hi <= t' < t - lo.

Origin sets live in the double-buffered arena: each step reads the node's
set from ``B_prev`` and appends the updated set at the cursor of ``B_cur``.
Discrete outputs are scalar lanes; dense outputs are interval sets written
to the arena as well.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .arena import (
    ERR_CAPACITY,
    ERR_DOUBLE_WRITE,
    ERR_NODE_RESERVATION,
    R_CUR,
    R_CURSOR,
    R_DEBUG,
    R_ERR,
    R_ERR_NODE,
    R_ERR_SLOT,
    R_HIGH_WATER,
    R_STEP,
    AllocationProbe,
    DoubleBufferedArena,
)
from .compiler import (
    F_HI,
    F_KIND,
    F_LEFT,
    F_LO,
    F_OUT,
    F_PRED,
    F_RIGHT,
    F_STATE,
    CompiledMonitor,
    TimeModel,
)
from .errors import ArenaOverflowError, DataError, WeftError
from .intervals import INF, _complement, _intersect, _union, push, sat_add
from .syntax import Kind

K_FALSE = int(Kind.FALSE)
K_ATOM = int(Kind.ATOM)
K_NOT = int(Kind.NOT)
K_AND = int(Kind.AND)
K_OR = int(Kind.OR)
K_PREVIOUS = int(Kind.PREVIOUS)
K_SINCE = int(Kind.SINCE)
K_ONCE = int(Kind.ONCE)
K_HIST = int(Kind.HISTORICALLY)


# ------------------------------------------------------------------ kernels


@njit(cache=True, inline="always")
def _fail(regs, code, node, slot):
    regs[R_ERR] = code
    regs[R_ERR_NODE] = node
    regs[R_ERR_SLOT] = slot


@njit(cache=True, inline="always")
def _commit(bufs, stamps, regs, cur, off, n, node):
    end = off + n
    if regs[R_DEBUG] != 0:
        stamp = regs[R_STEP] + 1
        for slot in range(off, end):
            if stamps[cur, slot] == stamp:
                _fail(regs, ERR_DOUBLE_WRITE, node, slot)
                return False
            stamps[cur, slot] = stamp
    regs[R_CURSOR] = end
    if end > regs[R_HIGH_WATER]:
        regs[R_HIGH_WATER] = end
    return True


@njit(cache=True, inline="always")
def _discrete_temporal(sched, bufs, stamps, regs, state_h, lane, state_max, i, k, left, cur, prv, cap, t):
    lo = sched[i, F_LO]
    hi = sched[i, F_HI]
    if k == K_SINCE:
        x = lane[left]
        o = lane[sched[i, F_RIGHT]]
    elif k == K_HIST:
        x = 1
        o = 1 - lane[left]
    else:
        x = 1
        o = lane[left]
    poff = state_h[prv, i, 0]
    pend = poff + state_h[prv, i, 1]

    hit = 0
    if t > lo:
        top = t - lo - 1
        bot = 0
        if hi != INF and t > hi:
            bot = t - hi
        for j in range(poff, pend):
            if bufs[prv, j, 0] > top:
                break
            if bufs[prv, j, 1] > bot:
                hit = 1
                break
    lane[i] = 1 - hit if k == K_HIST else hit

    off = regs[R_CURSOR]
    res = sched[i, F_STATE]
    if off + res > cap:
        _fail(regs, ERR_CAPACITY, i, off)
        return False
    dst = bufs[cur, off:off + res]
    n = 0
    if lo == 0 and hi != INF:
        # the window ends at t-1, so the latest origin decides every future output
        if hi == 0:
            n = 0
        elif o != 0:
            n = push(dst, 0, t, t + 1)
        elif x != 0 and pend > poff:
            last = bufs[prv, pend - 1, 1] - 1
            if last >= t + 1 - hi:
                n = push(dst, 0, last, last + 1)
    else:
        if x != 0:
            if hi == INF:
                if pend > poff:
                    b0 = bufs[prv, poff, 0]
                    n = push(dst, 0, b0, b0 + 1)
            else:
                # rows are sorted, so only a prefix expires; the rest is a block copy
                keep = t + 1 - hi
                j = poff
                while j < pend and bufs[prv, j, 1] <= keep:
                    j += 1
                n = pend - j
                if n > res:
                    n = -1
                elif n > 0:
                    for c in range(n):
                        dst[c, 0] = bufs[prv, j + c, 0]
                        dst[c, 1] = bufs[prv, j + c, 1]
                    if dst[0, 0] < keep:
                        dst[0, 0] = keep
        if o != 0:
            if hi == INF:
                if n == 0:
                    n = push(dst, 0, t, t + 1)
            elif hi >= 1:
                n = push(dst, n, t, t + 1)
    if n < 0:
        _fail(regs, ERR_NODE_RESERVATION, i, off)
        return False
    state_h[cur, i, 0] = off
    state_h[cur, i, 1] = n
    if n > state_max[i]:
        state_max[i] = n
    return _commit(bufs, stamps, regs, cur, off, n, i)


@njit(cache=True, inline="always")
def _discrete_step(sched, bufs, stamps, regs, state_h, lane, evals, state_max, vals, t):
    cur = regs[R_CUR]
    prv = 1 - cur
    cap = bufs.shape[1]
    for i in range(sched.shape[0]):
        evals[i] += 1
        k = sched[i, F_KIND]
        left = sched[i, F_LEFT]
        if k == K_ATOM:
            lane[i] = vals[sched[i, F_PRED]]
        elif k == K_NOT:
            lane[i] = 1 - lane[left]
        elif k == K_AND:
            lane[i] = lane[left] & lane[sched[i, F_RIGHT]]
        elif k == K_OR:
            lane[i] = lane[left] | lane[sched[i, F_RIGHT]]
        elif k == K_FALSE:
            lane[i] = 0
        elif not _discrete_temporal(sched, bufs, stamps, regs, state_h, lane, state_max,
                                    i, k, left, cur, prv, cap, t):
            return
    regs[R_CUR] = prv
    regs[R_CURSOR] = 0
    regs[R_STEP] += 1


@njit(cache=True)
def _run_discrete(sched, roots, bufs, stamps, regs, state_h, lane, evals, state_max,
                  values, t0, out):
    for s in range(values.shape[0]):
        _discrete_step(sched, bufs, stamps, regs, state_h, lane, evals, state_max,
                       values[s], t0 + s)
        if regs[R_ERR] != 0:
            return s
        for k in range(roots.shape[0]):
            out[s, k] = lane[roots[k]]
    return values.shape[0]


@njit(cache=True, inline="always")
def _emit_mark(out, n, p, q, lo, hi, cutoff, s, e):
    # outputs of origins [p, q): window [p+lo+1, q+hi), cut after instant `cutoff`
    if hi <= lo:
        return n
    wb = sat_add(p, lo + 1)
    we = INF if hi == INF else sat_add(q, hi)
    if cutoff != INF and we > cutoff + 1:
        we = cutoff + 1
    if wb < s:
        wb = s
    if we > e:
        we = e
    return push(out, n, wb, we)


@njit(cache=True)
def _emit_range(out, n, origins, r0, r1, lo, hi, cutoff, s, e):
    for j in range(origins.shape[0]):
        b = max(origins[j, 0], r0)
        q = min(origins[j, 1], r1)
        if b < q:
            n = _emit_mark(out, n, b, q, lo, hi, cutoff, s, e)
            if n < 0:
                return -1
    return n


@njit(cache=True)
def _last_begin_at_most(rows, x):
    """Index of the last row with begin <= x, or -1."""
    lo, hi = 0, rows.shape[0]
    while lo < hi:
        mid = (lo + hi) // 2
        if rows[mid, 0] <= x:
            lo = mid + 1
        else:
            hi = mid
    return lo - 1


@njit(cache=True)
def _first_end_after(rows, x):
    """Index of the first row with end > x (rows.shape[0] if none)."""
    lo, hi = 0, rows.shape[0]
    while lo < hi:
        mid = (lo + hi) // 2
        if rows[mid, 1] > x:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit(cache=True)
def _temporal_output(lo, hi, prev, origins, breaks, s, e, out):
    """Output of a temporal node over the segment [s, e).

    ``breaks`` are the instants in the segment where the continuation operand
    fails.  An origin t' survives up to the first break after it, so origins
    are grouped by that cut-off instant.
    """
    nb = breaks.shape[0]
    cut = breaks[0, 0] if nb > 0 else INF
    n = 0
    # windows of carried origins up to s-lo-1 are all clipped to start at s;
    # the last of them reaches furthest, so the earlier ones add nothing
    j = max(_last_begin_at_most(prev, s - lo - 1), 0)
    while j < prev.shape[0]:
        if sat_add(prev[j, 0], lo + 1) >= e:
            break
        n = _emit_mark(out, n, prev[j, 0], prev[j, 1], lo, hi, cut, s, e)
        if n < 0:
            return -1
        j += 1
    n = _emit_range(out, n, origins, s, cut, lo, hi, cut, s, e)
    for f in range(nb):
        u = breaks[f, 0]
        v = breaks[f, 1]
        # origins inside a break run (except its last instant) die one step later
        if lo == 0 and hi >= 1:
            for j in range(origins.shape[0]):
                b = max(origins[j, 0], u)
                q = min(origins[j, 1], v - 1)
                if b < q:
                    n = push(out, n, b + 1, q + 1)
        nxt = breaks[f + 1, 0] if f + 1 < nb else INF
        n = _emit_range(out, n, origins, v - 1, nxt, lo, hi, nxt, s, e)
        if n < 0:
            return -1
    return n


@njit(cache=True)
def _temporal_state(hi, prev, origins, breaks, e, out):
    """Origin set carried past the segment end, trimmed to the live window."""
    nb = breaks.shape[0]
    # a break discards everything before the last instant of the last break run
    r0 = breaks[nb - 1, 1] - 1 if nb > 0 else -1
    if hi == INF:
        # only the earliest surviving origin matters
        if nb == 0 and prev.shape[0] > 0:
            return push(out, 0, prev[0, 0], prev[0, 0] + 1)
        for j in range(origins.shape[0]):
            b = max(origins[j, 0], r0)
            if b < origins[j, 1]:
                return push(out, 0, b, b + 1)
        return 0
    keep = e - hi
    n = 0
    if nb == 0:
        j = _first_end_after(prev, keep)
        n = prev.shape[0] - j
        if n > out.shape[0]:
            return -1
        for c in range(n):
            out[c, 0] = prev[j + c, 0]
            out[c, 1] = prev[j + c, 1]
        if n > 0 and out[0, 0] < keep:
            out[0, 0] = keep
    for j in range(origins.shape[0]):
        n = push(out, n, max(origins[j, 0], r0, keep), origins[j, 1])
        if n < 0:
            return -1
    return n


@njit(cache=True, inline="always")
def _dense_step(sched, bufs, stamps, regs, state_h, out_h, scratch, evals, state_max,
                vals, s, e):
    cur = regs[R_CUR]
    prv = 1 - cur
    cap = bufs.shape[1]
    for i in range(sched.shape[0]):
        evals[i] += 1
        k = sched[i, F_KIND]
        left = sched[i, F_LEFT]
        right = sched[i, F_RIGHT]
        res = sched[i, F_OUT]
        off = regs[R_CURSOR]
        if off + res > cap:
            _fail(regs, ERR_CAPACITY, i, off)
            return
        dst = bufs[cur, off:off + res]
        temporal = k >= K_PREVIOUS
        if k == K_ATOM:
            n = 0
            if vals[sched[i, F_PRED]] != 0:
                n = push(dst, 0, s, e)
        elif k == K_FALSE:
            n = 0
        elif k == K_NOT:
            a = bufs[cur, out_h[left, 0]:out_h[left, 0] + out_h[left, 1]]
            n = _complement(a, s, e, dst)
        elif k == K_AND or k == K_OR:
            a = bufs[cur, out_h[left, 0]:out_h[left, 0] + out_h[left, 1]]
            b = bufs[cur, out_h[right, 0]:out_h[right, 0] + out_h[right, 1]]
            if k == K_AND:
                n = _intersect(a, b, dst)
            else:
                n = _union(a, b, dst)
        else:
            lo = sched[i, F_LO]
            hi = sched[i, F_HI]
            child = bufs[cur, out_h[left, 0]:out_h[left, 0] + out_h[left, 1]]
            poff = state_h[prv, i, 0]
            prev = bufs[prv, poff:poff + state_h[prv, i, 1]]
            lk = sched[left, F_OUT] + 1
            nb = 0
            if k == K_SINCE:
                breaks = scratch[0:lk]
                nb = _complement(child, s, e, breaks)
                origins = bufs[cur, out_h[right, 0]:out_h[right, 0] + out_h[right, 1]]
                n = _temporal_output(lo, hi, prev, origins, breaks[:nb], s, e, dst)
            elif k == K_HIST:
                breaks = scratch[0:0]
                viol = scratch[0:lk]
                nv = _complement(child, s, e, viol)
                origins = viol[:max(nv, 0)]
                tmp = scratch[lk:]
                n = _temporal_output(lo, hi, prev, origins, breaks, s, e, tmp)
                if n >= 0:
                    n = _complement(tmp[:n], s, e, dst)
            else:
                breaks = scratch[0:0]
                origins = child
                n = _temporal_output(lo, hi, prev, origins, breaks, s, e, dst)
        if n < 0:
            _fail(regs, ERR_NODE_RESERVATION, i, off)
            return
        out_h[i, 0] = off
        out_h[i, 1] = n
        if not _commit(bufs, stamps, regs, cur, off, n, i):
            return
        if temporal:
            soff = regs[R_CURSOR]
            sres = sched[i, F_STATE]
            if soff + sres > cap:
                _fail(regs, ERR_CAPACITY, i, soff)
                return
            sn = _temporal_state(hi, prev, origins, breaks[:nb], e, bufs[cur, soff:soff + sres])
            if sn < 0:
                _fail(regs, ERR_NODE_RESERVATION, i, soff)
                return
            state_h[cur, i, 0] = soff
            state_h[cur, i, 1] = sn
            if sn > state_max[i]:
                state_max[i] = sn
            if not _commit(bufs, stamps, regs, cur, soff, sn, i):
                return
    regs[R_CUR] = prv
    regs[R_CURSOR] = 0
    regs[R_STEP] += 1


@njit(cache=True)
def _run_dense(sched, roots, bufs, stamps, regs, state_h, out_h, scratch, evals, state_max,
               ends, values, start, open_iv, emit):
    """Evaluate consecutive segments, coalescing each property's verdict intervals.

    Finalized intervals are appended to ``emit`` as (property, begin, end)
    rows.  Stops early when ``emit`` might overflow.  Returns the number of
    segments consumed and rows emitted.
    """
    m = roots.shape[0]
    need = 0
    for k in range(m):
        need += sched[roots[k], F_OUT] + 1
    ne = 0
    s = start
    for g in range(ends.shape[0]):
        if ne + need > emit.shape[0]:
            return g, ne
        e = ends[g]
        _dense_step(sched, bufs, stamps, regs, state_h, out_h, scratch, evals, state_max,
                    values[g], s, e)
        if regs[R_ERR] != 0:
            return g, ne
        buf = 1 - regs[R_CUR]
        for k in range(m):
            node = roots[k]
            off = out_h[node, 0]
            for j in range(off, off + out_h[node, 1]):
                b = bufs[buf, j, 0]
                q = bufs[buf, j, 1]
                if open_iv[k, 0] >= 0 and open_iv[k, 1] == b:
                    open_iv[k, 1] = q
                else:
                    if open_iv[k, 0] >= 0:
                        emit[ne, 0] = k
                        emit[ne, 1] = open_iv[k, 0]
                        emit[ne, 2] = open_iv[k, 1]
                        ne += 1
                    open_iv[k, 0] = b
                    open_iv[k, 1] = q
            if open_iv[k, 0] >= 0 and open_iv[k, 1] < e:
                emit[ne, 0] = k
                emit[ne, 1] = open_iv[k, 0]
                emit[ne, 2] = open_iv[k, 1]
                ne += 1
                open_iv[k, 0] = -1
        s = e
    return ends.shape[0], ne


# ------------------------------------------------------------ Python facade


@dataclass(frozen=True)
class StepInput:
    time: int
    values: tuple[bool, ...]


@dataclass(frozen=True)
class Verdicts:
    """Per-property verdicts for one step (discrete) or one segment (dense)."""

    time: int
    values: tuple[bool, ...] | None = None
    end: int | None = None
    intervals: tuple[np.ndarray, ...] | None = None


_ERR_TEXT = {
    ERR_CAPACITY: "arena capacity exceeded",
    ERR_NODE_RESERVATION: "node slot reservation exceeded",
    ERR_DOUBLE_WRITE: "arena slot written twice in one step",
}

EMIT_CAPACITY = 1 << 16


class EvalSession:
    """One evaluation of a compiled monitor over one trace.

    The arena and all per-node bookkeeping are provisioned here, once; the
    kernels never allocate afterwards.  ``alloc_counter`` reports heap
    allocations observed inside evaluation kernels since construction.
    """

    def __init__(self, monitor: CompiledMonitor, debug: bool = False, track_allocations: bool = True):
        self.monitor = monitor
        self.dense = monitor.time_model == TimeModel.DENSE
        self.sched = monitor.table()
        self.roots = monitor.root_array()
        n_nodes = monitor.node_count
        m = monitor.property_count
        self.n_predicates = len(monitor.predicates)
        self.arena = DoubleBufferedArena(monitor.arena_capacity, monitor.scratch_capacity, debug)
        self.state_h = np.zeros((2, n_nodes, 2), dtype=np.int64)
        self.out_h = np.zeros((n_nodes, 2), dtype=np.int64)
        self.lane = np.zeros(n_nodes, dtype=np.uint8)
        self.evals = np.zeros(n_nodes, dtype=np.int64)
        self.state_max = np.zeros(n_nodes, dtype=np.int64)
        self.open_iv = np.full((m, 2), -1, dtype=np.int64)
        self.emit = np.zeros((max(EMIT_CAPACITY, 4 * self._emit_need()), 3), dtype=np.int64)
        self.now = 0
        self.steps = 0
        self._broken: str | None = None
        # single-step buffers
        self._row = np.zeros((1, self.n_predicates), dtype=np.uint8)
        self._out = np.zeros((1, m), dtype=np.uint8)
        self._end = np.zeros(1, dtype=np.int64)
        self._tmp_open = np.full((m, 2), -1, dtype=np.int64)
        self._tmp_emit = np.zeros((self._emit_need(), 3), dtype=np.int64)
        self.probe = None
        if track_allocations:
            self.probe = AllocationProbe()
            self.probe.calibrate(self._empty_call)

    def _emit_need(self) -> int:
        return int(sum(self.sched[r, F_OUT] + 1 for r in self.roots))

    def _empty_call(self):
        if self.dense:
            ends = np.zeros(0, dtype=np.int64)
            vals = np.zeros((0, self.n_predicates), dtype=np.uint8)
            self._dense_kernel(ends, vals, self._tmp_open, self._tmp_emit)
        else:
            vals = np.zeros((0, self.n_predicates), dtype=np.uint8)
            self._discrete_kernel(vals, 0, np.zeros((0, len(self.roots)), dtype=np.uint8))

    # raw kernel calls
    def _discrete_kernel(self, values, t0, out):
        a = self.arena
        return _run_discrete(self.sched, self.roots, a.buffers, a.stamps, a.regs, self.state_h,
                             self.lane, self.evals, self.state_max, values, t0, out)

    def _dense_kernel(self, ends, values, open_iv, emit):
        a = self.arena
        return _run_dense(self.sched, self.roots, a.buffers, a.stamps, a.regs, self.state_h,
                          self.out_h, a.scratch, self.evals, self.state_max, ends, values,
                          self.now, open_iv, emit)

    def _call(self, fn):
        if self.probe is None:
            return fn()
        result, delta = self.probe.measure(fn)
        self.arena.alloc_counter += delta
        return result

    def _check(self):
        regs = self.arena.regs
        if regs[R_ERR] != 0:
            node = int(regs[R_ERR_NODE])
            rec = self.monitor.schedule[node]
            msg = (f"{_ERR_TEXT.get(int(regs[R_ERR]), 'kernel error')} at node {node} "
                   f"({rec.kind.name}) during step {self.steps} (slot {int(regs[R_ERR_SLOT])})")
            self._broken = msg
            raise ArenaOverflowError(msg)

    def _ensure_usable(self, dense: bool):
        if self._broken:
            raise WeftError(f"session is unusable after: {self._broken}")
        if dense != self.dense:
            raise WeftError(f"monitor was finalized for {self.monitor.time_model.value} time")

    @property
    def alloc_counter(self) -> int:
        return self.arena.alloc_counter

    # discrete ---------------------------------------------------------------

    def _expect_discrete_time(self, t: int):
        expected = self.now + 1 if self.steps else 0
        if t != expected:
            kind = "regression" if t < expected else "gap"
            raise DataError(f"time {kind}: expected step {expected}, got {t}")

    def update_discrete(self, step: StepInput) -> Verdicts:
        self._ensure_usable(dense=False)
        self._expect_discrete_time(step.time)
        if len(step.values) != self.n_predicates:
            raise DataError(f"expected {self.n_predicates} predicate values, got {len(step.values)}")
        self._row[0, :] = step.values
        self._call(lambda: self._discrete_kernel(self._row, step.time, self._out))
        self._check()
        self.now = step.time
        self.steps += 1
        return Verdicts(step.time, tuple(bool(v) for v in self._out[0]))

    def run_discrete(self, values: np.ndarray, t0: int | None = None, out: np.ndarray | None = None) -> np.ndarray:
        """Evaluate consecutive steps ``t0, t0+1, ...``; returns (steps, m) uint8 verdicts."""
        self._ensure_usable(dense=False)
        values = np.ascontiguousarray(values, dtype=np.uint8)
        if values.ndim != 2 or values.shape[1] != self.n_predicates:
            raise DataError(f"expected a (steps, {self.n_predicates}) predicate matrix")
        if t0 is None:
            t0 = self.now + 1 if self.steps else 0
        if len(values) == 0:
            return np.zeros((0, len(self.roots)), dtype=np.uint8)
        self._expect_discrete_time(t0)
        if out is None:
            out = np.zeros((len(values), len(self.roots)), dtype=np.uint8)
        done = self._call(lambda: self._discrete_kernel(values, t0, out))
        self.steps += done
        self.now = t0 + done - 1
        self._check()
        return out

    # dense ------------------------------------------------------------------

    def _check_segments(self, ends: np.ndarray):
        if len(ends) == 0:
            return
        if ends[0] <= self.now:
            raise DataError(f"segment end {int(ends[0])} does not advance past time {self.now}")
        if len(ends) > 1 and np.any(np.diff(ends) <= 0):
            raise DataError("segment ends must be strictly increasing")
        if ends[-1] >= INF:
            raise DataError("timestamp out of range")

    def update_dense(self, segment_end: int, values) -> Verdicts:
        """Consume one segment ``[now, segment_end)`` with constant predicate values."""
        self._ensure_usable(dense=True)
        if len(values) != self.n_predicates:
            raise DataError(f"expected {self.n_predicates} predicate values, got {len(values)}")
        self._end[0] = segment_end
        self._check_segments(self._end)
        self._row[0, :] = values
        self._tmp_open[:] = -1
        begin = self.now
        self._call(lambda: self._dense_kernel(self._end, self._row, self._tmp_open, self._tmp_emit))
        self._check()
        self.now = segment_end
        self.steps += 1
        return Verdicts(begin, end=segment_end, intervals=self._root_outputs())

    def run_dense(self, ends: np.ndarray, values: np.ndarray) -> np.ndarray:
        """Consume consecutive segments; returns finalized (property, begin, end) rows.

        Verdict intervals are coalesced across segment boundaries; intervals
        still open at the last segment end stay pending until :meth:`flush_dense`.
        """
        self._ensure_usable(dense=True)
        ends = np.ascontiguousarray(ends, dtype=np.int64)
        values = np.ascontiguousarray(values, dtype=np.uint8)
        if values.shape != (len(ends), self.n_predicates):
            raise DataError(f"expected a ({len(ends)}, {self.n_predicates}) predicate matrix")
        self._check_segments(ends)
        chunks = []
        pos = 0
        while pos < len(ends):
            done, ne = self._call(lambda: self._dense_kernel(ends[pos:], values[pos:], self.open_iv, self.emit))
            self.steps += done
            if done:
                self.now = int(ends[pos + done - 1])
            pos += done
            chunks.append(self.emit[:ne].copy())
            self._check()
        if not chunks:
            return np.zeros((0, 3), dtype=np.int64)
        return np.concatenate(chunks)

    def flush_dense(self) -> np.ndarray:
        rows = [(k, b, e) for k, (b, e) in enumerate(self.open_iv) if b >= 0]
        self.open_iv[:] = -1
        return np.asarray(rows, dtype=np.int64).reshape(-1, 3)

    def _root_outputs(self) -> tuple[np.ndarray, ...]:
        buf = 1 - self.arena.current
        views = []
        for r in self.roots:
            off, n = self.out_h[r]
            views.append(self.arena.buffers[buf, off:off + n].copy())
        return tuple(views)

    # queries ----------------------------------------------------------------

    def verdict_for(self, k: int):
        if not 0 <= k < len(self.roots):
            raise IndexError(f"property index {k} out of range 0..{len(self.roots) - 1}")
        if self.steps == 0:
            raise WeftError("no step consumed")
        if self.dense:
            return self._root_outputs()[k]
        return bool(self.lane[self.roots[k]])

    def state_of(self, node: int) -> np.ndarray:
        """Copy of a node's persistent origin set as of the last completed step."""
        buf = 1 - self.arena.current
        off, n = self.state_h[buf, node]
        if self.steps == 0 or not self.monitor.schedule[node].kind >= Kind.PREVIOUS:
            return np.zeros((0, 2), dtype=np.int64)
        return self.arena.buffers[buf, off:off + n].copy()

    def stats(self) -> dict:
        return {
            "steps": self.steps,
            "nodes": self.monitor.node_count,
            "capacity": self.arena.capacity,
            "high_water": self.arena.high_water,
            "alloc_counter": self.arena.alloc_counter,
        }
