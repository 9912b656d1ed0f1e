import numpy as np
import pytest

from weft.arena import AllocationProbe, DoubleBufferedArena
from weft.errors import ArenaOverflowError, StaleHandleError


def test_bump_allocation():
    a = DoubleBufferedArena(100)
    h = a.alloc(3)
    assert (h.buffer, h.offset, h.length) == (0, 0, 3)
    assert a.cursor == 3
    h = a.alloc(5)
    assert h.offset == 3
    assert a.cursor == 8


def test_overflow_names_node_and_step():
    a = DoubleBufferedArena(100)
    with pytest.raises(ArenaOverflowError, match="node 7 at step 0"):
        a.alloc(101, node=7)
    assert a.cursor == 0


def test_swap_keeps_previous_contents():
    a = DoubleBufferedArena(10)
    h = a.alloc(2)
    a.write(h, [(1, 3), (5, 9)])
    a.swap()
    assert a.cursor == 0
    assert a.current == 1
    assert a.read(h).tolist() == [[1, 3], [5, 9]]


def test_double_swap_restores_roles():
    a = DoubleBufferedArena(10)
    a.swap()
    a.swap()
    assert a.current == 0


def test_high_water_survives_swap():
    a = DoubleBufferedArena(10)
    a.alloc(6)
    a.swap()
    a.alloc(2)
    assert a.high_water == 6


def test_read_current_below_cursor():
    a = DoubleBufferedArena(10)
    h = a.alloc(3)
    a.write(h, [(0, 1)])
    assert a.read(h)[0].tolist() == [0, 1]


def test_read_rejects_stale_handle():
    a = DoubleBufferedArena(10)
    h = a.alloc(1)
    a.swap()
    a.swap()
    with pytest.raises(StaleHandleError):
        a.read(h)


def test_write_only_into_current_step():
    a = DoubleBufferedArena(10)
    h = a.alloc(1)
    a.swap()
    with pytest.raises(StaleHandleError):
        a.write(h, [(0, 1)])


def test_no_clearing_on_swap():
    a = DoubleBufferedArena(4)
    h = a.alloc(1)
    a.write(h, [(7, 8)])
    a.swap()
    a.swap()
    # the old bytes are still there; only the role changed
    assert a.buffers[0, 0].tolist() == [7, 8]


def test_debug_detects_double_write():
    a = DoubleBufferedArena(4, debug=True)
    h = a.alloc(2)
    a.write(h, [(0, 1)])
    with pytest.raises(ArenaOverflowError, match="written twice"):
        a.write(h, [(0, 1)])


def test_allocation_probe_sees_kernel_allocations():
    from numba import njit

    @njit
    def allocating(n):
        total = 0
        for i in range(n):
            total += np.zeros(4, dtype=np.int64).sum() + i
        return total

    probe = AllocationProbe()
    probe.calibrate(lambda: allocating(0))
    _, delta = probe.measure(lambda: allocating(10))
    assert delta == 10
    _, delta = probe.measure(lambda: allocating(0))
    assert delta == 0
