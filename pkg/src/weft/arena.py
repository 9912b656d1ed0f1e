"""Double-buffered interval arena with a bump write cursor.

Two contiguous buffers of ``capacity`` interval slots alternate between the
"previous step" and "current step" roles.  Writers bump-allocate from the
current buffer; ``swap`` exchanges roles and rewinds the cursor without
copying or clearing anything.

The mutable bookkeeping lives in a small int64 register file so the compiled
evaluation kernels and this Python wrapper share a single source of truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba.core.runtime import _nrt_python, rtsys

from .errors import ArenaOverflowError, StaleHandleError

# register file layout
R_CUR = 0  # index of B_cur
R_CURSOR = 1
R_HIGH_WATER = 2
R_STEP = 3  # swaps since creation
R_DEBUG = 4
R_ERR = 5
R_ERR_NODE = 6
R_ERR_SLOT = 7
N_REGS = 8

# kernel error codes
ERR_NONE = 0
ERR_NODE_RESERVATION = 1
ERR_CAPACITY = 2
ERR_DOUBLE_WRITE = 3


@dataclass(frozen=True)
class Handle:
    buffer: int
    offset: int
    length: int
    step: int


class AllocationProbe:
    """Counts heap allocations made by compiled kernels.

    Backed by the numba runtime's allocator statistics.  Every call from
    Python into a kernel wraps each array argument, which the runtime counts
    as an allocation; ``calibrate`` measures that fixed per-call cost so that
    ``measure`` reports only allocations made while the kernel runs.
    """

    def __init__(self):
        if not _nrt_python.memsys_stats_enabled():
            _nrt_python.memsys_enable_stats()
        self.boundary = 0

    @staticmethod
    def allocations() -> int:
        return rtsys.get_allocation_stats().alloc

    def calibrate(self, call) -> None:
        call()  # first call may compile
        before = self.allocations()
        call()
        self.boundary = self.allocations() - before

    def measure(self, call):
        before = self.allocations()
        result = call()
        delta = self.allocations() - before - self.boundary
        return result, delta


class DoubleBufferedArena:
    def __init__(self, capacity: int, scratch: int = 0, debug: bool = False):
        if capacity < 0:
            raise ValueError("capacity must be non-negative")
        self.capacity = capacity
        self.buffers = np.zeros((2, capacity, 2), dtype=np.int64)
        # step stamp of the last write per slot; backs the write-once check
        self.stamps = np.zeros((2, capacity), dtype=np.int64)
        self.scratch = np.zeros((scratch, 2), dtype=np.int64)
        self.regs = np.zeros(N_REGS, dtype=np.int64)
        self.regs[R_DEBUG] = int(debug)
        self.alloc_counter = 0

    # register accessors
    @property
    def current(self) -> int:
        return int(self.regs[R_CUR])

    @property
    def cursor(self) -> int:
        return int(self.regs[R_CURSOR])

    @property
    def high_water(self) -> int:
        return int(self.regs[R_HIGH_WATER])

    @property
    def step(self) -> int:
        return int(self.regs[R_STEP])

    @property
    def debug(self) -> bool:
        return bool(self.regs[R_DEBUG])

    def alloc(self, n: int, node: int | None = None) -> Handle:
        start = self.cursor
        if n < 0 or start + n > self.capacity:
            where = "" if node is None else f" for node {node}"
            raise ArenaOverflowError(
                f"arena overflow{where} at step {self.step}: "
                f"{start} + {n} slots exceeds capacity {self.capacity}"
            )
        end = start + n
        self.regs[R_CURSOR] = end
        if end > self.regs[R_HIGH_WATER]:
            self.regs[R_HIGH_WATER] = end
        return Handle(self.current, start, n, self.step)

    def write(self, handle: Handle, intervals) -> None:
        """Copy rows into a region allocated during the current step."""
        if handle.step != self.step or handle.buffer != self.current:
            raise StaleHandleError("can only write regions allocated in the current step")
        rows = np.asarray(intervals, dtype=np.int64).reshape(-1, 2)
        if len(rows) > handle.length:
            raise ArenaOverflowError(f"{len(rows)} rows do not fit a {handle.length}-slot region")
        lo = handle.offset
        stamps = self.stamps[handle.buffer, lo:lo + len(rows)]
        if self.debug and np.any(stamps == self.step + 1):
            raise ArenaOverflowError(f"slot written twice in step {self.step}")
        stamps[:] = self.step + 1
        self.buffers[handle.buffer, lo:lo + len(rows)] = rows

    def read(self, handle: Handle) -> np.ndarray:
        """Non-owning view of the region a handle addresses."""
        age = self.step - handle.step
        if age == 0:
            if handle.buffer != self.current or handle.offset + handle.length > self.cursor:
                raise StaleHandleError("handle points past the write cursor")
        elif age == 1:
            if handle.buffer == self.current:
                raise StaleHandleError("handle buffer does not match its step")
        else:
            raise StaleHandleError(f"handle from step {handle.step} is {age} swaps old")
        return self.buffers[handle.buffer, handle.offset:handle.offset + handle.length]

    def swap(self) -> None:
        self.regs[R_CUR] ^= 1
        self.regs[R_CURSOR] = 0
        self.regs[R_STEP] += 1

    def reset(self) -> None:
        self.regs[R_CUR] = 0
        self.regs[R_CURSOR] = 0
        self.regs[R_HIGH_WATER] = 0
        self.regs[R_STEP] = 0
        self.regs[R_ERR] = ERR_NONE
        self.stamps[:] = 0
