"""Hash-consing compiler from formula trees to a shared execution schedule.

Formulas are interned bottom-up into a content-addressable node database so
structurally equal subformulas (across and within properties) map to a single
node id.  ``finalize`` freezes the database into a contiguous, topologically
ordered schedule plus one root index per registered property.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import CompileError
from .syntax import (
    COMMUTATIVE,
    TEMPORAL_BOUNDED,
    Formula,
    Kind,
    PredicateTable,
    TimeBound,
    parse_spec,
)

NONE = -1
INF = (1 << 63) - 1

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1
_ALL_ONES = _MASK64


class TimeModel(str, Enum):
    DISCRETE = "discrete"
    DENSE = "dense"


@dataclass(frozen=True)
class NodeDesc:
    kind: Kind
    left: int = NONE
    right: int = NONE
    bound: TimeBound | None = None
    name: str | None = None

    def canonical(self) -> "NodeDesc":
        if self.kind in COMMUTATIVE and self.left > self.right:
            return NodeDesc(self.kind, self.right, self.left, self.bound, self.name)
        return self


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK64
    return h


def _signature(d: NodeDesc) -> bytes:
    parts = [bytes([int(d.kind)])]
    if d.kind == Kind.ATOM:
        parts.append(d.name.encode("utf-8"))
    else:
        for child in (d.left, d.right):
            if child != NONE:
                parts.append(struct.pack("<Q", child))
        if d.kind in TEMPORAL_BOUNDED:
            upper = _ALL_ONES if d.bound.upper is None else d.bound.upper
            parts.append(struct.pack("<QQ", d.bound.lower, upper))
    return b"".join(parts)


def structural_hash(d: NodeDesc) -> int:
    """64-bit FNV-1a over the canonical byte signature of a node."""
    return fnv1a64(_signature(d.canonical()))


@dataclass
class NodeDatabase:
    by_hash: dict[int, list[int]] = field(default_factory=dict)
    nodes: list[NodeDesc] = field(default_factory=list)
    # Number of lookups answered from an existing node.
    hits: int = 0

    def __len__(self) -> int:
        return len(self.nodes)

    def intern(self, d: NodeDesc) -> int:
        d = d.canonical()
        for child in (d.left, d.right):
            if child != NONE and not 0 <= child < len(self.nodes):
                raise CompileError(f"child id {child} is not interned")
        h = structural_hash(d)
        bucket = self.by_hash.setdefault(h, [])
        for nid in bucket:
            # hash equality alone never suffices
            if self.nodes[nid] == d:
                self.hits += 1
                return nid
        nid = len(self.nodes)
        self.nodes.append(d)
        bucket.append(nid)
        return nid


def intern(db: NodeDatabase, d: NodeDesc) -> int:
    return db.intern(d)


def node_slots(kind: Kind, bound: TimeBound | None) -> int:
    """Interval slots reserved per buffer for a node's persistent state.

    A bounded window of b instants holds at most ceil(b/2) non-adjacent
    markings; one extra slot is headroom.  Unbounded windows coalesce into a
    single marking, and non-temporal or untimed nodes keep one scalar slot.
    """
    if kind in TEMPORAL_BOUNDED and bound.upper is not None:
        return -(-bound.upper // 2) + 1
    return 1


@dataclass(frozen=True)
class NodeRecord:
    kind: Kind
    left: int
    right: int
    bound: TimeBound | None
    state_slots: int
    output_slots: int
    name: str | None = None
    predicate: int = NONE


def buffer_capacity(schedule) -> int:
    """Slots needed by one arena buffer for one full evaluation pass."""
    return sum(r.state_slots + r.output_slots for r in schedule)


# Column layout of the packed schedule table handed to the kernels.
F_KIND, F_LEFT, F_RIGHT, F_LO, F_HI, F_PRED, F_STATE, F_OUT = range(8)
N_FIELDS = 8


def _window(rec: NodeRecord) -> tuple[int, int]:
    if rec.kind == Kind.PREVIOUS:
        return 0, 1
    if rec.kind in TEMPORAL_BOUNDED:
        hi = INF if rec.bound.upper is None else rec.bound.upper
        return rec.bound.lower, hi
    return 0, 0


@dataclass(frozen=True)
class CompiledMonitor:
    schedule: tuple[NodeRecord, ...]
    roots: tuple[int, ...]
    predicates: tuple[str, ...]
    time_model: TimeModel
    arena_capacity: int
    scratch_capacity: int
    texts: tuple[str, ...] = ()

    @property
    def node_count(self) -> int:
        return len(self.schedule)

    @property
    def property_count(self) -> int:
        return len(self.roots)

    def predicate_table(self) -> PredicateTable:
        return PredicateTable(self.predicates)

    def table(self) -> np.ndarray:
        """Packed read-only int64 schedule table, one row per record."""
        cached = self.__dict__.get("_table")
        if cached is None:
            cached = np.zeros((len(self.schedule), N_FIELDS), dtype=np.int64)
            for i, r in enumerate(self.schedule):
                lo, hi = _window(r)
                cached[i] = (int(r.kind), r.left, r.right, lo, hi, r.predicate,
                             r.state_slots, r.output_slots)
            cached.flags.writeable = False
            object.__setattr__(self, "_table", cached)
        return cached

    def root_array(self) -> np.ndarray:
        cached = self.__dict__.get("_roots")
        if cached is None:
            cached = np.asarray(self.roots, dtype=np.int64)
            cached.flags.writeable = False
            object.__setattr__(self, "_roots", cached)
        return cached

    def independent_node_counts(self) -> list[int]:
        """Node count each property would have if compiled on its own.

        Hash-consing a single formula yields exactly its distinct subterms,
        which are the nodes reachable from its root in the shared DAG.
        """
        return [len(_reachable(self.schedule, r)) for r in self.roots]

    def compression_ratio(self) -> float:
        return sum(self.independent_node_counts()) / self.node_count

    def dump(self) -> str:
        lines = []
        for i, r in enumerate(self.schedule):
            kids = ",".join(str(c) for c in (r.left, r.right) if c != NONE)
            label = r.kind.name if r.name is None else f"ATOM {r.name}"
            bound = "" if r.bound is None else f" {r.bound}"
            lines.append(f"{i:4d} {label}{bound} ({kids}) state={r.state_slots} out={r.output_slots}")
        return "\n".join(lines)


def _reachable(schedule, root: int) -> set[int]:
    seen, stack = set(), [root]
    while stack:
        i = stack.pop()
        if i in seen:
            continue
        seen.add(i)
        r = schedule[i]
        stack.extend(c for c in (r.left, r.right) if c != NONE)
    return seen


def _dense_output_slots(kind: Kind, left_k: int, right_k: int, state: int) -> int:
    """Static bound on intervals a node can output within one constant segment."""
    if kind == Kind.FALSE:
        return 0
    if kind == Kind.ATOM:
        return 1
    if kind == Kind.NOT:
        return left_k + 1
    if kind in (Kind.AND, Kind.OR):
        return left_k + right_k
    if kind == Kind.SINCE:
        # one output piece per origin piece; x-breaks split origin pieces
        breaks = left_k + 1
        return state + right_k + 2 * breaks
    if kind == Kind.HISTORICALLY:
        return state + (left_k + 1) + 1
    # Once, Previous
    return state + left_k


def _dense_scratch(kind: Kind, left_k: int, out_k: int) -> int:
    if kind == Kind.SINCE:
        return left_k + 1
    if kind == Kind.HISTORICALLY:
        return (left_k + 1) + out_k
    return 0


class MonitorBuilder:
    """Incremental registration of properties into one shared DAG."""

    def __init__(self):
        self.db = NodeDatabase()
        self.roots: list[int] = []
        self.predicates = PredicateTable()
        self.texts: list[str] = []
        self.finalized = False

    def _intern_formula(self, f: Formula) -> int:
        kids = [self._intern_formula(c) for c in f.children]
        if f.kind == Kind.IMPLIES:
            raise CompileError("formula must be normalized before registration")
        if f.kind == Kind.ATOM:
            self.predicates.add(f.name)
        left = kids[0] if kids else NONE
        right = kids[1] if len(kids) > 1 else NONE
        return self.db.intern(NodeDesc(f.kind, left, right, f.bound, f.name))

    def register_property(self, f: Formula, text: str | None = None) -> int:
        if self.finalized:
            raise CompileError("cannot register properties after finalize")
        root = self._intern_formula(f)
        self.roots.append(root)
        self.texts.append(text if text is not None else str(f))
        return len(self.roots) - 1

    def register_text(self, text: str) -> int:
        return self.register_property(parse_spec(text), text)

    @property
    def node_count(self) -> int:
        return len(self.db)

    def finalize(self, time_model: TimeModel | str = TimeModel.DISCRETE) -> CompiledMonitor:
        if self.finalized:
            raise CompileError("monitor already finalized")
        if not self.roots:
            raise CompileError("at least one property must be registered")
        time_model = TimeModel(time_model)
        dense = time_model == TimeModel.DENSE
        schedule = []
        scratch = 0
        for i, d in enumerate(self.db.nodes):
            # interning assigns ids bottom-up; verify rather than re-sort
            for child in (d.left, d.right):
                if child != NONE and child >= i:
                    raise CompileError(f"node {i} is scheduled before its child {child}")
            state = node_slots(d.kind, d.bound)
            out = 0
            if dense:
                lk = schedule[d.left].output_slots if d.left != NONE else 0
                rk = schedule[d.right].output_slots if d.right != NONE else 0
                out = _dense_output_slots(d.kind, lk, rk, state)
                scratch = max(scratch, _dense_scratch(d.kind, lk, out))
            pred = self.predicates.index[d.name] if d.kind == Kind.ATOM else NONE
            schedule.append(NodeRecord(d.kind, d.left, d.right, d.bound, state, out, d.name, pred))
        self.finalized = True
        return CompiledMonitor(
            schedule=tuple(schedule),
            roots=tuple(self.roots),
            predicates=tuple(self.predicates.names),
            time_model=time_model,
            arena_capacity=buffer_capacity(schedule),
            scratch_capacity=scratch,
            texts=tuple(self.texts),
        )


def register_property(builder: MonitorBuilder, f: Formula) -> int:
    return builder.register_property(f)


def finalize(builder: MonitorBuilder, time_model=TimeModel.DISCRETE) -> CompiledMonitor:
    return builder.finalize(time_model)


def compile_texts(texts, time_model=TimeModel.DISCRETE) -> CompiledMonitor:
    builder = MonitorBuilder()
    for t in texts:
        builder.register_text(t)
    return builder.finalize(time_model)


def compile_formulas(formulas, time_model=TimeModel.DISCRETE) -> CompiledMonitor:
    builder = MonitorBuilder()
    for f in formulas:
        builder.register_property(f)
    return builder.finalize(time_model)
