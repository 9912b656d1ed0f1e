"""Scenario and trace generators plus the sequential / and / multi harness.

Scenario templates (``k`` is the 1-based property index):

best-case-shared
    ``(historically(once[0:10] q -> (!p since r)) || once[0:k] p)``; only the
    small once term differs between properties.
nested-best
    ``historically(L_k)`` with ``L_1 = (p || q)`` and ``L_k = (L_{k-1} || s_k)``,
    ``s_k`` cycling through p, q, r.
worst-unique
    ``historically[0:k+20](once[0:k] p -> (q since[1:k+10] (r && p)))``: one
    template, every temporal bound unique to its property.
nested-worst
    ``N_k`` where ``N_0 = p`` and ``N_j = once[0:b](N_{j-1} && s_j)`` for
    j = 1..k, each level with its own bound ``b``; only the innermost
    ``(p && q)`` is common.
adversarial-alternating
    ``once[b:b] q`` with ``b = 2^(k+1) - 1`` (3, 7, 15, ...).
timescales
    12 soak templates: absent / always / recur / respond at scales 10, 100
    and 1000.
"""

from __future__ import annotations

import hashlib
import json
import statistics
import time
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from . import io as tio
from .compiler import CompiledMonitor, TimeModel, compile_texts
from .engine import EvalSession

SCENARIOS = (
    "best-case-shared",
    "nested-best",
    "worst-unique",
    "nested-worst",
    "adversarial-alternating",
    "timescales",
)
SHARING_SCENARIOS = SCENARIOS[:4]
DEFAULT_COUNTS = {"adversarial-alternating": 3, "timescales": 12}
PREDICATES = ("p", "q", "r")


class Config(str, Enum):
    SEQUENTIAL = "sequential"
    AND = "and"
    MULTI = "multi"


# ----------------------------------------------------------- scenarios


def _best_case_shared(count):
    core = "historically(once[0:10] q -> (!p since r))"
    return [f"({core} || once[0:{k}] p)" for k in range(1, count + 1)]


def _nested_best(count):
    cycle = ("p", "q", "r")
    out, chain = [], "(p || q)"
    for k in range(1, count + 1):
        if k > 1:
            chain = f"({chain} || {cycle[k % 3]})"
        out.append(f"historically{chain}")
    return out


def _worst_unique(count):
    return [f"historically[0:{k + 20}](once[0:{k}] p -> (q since[1:{k + 10}] (r && p)))"
            for k in range(1, count + 1)]


def _nested_worst(count):
    stride = count + 1
    cycle = ("q", "r", "p")
    out = []
    for k in range(1, count + 1):
        node = "p"
        for j in range(1, k + 1):
            node = f"once[0:{stride * k + j}]({node} && {cycle[(j - 1) % 3]})"
        out.append(node)
    return out


def _adversarial(count):
    return [f"once[{b}:{b}] q" for b in (2 ** (k + 1) - 1 for k in range(1, count + 1))]


_TIMESCALE_FAMILIES = {
    "absent": "historically((once[0:{s}] q) -> !p)",
    "always": "historically((once[0:{s}] q) -> p)",
    "recur": "historically(once[0:{s}] p)",
    "respond": "historically(!((!p) since[{s}:] q))",
}


def _timescales(count):
    texts = [tpl.format(s=s) for tpl in _TIMESCALE_FAMILIES.values() for s in (10, 100, 1000)]
    return texts[:count]


_GENERATORS = {
    "best-case-shared": _best_case_shared,
    "nested-best": _nested_best,
    "worst-unique": _worst_unique,
    "nested-worst": _nested_worst,
    "adversarial-alternating": _adversarial,
    "timescales": _timescales,
}


def gen_scenario(name: str, seed: int = 0, count: int | None = None) -> list[str]:
    """Property texts of a scenario.

    The templates are fixed, so ``seed`` does not change the output; it is
    accepted so every generator shares one calling convention.
    """
    if name not in _GENERATORS:
        raise ValueError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    count = DEFAULT_COUNTS.get(name, 10) if count is None else count
    if count < 1:
        raise ValueError("property count must be positive")
    return _GENERATORS[name](count)


# --------------------------------------------------------------- traces

TRACE_KINDS = ("uniform", "adversarial", "dense")


def gen_trace(kind: str, steps: int, seed: int = 0, density: float = 10.0, names=PREDICATES):
    """Generate ``(times, rows, mode)`` for a synthetic trace.

    uniform: independent fair coin per predicate per step.
    adversarial: every predicate alternates 1, 0, 1, ... starting at step 0.
    dense: run-length segments over the horizon ``[0, steps)`` with geometric
    lengths of mean ``density``; random valuations per segment; a closing
    record at the horizon.
    """
    rng = np.random.default_rng(seed)
    n = len(names)
    if kind == "uniform":
        rows = rng.integers(0, 2, size=(steps, n), dtype=np.uint8)
        return np.arange(steps, dtype=np.int64), rows, TimeModel.DISCRETE
    if kind == "adversarial":
        col = (np.arange(steps) % 2 == 0).astype(np.uint8)
        return np.arange(steps, dtype=np.int64), np.repeat(col[:, None], n, axis=1), TimeModel.DISCRETE
    if kind == "dense":
        if density < 1:
            raise ValueError("dense traces need density >= 1")
        starts = [0]
        total = 0
        while True:
            lengths = rng.geometric(1.0 / density, size=max(16, int(steps / density) + 16))
            for ln in lengths:
                total += int(ln)
                if total >= steps:
                    break
                starts.append(total)
            if total >= steps:
                break
        times = np.asarray(starts + [steps], dtype=np.int64)
        rows = rng.integers(0, 2, size=(len(times), n), dtype=np.uint8)
        return times, rows, TimeModel.DENSE
    raise ValueError(f"unknown trace kind {kind!r}; choose from {', '.join(TRACE_KINDS)}")


def write_trace(path, fmt: str, times, rows, mode, names=PREDICATES) -> None:
    mode = TimeModel(mode)
    if fmt == "bin":
        header = tio.BinaryTraceHeader(tio.MODE_CODES[mode], tuple(names))
        with open(path, "wb") as fh:
            tio.write_binary_trace(fh, header, times, rows)
    elif fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            tio.write_json_trace(fh, names, times, rows)
    else:
        raise ValueError(f"unknown trace format {fmt!r}")


# ------------------------------------------------------------- harness


class _Digest:
    """Streaming per-property verdict checksums."""

    def __init__(self, m: int, dense: bool):
        self.hashes = [hashlib.sha256() for _ in range(m)]
        self.dense = dense

    def discrete(self, t0, out):
        for k, h in enumerate(self.hashes):
            h.update(np.ascontiguousarray(out[:, k]).tobytes())

    def rows(self, rows):
        for k, h in enumerate(self.hashes):
            sel = rows[rows[:, 0] == k, 1:]
            h.update(np.ascontiguousarray(sel, dtype="<i8").tobytes())

    def hexdigests(self):
        return [h.hexdigest() for h in self.hashes]


def _evaluate(monitor: CompiledMonitor, blocks, session: EvalSession | None = None):
    session = session or EvalSession(monitor)
    digest = _Digest(monitor.property_count, monitor.time_model == TimeModel.DENSE)
    if digest.dense:
        tio.feed_dense(session, blocks, digest.rows)
    else:
        tio.feed_discrete(session, blocks, digest.discrete)
    return session, digest.hexdigests()


def _file_blocks(path, fmt, monitor):
    return tio.iter_trace_blocks(path, fmt, monitor.predicates, monitor.time_model)


def conjunction_text(texts) -> str:
    return " && ".join(f"({t})" for t in texts)


@dataclass
class BenchReport:
    scenario: str
    config: str
    time_model: str
    format: str
    properties: int
    nodes_independent: int
    nodes_shared: int
    compression: float
    nodes_evaluated: int
    steps: int
    wall_times: list = field(default_factory=list)
    wall_median: float = 0.0
    checksums: list = field(default_factory=list)
    high_water: int = 0
    arena_capacity: int = 0
    alloc_counter: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def run_bench(scenario: str, trace_path, config, fmt: str = "bin", time_model=TimeModel.DISCRETE,
              repeats: int = 5, count: int | None = None, texts=None) -> BenchReport:
    """Time one configuration over a trace file; median of ``repeats`` runs.

    Only trace ingestion plus evaluation sits inside the timed region;
    compilation and session construction happen before the clock starts.
    """
    config = Config(config)
    time_model = TimeModel(time_model)
    texts = list(texts) if texts is not None else gen_scenario(scenario, count=count)
    shared = compile_texts(texts, time_model)
    if config == Config.SEQUENTIAL:
        monitors = [compile_texts([t], time_model) for t in texts]
    elif config == Config.AND:
        monitors = [compile_texts([conjunction_text(texts)], time_model)]
    else:
        monitors = [shared]

    times, last = [], None
    for _ in range(max(1, repeats)):
        sessions = [EvalSession(m) for m in monitors]
        start = time.perf_counter()
        results = [_evaluate(m, _file_blocks(trace_path, fmt, m), s) for m, s in zip(monitors, sessions)]
        times.append(time.perf_counter() - start)
        last = results
    sessions = [s for s, _ in last]
    checksums = [c for _, cs in last for c in cs]
    return BenchReport(
        scenario=scenario,
        config=config.value,
        time_model=time_model.value,
        format=fmt,
        properties=len(texts),
        nodes_independent=sum(shared.independent_node_counts()),
        nodes_shared=shared.node_count,
        compression=round(shared.compression_ratio(), 4),
        nodes_evaluated=sum(m.node_count for m in monitors),
        steps=sessions[0].steps,
        wall_times=times,
        wall_median=statistics.median(times),
        checksums=checksums,
        high_water=max(s.arena.high_water for s in sessions),
        arena_capacity=max(m.arena_capacity for m in monitors),
        alloc_counter=sum(s.alloc_counter for s in sessions),
    )


def verdict_checksums(texts, times, rows, mode, names=PREDICATES, shared: bool = True) -> list[str]:
    """Per-property checksums over an in-memory trace (shared or one monitor per property)."""
    mode = TimeModel(mode)
    groups = [texts] if shared else [[t] for t in texts]
    out = []
    for group in groups:
        monitor = compile_texts(group, mode)
        cols = tio._column_map(names, monitor.predicates)
        blocks = [(times, tio._project(np.asarray(rows, dtype=np.uint8), cols))]
        _, digests = _evaluate(monitor, blocks)
        out.extend(digests)
    return out


def render_report(report: BenchReport) -> str:
    return json.dumps(report.to_dict(), indent=2)
