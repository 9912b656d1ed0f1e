"""Trace feeders and verdict sinks.

Two trace encodings carry the same information:

* JSON lines: one object per record, ``{"time": T, "p": 1, ...}``.
* Binary: an ``LRVB`` header naming the predicates, then fixed-size records
  of a u64 little-endian time followed by ceil(n/8) bitfield bytes
  (predicate i at bit i%8 of byte i//8, LSB first).

In discrete mode records are the steps 0, 1, 2, ...  In dense mode a record
at time T closes the previous segment (whose values held up to T) and opens a
new one; the last record only marks the end of the trace.

Feeders hand the engine blocks of positional predicate vectors in the
monitor's predicate order; predicates unknown to the trace read as false.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Iterator

import numpy as np

from .compiler import CompiledMonitor, TimeModel
from .engine import EvalSession, StepInput
from .errors import DataError
from .intervals import INF
from .syntax import PredicateTable

log = logging.getLogger(__name__)

MAGIC = b"LRVB"
BINARY_VERSION = 1
MODE_CODES = {TimeModel.DISCRETE: 0, TimeModel.DENSE: 1}
BLOCK = 1 << 14


# ------------------------------------------------------------------ JSON


@dataclass
class JsonStats:
    records: int = 0
    unknown_keys: int = 0
    warned: set = field(default_factory=set)


def _truth(key: str, value) -> bool:
    if value is True or value == 1:
        return True
    if value is False or value == 0:
        return False
    raise DataError(f"predicate {key!r} must be 0/1 or true/false, got {value!r}")


def read_json_record(line: str, table: PredicateTable, mode=TimeModel.DISCRETE,
                     previous=None, stats: JsonStats | None = None) -> StepInput:
    """Decode one JSON record into a positional step.

    Absent predicates are false in discrete mode and keep ``previous`` values
    in dense mode.  Unknown keys are logged once and counted in ``stats``.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed JSON record: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise DataError("JSON record must be an object")
    time = obj.get("time")
    if time is None:
        raise DataError("record has no 'time' field")
    if isinstance(time, bool) or not isinstance(time, int) or time < 0:
        raise DataError(f"'time' must be a non-negative integer, got {time!r}")
    if time >= INF:
        raise DataError(f"timestamp {time} out of range")
    if TimeModel(mode) == TimeModel.DENSE and previous is not None:
        values = list(previous)
    else:
        values = [False] * len(table)
    for key, value in obj.items():
        if key == "time":
            continue
        pos = table.index.get(key)
        if pos is None:
            if stats is not None:
                stats.unknown_keys += 1
                if key not in stats.warned:
                    stats.warned.add(key)
                    log.warning("ignoring unknown predicate %r", key)
            continue
        values[pos] = _truth(key, value)
    if stats is not None:
        stats.records += 1
    return StepInput(time, tuple(values))


def iter_json_records(stream, table: PredicateTable, mode=TimeModel.DISCRETE,
                      stats: JsonStats | None = None) -> Iterator[StepInput]:
    prev = None
    for lineno, line in enumerate(stream, 1):
        if not line.strip():
            continue
        try:
            rec = read_json_record(line, table, mode, prev, stats)
        except DataError as exc:
            raise DataError(f"record on line {lineno}: {exc}") from None
        prev = rec.values
        yield rec


def write_json_trace(stream, names, times, rows) -> None:
    for t, row in zip(times, rows):
        obj = {"time": int(t)}
        obj.update((n, int(v)) for n, v in zip(names, row))
        stream.write(json.dumps(obj, separators=(",", ":")) + "\n")


# ---------------------------------------------------------------- binary


@dataclass(frozen=True)
class BinaryTraceHeader:
    mode: int
    names: tuple[str, ...]
    version: int = BINARY_VERSION

    @property
    def predicate_count(self) -> int:
        return len(self.names)

    @property
    def bitfield_bytes(self) -> int:
        return (len(self.names) + 7) // 8

    @property
    def record_size(self) -> int:
        return 8 + self.bitfield_bytes

    def encode(self) -> bytes:
        parts = [MAGIC, struct.pack("<HBH", self.version, self.mode, len(self.names))]
        for n in self.names:
            raw = n.encode("utf-8")
            parts.append(struct.pack("<H", len(raw)) + raw)
        return b"".join(parts)


def _read_exact(stream: BinaryIO, n: int, what: str) -> bytes:
    data = stream.read(n)
    if len(data) != n:
        raise DataError(f"truncated {what}")
    return data


def read_binary_header(stream: BinaryIO) -> BinaryTraceHeader:
    if _read_exact(stream, 4, "header") != MAGIC:
        raise DataError("not a binary trace (bad magic)")
    version, mode, count = struct.unpack("<HBH", _read_exact(stream, 5, "header"))
    if version != BINARY_VERSION:
        raise DataError(f"unsupported binary trace version {version}")
    if mode not in (0, 1):
        raise DataError(f"unknown time mode code {mode}")
    names = []
    for _ in range(count):
        (size,) = struct.unpack("<H", _read_exact(stream, 2, "header"))
        try:
            names.append(_read_exact(stream, size, "header").decode("utf-8"))
        except UnicodeDecodeError:
            raise DataError("predicate name is not valid UTF-8") from None
    if len(set(names)) != len(names):
        raise DataError("duplicate predicate names in header")
    return BinaryTraceHeader(mode, tuple(names), version)


def encode_binary_record(time: int, values, header: BinaryTraceHeader) -> bytes:
    bits = np.zeros(header.bitfield_bytes * 8, dtype=np.uint8)
    bits[:len(values)] = np.asarray(values, dtype=bool)
    return struct.pack("<Q", time) + np.packbits(bits, bitorder="little").tobytes()


def read_binary_record(data: bytes, header: BinaryTraceHeader) -> StepInput:
    if len(data) != header.record_size:
        raise DataError(f"truncated record: {len(data)} of {header.record_size} bytes")
    times, rows = decode_binary_block(data, header)
    return StepInput(int(times[0]), tuple(bool(v) for v in rows[0]))


def decode_binary_block(data: bytes, header: BinaryTraceHeader):
    """Decode whole records; returns (int64 times, uint8 value matrix)."""
    size = header.record_size
    if len(data) % size:
        raise DataError(f"truncated record: trailing {len(data) % size} bytes")
    raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, size)
    times_u = raw[:, :8].copy().view("<u8").ravel()
    if len(times_u) and times_u.max() >= INF:
        raise DataError("timestamp out of range")
    n = header.predicate_count
    bits = np.unpackbits(raw[:, 8:], axis=1, bitorder="little")
    if bits[:, n:].any():
        raise DataError("nonzero padding bits in record bitfield")
    return times_u.astype(np.int64), bits[:, :n]


def write_binary_trace(stream: BinaryIO, header: BinaryTraceHeader, times, rows) -> None:
    stream.write(header.encode())
    times = np.asarray(times, dtype="<u8").reshape(-1, 1)
    rows = np.asarray(rows, dtype=np.uint8).reshape(len(times), header.predicate_count)
    pad = header.bitfield_bytes * 8 - header.predicate_count
    bits = np.concatenate([rows, np.zeros((len(times), pad), dtype=np.uint8)], axis=1)
    packed = np.packbits(bits, axis=1, bitorder="little")
    stream.write(np.concatenate([times.view(np.uint8), packed], axis=1).tobytes())


# ------------------------------------------------------------ block feeders


def _column_map(trace_names, predicates) -> np.ndarray:
    pos = {n: i for i, n in enumerate(trace_names)}
    return np.asarray([pos.get(p, -1) for p in predicates], dtype=np.int64)


def _project(rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    out = np.zeros((len(rows), len(cols)), dtype=np.uint8)
    present = cols >= 0
    out[:, present] = rows[:, cols[present]]
    return out


def iter_binary_blocks(stream: BinaryIO, predicates, mode: TimeModel, block: int = BLOCK):
    """Yield (times, values) blocks of a binary trace in ``predicates`` order."""
    header = read_binary_header(stream)
    expected = MODE_CODES[TimeModel(mode)]
    if header.mode != expected:
        raise DataError(f"trace was encoded for mode {header.mode}, monitor expects {expected}")
    cols = _column_map(header.names, predicates)
    for name in header.names:
        if name not in predicates:
            log.warning("ignoring unknown predicate %r", name)
    size = header.record_size
    while True:
        data = stream.read(size * block)
        if not data:
            return
        times, rows = decode_binary_block(data, header)
        yield times, _project(rows, cols)


def iter_json_blocks(stream, predicates, mode: TimeModel, block: int = BLOCK,
                     stats: JsonStats | None = None):
    table = PredicateTable(predicates)
    times, rows = [], []
    for rec in iter_json_records(stream, table, mode, stats):
        times.append(rec.time)
        rows.append(rec.values)
        if len(times) == block:
            yield np.asarray(times, dtype=np.int64), np.asarray(rows, dtype=np.uint8).reshape(-1, len(table))
            times, rows = [], []
    if times:
        yield np.asarray(times, dtype=np.int64), np.asarray(rows, dtype=np.uint8).reshape(-1, len(table))


def iter_trace_blocks(path, fmt: str, predicates, mode, block: int = BLOCK, stats=None):
    mode = TimeModel(mode)
    if fmt == "bin":
        with open(path, "rb") as fh:
            yield from iter_binary_blocks(fh, predicates, mode, block)
    elif fmt == "json":
        with open(path, encoding="utf-8") as fh:
            yield from iter_json_blocks(fh, predicates, mode, block, stats)
    else:
        raise ValueError(f"unknown trace format {fmt!r}")


# --------------------------------------------------------------- sinks


def format_discrete_line(time: int, values) -> str:
    return f"{time}," + ",".join("1" if v else "0" for v in values)


def format_dense_line(prop: int, begin: int, end: int) -> str:
    """``prop`` is 0-based here and 1-based on the wire."""
    return json.dumps({"property": int(prop) + 1, "begin": int(begin), "end": int(end)},
                      separators=(",", ":"))


class VerdictWriter:
    """Writes verdict blocks as CSV lines (discrete) or interval JSON lines (dense)."""

    def __init__(self, sink, mode):
        self.sink = sink
        self.mode = TimeModel(mode)
        self.lines = 0

    def write_discrete(self, t0: int, verdicts: np.ndarray) -> None:
        if len(verdicts) == 0:
            return
        times = np.arange(t0, t0 + len(verdicts), dtype=np.int64).reshape(-1, 1)
        table = np.concatenate([times, verdicts.astype(np.int64)], axis=1)
        text = "\n".join(",".join(map(str, row)) for row in table.tolist())
        self.sink.write(text + "\n")
        self.lines += len(verdicts)

    def write_dense(self, rows: np.ndarray) -> None:
        if len(rows) == 0:
            return
        self.sink.write("\n".join(format_dense_line(k, b, e) for k, b, e in rows.tolist()) + "\n")
        self.lines += len(rows)


def write_verdicts(sink, verdicts, mode) -> None:
    """Write one step's (discrete) or one segment's (dense) verdicts."""
    if TimeModel(mode) == TimeModel.DISCRETE:
        sink.write(format_discrete_line(verdicts.time, verdicts.values) + "\n")
    else:
        for k, ivs in enumerate(verdicts.intervals):
            for b, e in ivs:
                sink.write(format_dense_line(k, b, e) + "\n")


# --------------------------------------------------------------- drivers


def feed_discrete(session: EvalSession, blocks, on_block=None) -> None:
    for times, rows in blocks:
        t0 = session.now + 1 if session.steps else 0
        if times[0] != t0 or (len(times) > 1 and np.any(np.diff(times) != 1)):
            bad = int(times[0]) if times[0] != t0 else int(times[1:][np.diff(times) != 1][0])
            raise DataError(f"discrete steps must be consecutive from 0; unexpected time {bad}")
        out = session.run_discrete(rows, t0)
        if on_block is not None:
            on_block(t0, out)


def feed_dense(session: EvalSession, blocks, on_rows=None) -> None:
    """Drive dense segments; each record closes the previous record's segment."""
    pending = None  # values of the segment opened by the last record
    first = True
    for times, rows in blocks:
        if first:
            if times[0] != 0:
                raise DataError(f"dense trace must start at time 0, got {int(times[0])}")
            first = False
            pending, times, rows = rows[0], times[1:], rows[1:]
            if len(times) == 0:
                continue
        seg_values = np.concatenate([pending.reshape(1, -1), rows[:-1]])
        out = session.run_dense(times, seg_values)
        pending = rows[-1]
        if on_rows is not None:
            on_rows(out)
    if on_rows is not None:
        on_rows(session.flush_dense())


def run_trace(monitor: CompiledMonitor, path, fmt: str, sink=None, session: EvalSession | None = None,
              block: int = BLOCK, stats: JsonStats | None = None) -> EvalSession:
    """Evaluate ``monitor`` over a trace file, writing verdicts to ``sink`` if given."""
    session = session or EvalSession(monitor)
    blocks = iter_trace_blocks(path, fmt, monitor.predicates, monitor.time_model, block, stats)
    writer = VerdictWriter(sink, monitor.time_model) if sink is not None else None
    if monitor.time_model == TimeModel.DISCRETE:
        feed_discrete(session, blocks, writer.write_discrete if writer else None)
    else:
        feed_dense(session, blocks, writer.write_dense if writer else None)
    return session
