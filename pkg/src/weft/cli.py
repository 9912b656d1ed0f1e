"""Command-line entry point: ``weft compile|run|gen-trace|check|bench``."""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import FORMAT_VERSION, __version__
from . import bench as benchmod
from . import io as tio
from .compiler import MonitorBuilder, TimeModel, compile_formulas
from .engine import EvalSession
from .errors import CompileError, DataError, ParseError, WeftError
from .oracle import Trace, expand_segments, oracle_eval_all, random_formula, random_trace
from .syntax import normalize, parse_spec_file, to_text

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_DATA = 3
EXIT_COUNTEREXAMPLE = 4

log = logging.getLogger("weft")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def load_monitor(spec_path, time_model):
    try:
        text = Path(spec_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read spec file: {exc}") from None
    entries = parse_spec_file(text)
    if not entries:
        raise CompileError(f"{spec_path}: no properties found")
    builder = MonitorBuilder()
    for e in entries:
        builder.register_property(e.formula, e.text)
    return builder.finalize(time_model)


# -------------------------------------------------------------- commands


def cmd_compile(args) -> int:
    monitor = load_monitor(args.spec, args.time_model)
    indep = monitor.independent_node_counts()
    print(f"nodes: {monitor.node_count}")
    print(f"properties: {monitor.property_count}")
    for k, (root, n, text) in enumerate(zip(monitor.roots, indep, monitor.texts), 1):
        print(f"  property {k}: root={root} independent_nodes={n}  {text}")
    print(f"independent_total: {sum(indep)}")
    print(f"compression: {monitor.compression_ratio():.4f}")
    print(f"arena_capacity: {monitor.arena_capacity}")
    print("schedule:")
    print(monitor.dump())
    return EXIT_OK


def cmd_run(args) -> int:
    monitor = load_monitor(args.spec, args.time_model)
    session = EvalSession(monitor, debug=args.debug)
    stats = tio.JsonStats()
    sink = open(args.out, "w", encoding="utf-8", newline="\n") if args.out else sys.stdout
    try:
        tio.run_trace(monitor, args.trace, args.format, sink, session, stats=stats)
    except OSError as exc:
        raise DataError(f"cannot read trace: {exc}") from None
    finally:
        if args.out:
            sink.close()
        else:
            sink.flush()
    if args.stats:
        report = session.stats()
        report["unknown_keys"] = stats.unknown_keys
        print(json.dumps(report), file=sys.stderr)
    return EXIT_OK


def cmd_gen_trace(args) -> int:
    names = tuple(n for n in args.names.split(",") if n)
    times, rows, mode = benchmod.gen_trace(args.kind, args.steps, args.seed, args.density, names)
    benchmod.write_trace(args.out, args.format, times, rows, mode, names)
    print(f"wrote {len(times)} records ({mode.value}) to {args.out}", file=sys.stderr)
    return EXIT_OK


def _first_mismatch(got, expected):
    for t, (a, b) in enumerate(zip(got, expected)):
        if bool(a) != bool(b):
            return t
    return None


def cmd_check(args) -> int:
    rng = random.Random(args.seed)
    names = ("p", "q", "r")
    dense = args.time_model == TimeModel.DENSE.value
    for case in range(args.cases):
        f = random_formula(rng, args.max_depth, args.max_bound, names)
        length = rng.randint(1, args.max_length)
        w = random_trace(rng, length, names)
        expected = oracle_eval_all(f, w)
        monitor = compile_formulas([normalize(f)], args.time_model)
        preds = monitor.predicates
        session = EvalSession(monitor, debug=True, track_allocations=False)
        if dense:
            # run-length encode the trace so segments have varied lengths
            unit = w.rows(preds)
            ends, rows = [], []
            for t, row in enumerate(unit):
                if rows and rows[-1] == row and rng.random() < 0.7:
                    ends[-1] = t + 1
                else:
                    ends.append(t + 1)
                    rows.append(row)
            assert expand_segments(ends, rows) == unit
            emitted = np.concatenate([
                session.run_dense(np.asarray(ends), np.asarray(rows, dtype=np.uint8).reshape(len(ends), len(preds))),
                session.flush_dense(),
            ])
            got = [False] * length
            for _, b, e in emitted:
                got[b:e] = [True] * (e - b)
        else:
            vals = np.asarray(w.rows(preds), dtype=np.uint8).reshape(length, len(preds))
            got = session.run_discrete(vals)[:, 0].tolist()
        t = _first_mismatch(got, expected)
        if t is not None:
            print(f"counterexample after {case + 1} cases")
            print(f"formula: {to_text(f)}")
            print(f"step: {t} (engine={int(bool(got[t]))}, oracle={int(expected[t])})")
            print("trace:")
            print(Trace({n: w.columns[n] for n in names}).to_csv(names))
            return EXIT_COUNTEREXAMPLE
    print(f"ok: {args.cases} cases agree (seed {args.seed})")
    return EXIT_OK


def cmd_bench(args) -> int:
    mode = TimeModel(args.time_model)
    if mode == TimeModel.DENSE:
        kind = "dense"
    elif args.scenario == "adversarial-alternating":
        kind = "adversarial"
    else:
        kind = "uniform"
    times, rows, _ = benchmod.gen_trace(kind, args.steps, args.seed, args.density)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / f"trace.{args.format}"
        benchmod.write_trace(path, args.format, times, rows, mode)
        report = benchmod.run_bench(args.scenario, path, args.mode, args.format, mode,
                                    repeats=args.repeats, count=args.count)
    text = benchmod.render_report(report)
    if args.report:
        Path(args.report).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weft", description="Shared-DAG runtime monitor for past-time MTL properties.")
    parser.add_argument("--version", action="version",
                        version=f"weft {__version__} (binary trace format {FORMAT_VERSION})")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    models = [m.value for m in TimeModel]

    p = sub.add_parser("compile", help="compile a spec file and print the shared schedule")
    p.add_argument("--spec", required=True)
    p.add_argument("--time-model", choices=models, default="discrete")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("run", help="monitor a trace and write verdicts")
    p.add_argument("--spec", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--format", choices=["json", "bin"], default="json")
    p.add_argument("--time-model", choices=models, default="discrete")
    p.add_argument("--out", help="verdict file (default: stdout)")
    p.add_argument("--stats", action="store_true", help="print arena statistics to stderr")
    p.add_argument("--debug", action="store_true", help="enable write-once checks in the arena")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("gen-trace", help="generate a synthetic trace")
    p.add_argument("--kind", choices=benchmod.TRACE_KINDS, default="uniform")
    p.add_argument("--steps", type=int, default=1000, help="steps (discrete) or horizon (dense)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--density", type=float, default=10.0, help="mean dense segment length")
    p.add_argument("--names", default="p,q,r", help="comma-separated predicate names")
    p.add_argument("--format", choices=["json", "bin"], default="json")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_trace)

    p = sub.add_parser("check", help="randomized differential test against the reference semantics")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--max-depth", type=int, default=5)
    p.add_argument("--max-bound", type=int, default=8)
    p.add_argument("--max-length", type=int, default=64)
    p.add_argument("--time-model", choices=models, default="discrete")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="time one configuration of a scenario")
    p.add_argument("--scenario", choices=benchmod.SCENARIOS, required=True)
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--mode", choices=[c.value for c in benchmod.Config], default="multi")
    p.add_argument("--format", choices=["json", "bin"], default="bin")
    p.add_argument("--time-model", choices=models, default="discrete")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--density", type=float, default=10.0)
    p.add_argument("--count", type=int, help="number of properties (scenario default if omitted)")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--report", help="write the JSON report here (default: stdout)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="weft: %(message)s")
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"weft: parse error at line {exc.line}, column {exc.column}: {exc.message}", file=sys.stderr)
        return EXIT_PARSE
    except CompileError as exc:
        print(f"weft: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DataError, ValueError) as exc:
        print(f"weft: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except WeftError as exc:
        print(f"weft: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
