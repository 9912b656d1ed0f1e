"""Reference semantics: a direct transcription of the satisfaction relation.

Deliberately naive.  Every temporal clause enumerates candidate witnesses
t' < t and checks the continuation operand at every instant in between, so
it shares no code or state representation with the engine.  Dense traces are
judged by expanding them to unit steps first.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .syntax import (
    FALSE,
    TRUE,
    Formula,
    Kind,
    TimeBound,
    and_,
    atom,
    historically,
    implies,
    not_,
    once,
    or_,
    previous,
    since,
)


@dataclass(frozen=True)
class Trace:
    """Discrete trace: one Boolean column per predicate, all of equal length."""

    columns: dict

    def __post_init__(self):
        lengths = {len(c) for c in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"trace columns differ in length: {sorted(lengths)}")

    @property
    def length(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def value(self, name: str, t: int) -> bool:
        col = self.columns.get(name)
        return bool(col[t]) if col is not None else False

    def rows(self, names) -> list[tuple[int, ...]]:
        return [tuple(int(self.value(n, t)) for n in names) for t in range(self.length)]

    def to_csv(self, names=None) -> str:
        names = list(names or self.columns)
        lines = ["time," + ",".join(names)]
        for t, row in enumerate(self.rows(names)):
            lines.append(f"{t}," + ",".join(map(str, row)))
        return "\n".join(lines)


def _window_ok(t: int, tp: int, bound: TimeBound) -> bool:
    # t - b <= t' < t - a
    if not tp < t - bound.lower:
        return False
    return bound.upper is None or t - bound.upper <= tp


class _Evaluator:
    def __init__(self, trace: Trace):
        self.trace = trace
        self.memo = {}
        # keep derived negations alive so their ids stay unique memo keys
        self.negations = {}

    def at(self, f: Formula, t: int) -> bool:
        key = (id(f), t)
        hit = self.memo.get(key)
        if hit is None:
            hit = self._clause(f, t)
            self.memo[key] = hit
        return hit

    def _since(self, cont: Formula, origin: Formula, bound: TimeBound, t: int) -> bool:
        for tp in range(t - 1, -1, -1):
            if not _window_ok(t, tp, bound):
                continue
            if self.at(origin, tp) and all(self.at(cont, u) for u in range(tp + 1, t)):
                return True
        return False

    def _clause(self, f: Formula, t: int) -> bool:
        k = f.kind
        if k == Kind.FALSE:
            return False
        if k == Kind.ATOM:
            return self.trace.value(f.name, t)
        if k == Kind.NOT:
            return not self.at(f.left, t)
        if k == Kind.AND:
            return self.at(f.left, t) and self.at(f.right, t)
        if k == Kind.OR:
            return self.at(f.left, t) or self.at(f.right, t)
        if k == Kind.IMPLIES:
            return (not self.at(f.left, t)) or self.at(f.right, t)
        if k == Kind.PREVIOUS:
            return t > 0 and self.at(f.left, t - 1)
        if k == Kind.SINCE:
            return self._since(f.left, f.right, f.bound, t)
        if k == Kind.ONCE:
            return self._since(TRUE, f.left, f.bound, t)
        if k == Kind.HISTORICALLY:
            neg = self.negations.get(id(f))
            if neg is None:
                neg = self.negations[id(f)] = not_(f.left)
            return not self._since(TRUE, neg, f.bound, t)
        raise ValueError(f"unknown formula kind {k}")


def oracle_eval(f: Formula, w: Trace, t: int, _ev: _Evaluator | None = None) -> bool:
    if not 0 <= t < w.length:
        raise IndexError(f"step {t} outside trace of length {w.length}")
    return (_ev or _Evaluator(w)).at(f, t)


def oracle_eval_all(f: Formula, w: Trace) -> list[bool]:
    ev = _Evaluator(w)
    return [ev.at(f, t) for t in range(w.length)]


def expand_segments(ends, rows, start: int = 0) -> list:
    """Unit-step rows of a dense trace given as consecutive [prev, end) segments."""
    out = []
    prev = start
    for end, row in zip(ends, rows):
        out.extend([tuple(row)] * (int(end) - prev))
        prev = int(end)
    return out


# ------------------------------------------------------ random generators


def random_bound(rng: random.Random, max_bound: int) -> TimeBound:
    r = rng.random()
    if r < 0.2:
        return TimeBound()
    lo = rng.randint(0, max_bound)
    if r < 0.35:
        return TimeBound(lo, None)
    return TimeBound(lo, rng.randint(lo, max_bound))


def random_formula(rng: random.Random, depth: int = 5, max_bound: int = 8,
                   names=("p", "q", "r")) -> Formula:
    """Random formula of at most ``depth`` levels over ``names``."""
    if depth <= 1 or rng.random() < 0.15:
        r = rng.random()
        if r < 0.04:
            return FALSE
        if r < 0.07:
            return TRUE
        return atom(rng.choice(names))
    sub = lambda: random_formula(rng, depth - 1, max_bound, names)  # noqa: E731
    choice = rng.randrange(9)
    if choice == 0:
        return not_(sub())
    if choice == 1:
        return and_(sub(), sub())
    if choice == 2:
        return or_(sub(), sub())
    if choice == 3:
        return implies(sub(), sub())
    if choice == 4:
        return previous(sub())
    if choice in (5, 6):
        return since(sub(), sub(), random_bound(rng, max_bound))
    if choice == 7:
        return once(sub(), random_bound(rng, max_bound))
    return historically(sub(), random_bound(rng, max_bound))


def random_trace(rng: random.Random, length: int, names=("p", "q", "r"), density: float = 0.5) -> Trace:
    return Trace({n: [rng.random() < density for _ in range(length)] for n in names})
