"""Past-time MTL formulas: types, parser, normalizer and printer.

Grammar, loosest binding first::

    expr    := or_expr ('->' expr)?
    or_expr := and_expr ('||' and_expr)*
    and_expr:= since_expr ('&&' since_expr)*
    since_expr := unary ('since' bound? unary)*
    unary   := '!' unary | 'pre' unary
             | 'once' bound? unary | 'historically' bound? unary
             | primary
    primary := IDENT | 'true' | 'false' | '(' expr ')'
    bound   := '[' INT? ':' INT? ']'
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterator

from .errors import ParseError


class Kind(IntEnum):
    FALSE = 0
    ATOM = 1
    NOT = 2
    AND = 3
    OR = 4
    PREVIOUS = 5
    SINCE = 6
    ONCE = 7
    HISTORICALLY = 8
    # Only produced by the parser; normalize() removes it.
    IMPLIES = 9


ARITY = {
    Kind.FALSE: 0,
    Kind.ATOM: 0,
    Kind.NOT: 1,
    Kind.PREVIOUS: 1,
    Kind.ONCE: 1,
    Kind.HISTORICALLY: 1,
    Kind.AND: 2,
    Kind.OR: 2,
    Kind.SINCE: 2,
    Kind.IMPLIES: 2,
}

TEMPORAL_BOUNDED = (Kind.SINCE, Kind.ONCE, Kind.HISTORICALLY)
COMMUTATIVE = (Kind.AND, Kind.OR)

# Largest accepted bound value; leaves headroom for saturating window arithmetic
# on the signed 64-bit timeline used by the evaluation kernels.
MAX_BOUND = (1 << 62) - 1


@dataclass(frozen=True)
class TimeBound:
    lower: int = 0
    upper: int | None = None  # None means unbounded

    def __post_init__(self):
        if self.lower < 0 or (self.upper is not None and self.upper < 0):
            raise ValueError("bounds must be non-negative")
        if self.upper is not None and self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    @property
    def untimed(self) -> bool:
        return self.lower == 0 and self.upper is None

    def __str__(self) -> str:
        hi = "" if self.upper is None else str(self.upper)
        return f"[{self.lower}:{hi}]"


UNTIMED = TimeBound()


@dataclass(frozen=True)
class Formula:
    kind: Kind
    children: tuple["Formula", ...] = ()
    name: str | None = None
    bound: TimeBound | None = None

    def __post_init__(self):
        if len(self.children) != ARITY[self.kind]:
            raise ValueError(f"{self.kind.name} takes {ARITY[self.kind]} operands")
        if (self.kind == Kind.ATOM) != (self.name is not None):
            raise ValueError("exactly the ATOM kind carries a name")
        if (self.kind in TEMPORAL_BOUNDED) != (self.bound is not None):
            raise ValueError(f"{self.kind.name} bound mismatch")

    @property
    def left(self) -> "Formula":
        return self.children[0]

    @property
    def right(self) -> "Formula":
        return self.children[1]

    def __str__(self) -> str:
        return to_text(self)


# Constructors keep test and generator code readable.

FALSE = Formula(Kind.FALSE)
TRUE = Formula(Kind.NOT, (FALSE,))


def atom(name: str) -> Formula:
    return Formula(Kind.ATOM, name=name)


def not_(f: Formula) -> Formula:
    return Formula(Kind.NOT, (f,))


def and_(a: Formula, b: Formula) -> Formula:
    return Formula(Kind.AND, (a, b))


def or_(a: Formula, b: Formula) -> Formula:
    return Formula(Kind.OR, (a, b))


def implies(a: Formula, b: Formula) -> Formula:
    return Formula(Kind.IMPLIES, (a, b))


def previous(f: Formula) -> Formula:
    return Formula(Kind.PREVIOUS, (f,))


def since(a: Formula, b: Formula, bound: TimeBound = UNTIMED) -> Formula:
    return Formula(Kind.SINCE, (a, b), bound=bound)


def once(f: Formula, bound: TimeBound = UNTIMED) -> Formula:
    return Formula(Kind.ONCE, (f,), bound=bound)


def historically(f: Formula, bound: TimeBound = UNTIMED) -> Formula:
    return Formula(Kind.HISTORICALLY, (f,), bound=bound)


class PredicateTable:
    """Ordered set of predicate names; positions are dense and stable."""

    def __init__(self, names=()):
        self.names: list[str] = []
        self.index: dict[str, int] = {}
        for n in names:
            self.add(n)

    def add(self, name: str) -> int:
        pos = self.index.get(name)
        if pos is None:
            pos = len(self.names)
            self.names.append(name)
            self.index[name] = pos
        return pos

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self.index

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __eq__(self, other) -> bool:
        return isinstance(other, PredicateTable) and self.names == other.names

    def __repr__(self) -> str:
        return f"PredicateTable({self.names!r})"

    def copy(self) -> "PredicateTable":
        return PredicateTable(self.names)


# ---------------------------------------------------------------- tokenizer

KEYWORDS = {"pre", "since", "once", "historically", "true", "false"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<op>&&|\|\||->|[!()\[\]:])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str  # 'ident', 'kw', 'int', 'op', 'eof'
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok = m.group()
        if kind == "ws":
            nl = tok.count("\n")
            if nl:
                line += nl
                line_start = pos + tok.rfind("\n") + 1
        else:
            if kind == "ident" and tok in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, tok, line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ------------------------------------------------------------------- parser


class _Parser:
    def __init__(self, text: str, table: PredicateTable | None):
        self.tokens = tokenize(text)
        self.pos = 0
        self.table = table

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(message, tok.line, tok.column)

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("op", "kw") and self.tok.text == text:
            self.pos += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")

    def parse(self) -> Formula:
        if self.tok.kind == "eof":
            self.error("empty input")
        f = self.expr()
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}")
        return f

    def expr(self) -> Formula:
        lhs = self.or_expr()
        if self.accept("->"):
            return implies(lhs, self.expr())
        return lhs

    def or_expr(self) -> Formula:
        f = self.and_expr()
        while self.accept("||"):
            f = or_(f, self.and_expr())
        return f

    def and_expr(self) -> Formula:
        f = self.since_expr()
        while self.accept("&&"):
            f = and_(f, self.since_expr())
        return f

    def since_expr(self) -> Formula:
        f = self.unary()
        while self.accept("since"):
            bound = self.bound()
            f = since(f, self.unary(), bound)
        return f

    def unary(self) -> Formula:
        if self.accept("!"):
            return not_(self.unary())
        if self.accept("pre"):
            return previous(self.unary())
        if self.accept("once"):
            bound = self.bound()
            return once(self.unary(), bound)
        if self.accept("historically"):
            bound = self.bound()
            return historically(self.unary(), bound)
        return self.primary()

    def primary(self) -> Formula:
        tok = self.tok
        if tok.kind == "ident":
            self.pos += 1
            if self.table is not None:
                self.table.add(tok.text)
            return atom(tok.text)
        if self.accept("true"):
            return TRUE
        if self.accept("false"):
            return FALSE
        if self.accept("("):
            f = self.expr()
            self.expect(")")
            return f
        if tok.kind == "eof":
            self.error("unexpected end of input")
        self.error(f"unexpected {tok.text!r}")

    def bound(self) -> TimeBound:
        start = self.tok
        if not self.accept("["):
            return UNTIMED
        lower = self._int_or_none()
        self.expect(":")
        upper = self._int_or_none()
        self.expect("]")
        lower = 0 if lower is None else lower
        if upper is not None and lower > upper:
            self.error(f"malformed bound: lower {lower} exceeds upper {upper}", start)
        for v in (lower, upper):
            if v is not None and v > MAX_BOUND:
                self.error(f"bound {v} is out of range", start)
        return TimeBound(lower, upper)

    def _int_or_none(self) -> int | None:
        tok = self.tok
        if tok.kind == "int":
            self.pos += 1
            return int(tok.text)
        if tok.kind == "op" and tok.text in (":", "]"):
            return None
        self.error(f"malformed bound: expected a number, found {tok.text or 'end of input'!r}")


def parse(text: str, table: PredicateTable | None = None) -> Formula:
    """Parse without normalizing; IMPLIES nodes are kept."""
    return _Parser(text, table).parse()


def parse_spec(text: str, table: PredicateTable | None = None) -> Formula:
    """Parse one property and return its normalized formula.

    Atoms are registered in ``table`` (when given) in order of first appearance.
    """
    return normalize(parse(text, table))


def normalize(f: Formula) -> Formula:
    """Rewrite implication into disjunction; every other kind is kept."""
    if not f.children:
        return f
    kids = tuple(normalize(c) for c in f.children)
    if f.kind == Kind.IMPLIES:
        return or_(not_(kids[0]), kids[1])
    if kids == f.children:
        return f
    return Formula(f.kind, kids, f.name, f.bound)


def atoms(f: Formula) -> list[str]:
    """Distinct atom names in left-to-right order of first appearance."""
    seen: dict[str, None] = {}

    def walk(g: Formula):
        if g.kind == Kind.ATOM:
            seen.setdefault(g.name)
        for c in g.children:
            walk(c)

    walk(f)
    return list(seen)


def size(f: Formula) -> int:
    """Number of tree nodes (no sharing)."""
    return 1 + sum(size(c) for c in f.children)


def depth(f: Formula) -> int:
    return 1 + max((depth(c) for c in f.children), default=0)


_BINARY_OPS = {Kind.AND: "&&", Kind.OR: "||", Kind.IMPLIES: "->"}
_UNARY_WORDS = {Kind.ONCE: "once", Kind.HISTORICALLY: "historically"}


def _bound_text(b: TimeBound) -> str:
    return "" if b.untimed else str(b)


def to_text(f: Formula) -> str:
    """Print in the concrete grammar; binary nodes are always parenthesized."""
    k = f.kind
    if k == Kind.FALSE:
        return "false"
    if k == Kind.ATOM:
        return f.name
    if k == Kind.NOT:
        return "!" + to_text(f.left)
    if k == Kind.PREVIOUS:
        return "pre " + to_text(f.left)
    if k in _UNARY_WORDS:
        return f"{_UNARY_WORDS[k]}{_bound_text(f.bound)} {to_text(f.left)}"
    if k == Kind.SINCE:
        return f"({to_text(f.left)} since{_bound_text(f.bound)} {to_text(f.right)})"
    return f"({to_text(f.left)} {_BINARY_OPS[k]} {to_text(f.right)})"


@dataclass
class SpecEntry:
    index: int  # 1-based property index
    line: int  # 1-based line in the file
    text: str
    formula: Formula = field(repr=False)


def parse_spec_file(text: str, table: PredicateTable | None = None) -> list[SpecEntry]:
    """Parse a specification file: one property per line, ``#`` starts a comment.

    A :class:`ParseError` carries the line number within the file.
    """
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        try:
            f = parse_spec(body, table)
        except ParseError as exc:
            raise ParseError(exc.message, lineno, exc.column) from None
        entries.append(SpecEntry(len(entries) + 1, lineno, body.strip(), f))
    return entries
