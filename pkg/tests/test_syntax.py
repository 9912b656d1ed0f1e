import pytest
from hypothesis import given
from hypothesis import strategies as st

from weft.errors import ParseError
from weft.syntax import (
    FALSE,
    TRUE,
    Kind,
    PredicateTable,
    TimeBound,
    and_,
    atom,
    atoms,
    historically,
    implies,
    normalize,
    not_,
    once,
    or_,
    parse,
    parse_spec,
    parse_spec_file,
    previous,
    since,
    size,
    to_text,
)

p, q, r = atom("p"), atom("q"), atom("r")


def kinds(f):
    out = [f.kind]
    for c in f.children:
        out.extend(kinds(c))
    return out


def test_once_over_conjunction():
    f = parse_spec("once[0:10] (p && q)")
    assert f == once(and_(p, q), TimeBound(0, 10))


def test_single_atom():
    assert parse_spec("p") == p


def test_seven_subformulas_example():
    f = parse_spec("historically[2:4](pre(r) && (p since[1:3] q))")
    assert size(f) == 7
    assert sorted(k.name for k in kinds(f)) == sorted(
        ["HISTORICALLY", "AND", "PREVIOUS", "SINCE", "ATOM", "ATOM", "ATOM"])
    assert f.bound == TimeBound(2, 4)
    assert f.left.right.bound == TimeBound(1, 3)


def test_dangling_since_is_error():
    with pytest.raises(ParseError):
        parse_spec("p since")


@pytest.mark.parametrize("text", ["", "   ", "once[5:2] p", "once[a:3] p", "p && ", "(p", "p q", "once[1 p", "p $ q"])
def test_malformed_inputs(text):
    with pytest.raises(ParseError):
        parse_spec(text)


def test_parse_error_reports_column():
    with pytest.raises(ParseError) as info:
        parse_spec("p && && q")
    assert info.value.line == 1
    assert info.value.column == 6


def test_bound_forms():
    assert parse_spec("once[:7] p").bound == TimeBound(0, 7)
    assert parse_spec("once[3:] p").bound == TimeBound(3, None)
    assert parse_spec("once p").bound == TimeBound()
    assert parse_spec("p since[2:2] q").bound == TimeBound(2, 2)


def test_precedence():
    # unary binds tightest, then since, &&, ||, ->
    assert parse_spec("!p && q") == and_(not_(p), q)
    assert parse_spec("p && q || r") == or_(and_(p, q), r)
    assert parse_spec("p || q && r") == or_(p, and_(q, r))
    assert parse_spec("p since q && r") == and_(since(p, q), r)
    assert parse_spec("once p since q") == since(once(p), q)
    assert parse(r"p -> q -> r") == implies(p, implies(q, r))
    assert parse_spec("p && q && r") == and_(and_(p, q), r)
    assert parse_spec("p since q since r") == since(since(p, q), r)


def test_constants():
    assert parse_spec("true") == TRUE == not_(FALSE)
    assert parse_spec("false") == FALSE


def test_normalize_examples():
    assert normalize(implies(p, q)) == or_(not_(p), q)
    assert normalize(p) == p
    assert normalize(implies(implies(p, q), r)) == or_(not_(or_(not_(p), q)), r)


def test_predicate_table_registration_order():
    table = PredicateTable()
    parse_spec("(q && p) since (q || r)", table)
    assert table.names == ["q", "p", "r"]
    assert table.index == {"q": 0, "p": 1, "r": 2}


def test_spec_file_lines_and_comments():
    text = "# header\n\nonce[0:3] p   # trailing\nq && r\n"
    entries = parse_spec_file(text)
    assert [(e.index, e.line, e.text) for e in entries] == [(1, 3, "once[0:3] p"), (2, 4, "q && r")]


def test_spec_file_error_line():
    with pytest.raises(ParseError) as info:
        parse_spec_file("p\nq\np since\n")
    assert info.value.line == 3


# ------------------------------------------------------------ properties

names = st.sampled_from(["p", "q", "r", "x_1"])
bounds = st.one_of(
    st.just(TimeBound()),
    st.integers(0, 20).map(lambda a: TimeBound(a, None)),
    st.tuples(st.integers(0, 20), st.integers(0, 20)).map(lambda ab: TimeBound(min(ab), max(ab))),
)


def formulas(with_implies=True):
    leaves = st.one_of(names.map(atom), st.just(FALSE), st.just(TRUE))

    def extend(children):
        ops = [
            children.map(not_),
            children.map(previous),
            st.tuples(children, bounds).map(lambda cb: once(*cb)),
            st.tuples(children, bounds).map(lambda cb: historically(*cb)),
            st.tuples(children, children).map(lambda ab: and_(*ab)),
            st.tuples(children, children).map(lambda ab: or_(*ab)),
            st.tuples(children, children, bounds).map(lambda abc: since(*abc)),
        ]
        if with_implies:
            ops.append(st.tuples(children, children).map(lambda ab: implies(*ab)))
        return st.one_of(ops)

    return st.recursive(leaves, extend, max_leaves=12)


@given(formulas())
def test_round_trip(f):
    g = normalize(f)
    assert parse_spec(to_text(g)) == g


@given(formulas())
def test_round_trip_with_implication(f):
    assert parse(to_text(f)) == f


@given(formulas())
def test_normalize_idempotent_and_implication_free(f):
    g = normalize(f)
    assert normalize(g) == g
    assert Kind.IMPLIES not in kinds(g)


@given(formulas())
def test_atoms_registered_once(f):
    table = PredicateTable()
    parse_spec(to_text(f), table)
    assert table.names == atoms(f)
    assert len(set(table.names)) == len(table.names)
