from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from protogame.catalog import get_protocol, list_protocols
from protogame.gamespec import ParseError, export, load, parse, parse_expr, tokenize
from protogame.model import Add, Lit, Mul, Neg, Ref, Sub, format_expr

PROTOCOLS = list_protocols()[0]

TOY = '''protocol "toy"
party A
party B
param u
constraint 0 < u
event x "x happens" by A
income A u when x
expense B u when x
outcome {}
outcome {x}
game rational rational
  action A: go | stop honest go
  action B: go honest go
  map (go, go) -> {x} @ 1
  map (stop, go) -> {} @ 1
claim nash rational (go, go) expected
'''


@pytest.mark.parametrize("name", PROTOCOLS)
def test_catalog_round_trip(name):
    entry = get_protocol(name)
    text = export(entry)
    again = load(text)
    assert again == entry
    assert export(again) == text


@pytest.mark.parametrize("name", PROTOCOLS)
def test_export_of_parsed_document_is_idempotent(name):
    text = export(get_protocol(name))
    assert export(parse(text)) == text


def test_toy_loads():
    e = load(TOY)
    assert e.name == "toy"
    assert e.game("rational").profiles() == [("go", "go"), ("stop", "go")]


def test_comments_blank_lines_and_reversed_relations():
    text = TOY.replace("constraint 0 < u", "# a comment\n\nconstraint u > 0   # trailing")
    e = load(text)
    assert str(e.model.constraints[0]) == "0 < u"


@pytest.mark.parametrize("old, new, pos, fragment", [
    ("income A u when x", "income A w when x", (7, 10), "undeclared parameter"),
    ("party B", "party A", (3, 7), "duplicate party"),
    ("map (go, go) -> {x} @ 1", "map (go, go) -> {x} @ 1/2", (14, 3), "sum to 1/2"),
    ("  map (stop, go) -> {} @ 1\n", "", (11, 1), "no map entry for profile (stop, go)"),
    ("constraint 0 < u", "constraint 0 < u $", (5, 18), "unexpected character"),
    ("when x", "when y", (7, 17), "undeclared event"),
    ('"toy"', '"toy', (1, 10), "unterminated string"),
    ("outcome {}", "outcomes {}", (9, 1), "unknown statement"),
    ("map (stop, go)", "map (run, go)", (15, 8), "unknown action"),
    ("0 < u", "0/0 < u", (5, 14), "denominator"),
    ("0 < u", "0.5 < u", (5, 13), "unexpected character"),
    ("param u", "param u secret", (4, 9), "unknown parameter role"),
    ("map (go, go) -> {x} @ 1", "map (go, go) -> {y} @ 1", (14, 20), "undeclared event"),
])
def test_errors_carry_positions(old, new, pos, fragment):
    assert old in TOY
    with pytest.raises(ParseError) as info:
        load(TOY.replace(old, new, 1))
    err = info.value
    assert (err.line, err.column) == pos
    assert fragment in str(err)
    assert str(err).startswith(f"{pos[0]}:{pos[1]}: ")


def test_undeclared_outcome_in_map():
    text = TOY.replace("outcome {x}\n", "")
    with pytest.raises(ParseError, match="not a declared outcome"):
        load(text)


def test_probability_must_be_positive():
    text = TOY.replace("map (go, go) -> {x} @ 1", "map (go, go) -> {x} @ 1, {} @ 0")
    with pytest.raises(ParseError, match="positive"):
        load(text)


def _token_starts(text):
    lines = text.split("\n")
    offsets = [0]
    for ln in lines:
        offsets.append(offsets[-1] + len(ln) + 1)
    return [offsets[t.line - 1] + t.col - 1 for t in tokenize(text) if t.kind not in ("NEWLINE", "EOF")]


STARTS = _token_starts(TOY)


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(STARTS), st.sampled_from(["@@", "$"]))
def test_junk_at_any_token_is_a_parse_error(offset, junk):
    text = TOY[:offset] + junk + " " + TOY[offset:]
    with pytest.raises(ParseError) as info:
        load(text)
    line = TOY[:offset].count("\n") + 1
    col = offset - (TOY.rfind("\n", 0, offset) + 1) + 1
    if junk == "$":
        assert (info.value.line, info.value.column) == (line, col)
    else:
        assert info.value.line == line


# --- expressions ---

names = st.sampled_from(["u", "k", "u_AB", "x1"])
lits = st.fractions(min_value=-50, max_value=50, max_denominator=12).map(Lit)
exprs = st.recursive(
    st.one_of(names.map(Ref), lits),
    lambda sub: st.one_of(
        sub.map(Neg),
        st.tuples(sub, sub).map(lambda t: Add(*t)),
        st.tuples(sub, sub).map(lambda t: Sub(*t)),
        st.tuples(sub, sub).map(lambda t: Mul(*t)),
    ),
    max_leaves=12,
)


@settings(max_examples=400, deadline=None)
@given(exprs)
def test_expression_text_round_trips(e):
    text = format_expr(e)
    assert parse_expr(text) == e
    assert format_expr(parse_expr(text)) == text


def test_negative_literal_folding():
    assert parse_expr("-3") == Lit(F(-3))
    assert parse_expr("-(3)") == Neg(Lit(F(3)))
    assert parse_expr("-u * k") == Mul(Neg(Ref("u")), Ref("k"))
    with pytest.raises(ParseError):
        parse_expr("u u")
