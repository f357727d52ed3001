import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from heightinterp.formula import (
    ONE,
    ZERO,
    Add,
    And,
    AtomB,
    AtomEq,
    AtomH,
    Exists,
    FormulaError,
    MissingVariable,
    Mul,
    Or,
    ParseError,
    Var,
    check_flat_names,
    check_witness,
    eval_term,
    example_PM,
    free_vars,
    numeral,
    parse,
    parse_term,
    render,
    render_term,
    size,
)

from strategies import formulas, terms


@settings(max_examples=300)
@given(formulas)
def test_render_parse_round_trip(f):
    assert parse(render(f)) == f


@given(terms)
def test_term_round_trip(t):
    assert parse_term(render_term(t)) == t


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4, 5, 17, 255, 2**16 - 1, 2**16, 10**30, 2**1100 + 12345])
def test_numeral_value(n):
    assert eval_term(numeral(n), {}) == n


def test_numeral_is_compact():
    n = 2**4000 + 3**2000
    assert size(numeral(n)) < 12 * n.bit_length()


def test_integer_literals_parse_to_numerals():
    assert parse_term("3") == parse_term("(+ (+ 1 1) 1)")
    assert eval_term(parse_term("1000000"), {}) == 10**6


def test_check_witness_connectives():
    x, y = Var("x"), Var("y")
    f = Exists(("y",), And(AtomEq(Add(x, x), y), AtomH(1, 1, (y,), (x,))))
    assert check_witness(f, {"x": mpq(1, 2), "y": mpq(1)})
    assert not check_witness(f, {"x": mpq(1, 2), "y": mpq(2)})
    g = Or(AtomEq(x, ONE), AtomEq(y, ZERO))
    assert check_witness(g, {"x": mpq(1)})  # the untaken disjunct needs no values
    with pytest.raises(MissingVariable):
        check_witness(g, {"x": mpq(2)})


def test_height_atom_semantics():
    f = parse("(H 1 2 (x) (y z))")
    assert check_witness(f, {"x": mpq(6), "y": mpq(1, 2), "z": mpq(3)})
    assert not check_witness(f, {"x": mpq(7), "y": mpq(1, 2), "z": mpq(3)})


def test_b_atom_is_rejected_over_q():
    with pytest.raises(FormulaError):
        check_witness(parse("(B x y)"), {"x": mpq(4), "y": mpq(9)})


@pytest.mark.parametrize("text", ["(and (= x 1))", "(exists () (= x x))", "(= x", "(H 2 1 (x) (y))", ")", "(foo x)"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse(text)


def test_parse_error_position():
    with pytest.raises(ParseError) as exc:
        parse("(= x (+ 1 ))")
    assert exc.value.pos >= 0


def test_flat_names():
    check_flat_names(parse("(exists (x) (exists (y) (= x y)))"))
    with pytest.raises(FormulaError):
        check_flat_names(parse("(exists (x) (exists (x) (= x x)))"))
    with pytest.raises(FormulaError):
        check_flat_names(parse("(and (= x 0) (exists (x) (= x 1)))"))


def test_example_PM():
    f = example_PM(1)
    assert free_vars(f) == set()
    assert parse(render(f)) == f
    # the unit conjunct fails at a = 2 before the missing t matters
    assert check_witness(f, {"a": mpq(2), "x1": mpq(-1), "x2": mpq(1)}) is False
