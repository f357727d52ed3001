from fractions import Fraction
from math import gcd

import mpmath
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from heightinterp.heights import (
    CertifiedReal,
    RationalError,
    as_rational,
    format_rational,
    holds_E,
    holds_H,
    holds_S,
    log_height,
    log_le,
    mult_height,
    parse_rational,
    product_formula_check,
)

fractions = st.fractions(max_denominator=10**18).filter(lambda f: abs(f.numerator) <= 10**18)


def oracle_height(*qs):
    d = 1
    for q in qs:
        d = d * q.denominator // gcd(d, q.denominator)
    return max([d] + [abs(q.numerator) * (d // q.denominator) for q in qs])


def test_examples():
    assert mult_height(mpq(7, 6)) == 7
    assert mult_height(mpq(0)) == 1
    assert mult_height(mpq(-5, 3)) == 5
    assert mult_height((mpq(1, 2), mpq(1, 3))) == 6
    assert holds_S(mpq(2, 3), mpq(5, 7), mpq(21))
    assert not holds_H([mpq(7)], [mpq(1, 2), mpq(3)])
    assert holds_H([mpq(6)], [mpq(1, 2), mpq(3)])
    assert holds_E(mpq(3, 7), mpq(-7, 5))


@given(fractions, fractions)
def test_matches_fraction_oracle(a, b):
    qa, qb = mpq(a.numerator, a.denominator), mpq(b.numerator, b.denominator)
    assert mult_height(qa) == oracle_height(a)
    assert mult_height((qa, qb)) == oracle_height(a, b)


@given(fractions, fractions)
def test_addition_of_heights(a, b):
    qa, qb = mpq(a.numerator, a.denominator), mpq(b.numerator, b.denominator)
    assert mult_height(qa) * mult_height(qb) == mult_height((qa, qb, qa * qb))


@given(st.fractions(max_denominator=10**6).filter(lambda f: f != 0 and abs(f.numerator) <= 10**6))
def test_product_formula(f):
    assert product_formula_check(mpq(f.numerator, f.denominator))


def test_product_formula_rejects_zero():
    with pytest.raises(RationalError):
        product_formula_check(mpq(0))


@pytest.mark.parametrize("text,value", [("3/4", mpq(3, 4)), ("-6/8", mpq(-3, 4)), ("12", mpq(12)), (" 5 / 10 ", mpq(1, 2))])
def test_parse_rational(text, value):
    assert parse_rational(text) == value
    assert parse_rational(format_rational(value)) == value


@pytest.mark.parametrize("text", ["1/0", "a/b", "", "1/2/3"])
def test_parse_rational_errors(text):
    with pytest.raises(RationalError):
        parse_rational(text)


@settings(max_examples=200)
@given(st.integers(min_value=1, max_value=10**40))
def test_log_height_encloses_mpmath(H):
    enc = log_height(H)
    with mpmath.workdps(60):
        ref = mpmath.log(H)
        assert mpmath.mpf(int(enc.lo.numerator)) / int(enc.lo.denominator) <= ref
        assert ref <= mpmath.mpf(int(enc.hi.numerator)) / int(enc.hi.denominator)
    assert enc.width <= mpq(1, 10**12)


def test_log_le_exact_and_shifted():
    assert log_le(6, 6)
    assert not log_le(7, 6)
    # log 7 <= log 2 + 1 + ...: e*2 = 5.43 < 7
    assert not log_le(7, 2, 1)
    assert log_le(5, 2, 1)
    assert log_le(100, 2, 4)  # 2 e^4 = 109.2
    assert not log_le(110, 2, 4)


@given(st.fractions(), st.fractions(), st.fractions())
def test_certified_real_arithmetic(a, b, c):
    lo, hi = sorted((as_rational(str(a)), as_rational(str(b))))
    x = CertifiedReal(lo, hi)
    y = CertifiedReal.exact(as_rational(str(c)))
    s = x + y
    assert s.lo == lo + y.lo and s.hi == hi + y.hi
    assert (x - x).contains(0)
    assert x.contains(x.mid)
