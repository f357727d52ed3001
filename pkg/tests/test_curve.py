from fractions import Fraction

import pytest
from gmpy2 import mpq

from heightinterp.curve import (
    CONSTANTS,
    INFINITY,
    CurveError,
    Point,
    add,
    canonical_height,
    format_point,
    gamma_point,
    generator,
    height_gap,
    naive_height,
    on_curve,
    parse_point,
    pi,
    scalar_mul,
)

REF = mpq("0.7545769")


def frac_add(P, Q):
    """Textbook chord-and-tangent law on y^2 = x^3 + 2 with Fractions (independent oracle)."""
    if P is None:
        return Q
    if Q is None:
        return P
    (x1, y1), (x2, y2) = P, Q
    if x1 == x2 and y1 == -y2:
        return None
    lam = (3 * x1 * x1) / (2 * y1) if P == Q else (y2 - y1) / (x2 - x1)
    x3 = lam * lam - x1 - x2
    return (x3, lam * (x1 - x3) - y1)


def frac_mul(n):
    P, out = (Fraction(-1), Fraction(1)), None
    for _ in range(n):
        out = frac_add(out, P)
    return out


def as_frac(P):
    return None if P.is_infinity else (Fraction(int(P.x.numerator), int(P.x.denominator)),
                                        Fraction(int(P.y.numerator), int(P.y.denominator)))


def test_doubling_example():
    assert format_point(scalar_mul(2, generator())) == "(17/4, -71/8)"


@pytest.mark.parametrize("n", range(0, 13))
def test_scalar_mul_matches_oracle(n):
    assert as_frac(scalar_mul(n, generator())) == frac_mul(n)


def test_group_law_properties():
    P = generator()
    for a in range(-5, 6):
        for b in range(-5, 6):
            R = add(scalar_mul(a, P), scalar_mul(b, P))
            assert on_curve(R)
            assert R == scalar_mul(a + b, P)
    assert add(P, -P) == INFINITY
    assert add(INFINITY, P) == P


def test_off_curve_rejected():
    with pytest.raises(CurveError):
        add(Point(mpq(1), mpq(1)), generator())


def test_pi_and_naive_height():
    P = scalar_mul(2, generator())
    assert pi(P) == mpq(17, 4)
    assert naive_height(P) == 17
    assert naive_height(INFINITY) == 1
    with pytest.raises(CurveError):
        pi(INFINITY)


def test_point_text_round_trip():
    for n in (0, 1, -3, 7):
        P = scalar_mul(n, generator())
        assert parse_point(format_point(P)) == P


def test_canonical_height_k6_contains_reference():
    hh = canonical_height(generator(), 6)
    assert hh.contains(REF)
    assert hh.width < mpq(1, 100)


def test_canonical_height_shrinks_with_k():
    w = [canonical_height(generator(), k).width for k in (3, 5, 7)]
    assert w[0] > w[1] > w[2]


def test_canonical_height_of_torsion_free_multiple():
    # hhat([2]P) = 4 hhat(P): the intervals must overlap
    h1 = canonical_height(generator(), 8).scale(4)
    h2 = canonical_height(scalar_mul(2, generator()), 7)
    assert h1.lo <= h2.hi and h2.lo <= h1.hi


def test_height_gaps_within_bounds():
    hh = canonical_height(generator(), 9)
    for k in range(1, 13):
        g = height_gap(k, hh)
        assert CONSTANTS.gap_lower < g.lo and g.hi < CONSTANTS.gap_upper


def test_gamma_points():
    assert gamma_point(0, 2) == INFINITY
    assert gamma_point(1, 2) == scalar_mul(2, generator())
    assert gamma_point(3, 2) == scalar_mul(6, generator())
    assert gamma_point(-2, 3) == -scalar_mul(6, generator())
