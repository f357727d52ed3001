"""Exact group law, naive heights and certified canonical heights on y^2 = x^3 + 2.

The Mordell--Weil group of this curve is infinite cyclic, generated by
``P1 = (-1, 1)``.  Points are kept in reduced affine rational coordinates.
The canonical height is enclosed by an interval: for every ``j`` the naive
height of ``[2^j]P`` divided by ``4^j`` is within ``c_E / 4^j`` of it.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Optional

import gmpy2
from gmpy2 import mpq, mpz

from .heights import (
    CertifiedReal,
    Rational,
    RationalError,
    as_rational,
    format_rational,
    log_height,
    mult_height,
    parse_rational,
)

B_COEFF = 2


class CurveError(ValueError):
    """A point is not on the curve, or an operation is undefined for it."""


@dataclass(frozen=True)
class CurveConstants:
    gap_lower: Rational = mpq(-3192, 1000)
    gap_upper: Rational = mpq(3384, 1000)
    c_E: Rational = mpq(4)
    hhat_P1_reference: str = "0.7545769"


CONSTANTS = CurveConstants()


@dataclass(frozen=True)
class Point:
    """Affine rational point, or the point at infinity when ``x`` is None."""

    x: Optional[Rational] = None
    y: Optional[Rational] = None

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __neg__(self) -> "Point":
        if self.is_infinity:
            return self
        return Point(self.x, -self.y)

    def __str__(self) -> str:
        return format_point(self)


INFINITY = Point()


def affine(x, y) -> Point:
    return Point(as_rational(x), as_rational(y))


def on_curve(P: Point) -> bool:
    if P.is_infinity:
        return True
    return P.y * P.y == P.x**3 + B_COEFF


def _require(P: Point) -> None:
    if not on_curve(P):
        raise CurveError(f"{format_point(P)} is not on y^2 = x^3 + 2")


def generator() -> Point:
    return Point(mpq(-1), mpq(1))


def _add(P: Point, Q: Point) -> Point:
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    if P.x == Q.x:
        if P.y == -Q.y:
            return INFINITY
        # y = 0 would be a rational root of x^3 + 2
        assert P.y != 0
        lam = 3 * P.x * P.x / (2 * P.y)
    else:
        lam = (Q.y - P.y) / (Q.x - P.x)
    x3 = lam * lam - P.x - Q.x
    y3 = lam * (P.x - x3) - P.y
    return Point(x3, y3)


def add(P: Point, Q: Point) -> Point:
    """Chord-and-tangent sum of two points of the curve."""
    _require(P)
    _require(Q)
    return _add(P, Q)


def scalar_mul(n: int, P: Point) -> Point:
    """``[n]P`` by left-to-right double-and-add."""
    _require(P)
    n = int(n)
    if n < 0:
        return -scalar_mul(-n, P)
    R = INFINITY
    for bit in bin(n)[2:]:
        R = _add(R, R)
        if bit == "1":
            R = _add(R, P)
    return R


def pi(P: Point) -> Rational:
    """x-coordinate."""
    if P.is_infinity:
        raise CurveError("the point at infinity has no x-coordinate")
    return P.x


def naive_height(P: Point) -> mpz:
    _require(P)
    if P.is_infinity:
        return mpz(1)
    return mult_height(P.x)


def _double_x(X: mpz, Z: mpz) -> tuple[mpz, mpz]:
    """x-only doubling in projective form; x = X/Z, result reduced with Z >= 0."""
    Z3 = Z * Z * Z
    X3 = X * X * X
    Xn = X * (X3 - 16 * Z3)
    Zn = 4 * Z * (X3 + 2 * Z3)
    g = gmpy2.gcd(Xn, Zn)
    if g > 1:
        Xn //= g
        Zn //= g
    if Zn < 0:
        Xn, Zn = -Xn, -Zn
    return Xn, Zn


def canonical_height(P: Point, k: int, c_E=None) -> CertifiedReal:
    """Interval containing the canonical height of ``P``.

    Intersects ``[(log H_j - c_E)/4^j, (log H_j + c_E)/4^j]`` over ``j <= k``
    where ``H_j`` is the naive multiplicative height of ``[2^j]P``.
    """
    _require(P)
    if k < 0:
        raise ValueError("k must be nonnegative")
    if P.is_infinity:
        return CertifiedReal(mpq(0), mpq(0))
    c = CONSTANTS.c_E if c_E is None else as_rational(c_E)
    X, Z = mpz(P.x.numerator), mpz(P.x.denominator)
    result = None
    for j in range(k + 1):
        if j:
            X, Z = _double_x(X, Z)
        if Z == 0:
            # [2^j]P is the identity: P is torsion
            return CertifiedReal(mpq(0), mpq(0))
        scale = mpq(1, 4**j)
        # log error is divided by 4^j, so a coarse absolute eps suffices
        lh = log_height(max(abs(X), Z), mpq(4**j, 2**40))
        enclosure = CertifiedReal((lh.lo - c) * scale, (lh.hi + c) * scale)
        result = enclosure if result is None else result.intersect(enclosure)
    if result.lo < 0:
        result = CertifiedReal(mpq(0), max(result.hi, mpq(0)))
    return result


def height_gap(k: int, hhat: CertifiedReal) -> CertifiedReal:
    """Enclosure of ``k^2 * hhat(P1) - h_pi([k]P1)`` given an enclosure of ``hhat(P1)``."""
    H = naive_height(scalar_mul(k, generator()))
    return hhat.scale(k * k) - log_height(H, mpq(1, 2**40))


_gamma_cache: dict[tuple[int, int], Point] = {}
_gamma_lock = threading.Lock()


def gamma_point(k: int, N: int) -> Point:
    """``Q_k = [N k]P1``, memoized by ``(N, k)``."""
    if N < 1:
        raise ValueError("N must be positive")
    k = int(k)
    if k < 0:
        return -gamma_point(-k, N)
    key = (int(N), k)
    with _gamma_lock:
        hit = _gamma_cache.get(key)
    if hit is not None:
        return hit
    if k == 0:
        P = INFINITY
    elif k == 1:
        P = scalar_mul(N, generator())
    else:
        # Q_k = Q_{k-1} + Q_1 reuses the cache when walking k upwards
        P = _add(gamma_point(k - 1, N), gamma_point(1, N))
    with _gamma_lock:
        _gamma_cache.setdefault(key, P)
    return P


def format_point(P: Point) -> str:
    if P.is_infinity:
        return "inf"
    return f"({format_rational(P.x)}, {format_rational(P.y)})"


def parse_point(text: str) -> Point:
    s = text.strip()
    if s == "inf":
        return INFINITY
    if not (s.startswith("(") and s.endswith(")")):
        raise RationalError(f"malformed point {text!r}")
    parts = s[1:-1].split(",")
    if len(parts) != 2:
        raise RationalError(f"malformed point {text!r}")
    return Point(parse_rational(parts[0]), parse_rational(parts[1]))
