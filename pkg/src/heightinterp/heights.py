"""Exact rationals, multiplicative heights and certified logarithms.

Heights are kept multiplicatively: for a tuple of rationals with least common
denominator ``d`` the multiplicative height is ``max(d, |d q_1|, ..., |d q_m|)``,
an exact positive integer.  Every height relation (``H``, ``E``, ``S``) is an
integer comparison.  Real numbers only appear through :func:`log_height`, which
returns an interval with rational endpoints obtained by directed rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence, Union

import gmpy2
from gmpy2 import mpq, mpz

Rational = type(mpq(0))
IntLike = Union[int, "mpz"]

__all__ = [
    "Rational",
    "RationalError",
    "CertifiedReal",
    "make_rational",
    "as_rational",
    "parse_rational",
    "format_rational",
    "mult_height",
    "holds_H",
    "holds_E",
    "holds_S",
    "product_formula_check",
    "log_height",
    "log_le",
]


class RationalError(ValueError):
    """Malformed or undefined rational number."""


def make_rational(a: IntLike, b: IntLike = 1) -> Rational:
    """Return ``a/b`` in lowest terms with positive denominator."""
    if b == 0:
        raise RationalError(f"zero denominator in {a}/{b}")
    return mpq(a, b)


def as_rational(value) -> Rational:
    if isinstance(value, Rational):
        return value
    if isinstance(value, str):
        return parse_rational(value)
    try:
        return mpq(value)
    except (TypeError, ValueError) as exc:
        raise RationalError(f"cannot interpret {value!r} as a rational") from exc


def parse_rational(text: str) -> Rational:
    """Parse ``"a/b"`` or ``"a"``; whitespace around the parts is ignored."""
    s = text.strip()
    num, sep, den = s.partition("/")
    try:
        a = int(num.strip())
        b = int(den.strip()) if sep else 1
    except ValueError as exc:
        raise RationalError(f"malformed rational {text!r}") from exc
    return make_rational(a, b)


def format_rational(q) -> str:
    q = as_rational(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def mult_height(q: Union[Sequence, Rational, int]) -> mpz:
    """Multiplicative height ``max{d, |d q_1|, ..., |d q_m|}`` of a tuple."""
    if isinstance(q, (Rational, int, type(mpz(0)))):
        q = (q,)
    qs = [as_rational(v) for v in q]
    if not qs:
        raise ValueError("height of an empty tuple is undefined")
    d = reduce(gmpy2.lcm, (v.denominator for v in qs), mpz(1))
    return max([d] + [abs(v.numerator) * (d // v.denominator) for v in qs])


def holds_H(x, y) -> bool:
    """``h_m(x) <= h_n(y)``."""
    return mult_height(x) <= mult_height(y)


def holds_E(x, y) -> bool:
    return mult_height(x) == mult_height(y)


def holds_S(x, y, z) -> bool:
    """``h(x) + h(y) = h(z)``."""
    return mult_height(x) * mult_height(y) == mult_height(z)


def _factor(n: int) -> dict[int, int]:
    n = abs(int(n))
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def product_formula_check(q) -> bool:
    """Check that the archimedean and p-adic absolute values of ``q`` multiply to 1."""
    q = as_rational(q)
    if q == 0:
        raise RationalError("the product formula needs a nonzero rational")
    primes = set(_factor(q.numerator)) | set(_factor(q.denominator))
    total = abs(q)
    for p in primes:
        v = _valuation(q.numerator, p) - _valuation(q.denominator, p)
        total *= mpq(1, p**v) if v >= 0 else mpq(p ** (-v))
    return total == 1


def _valuation(n: int, p: int) -> int:
    n = abs(int(n))
    v = 0
    while n and n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class CertifiedReal:
    """A real number known to lie in the closed interval ``[lo, hi]``."""

    lo: Rational
    hi: Rational

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def exact(cls, value) -> "CertifiedReal":
        v = as_rational(value)
        return cls(v, v)

    @property
    def width(self) -> Rational:
        return self.hi - self.lo

    @property
    def mid(self) -> Rational:
        return (self.lo + self.hi) / 2

    def contains(self, value) -> bool:
        v = as_rational(value)
        return self.lo <= v <= self.hi

    def __add__(self, other):
        if not isinstance(other, CertifiedReal):
            other = CertifiedReal.exact(other)
        return CertifiedReal(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return CertifiedReal(-self.hi, -self.lo)

    def __sub__(self, other):
        if not isinstance(other, CertifiedReal):
            other = CertifiedReal.exact(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "CertifiedReal":
        c = as_rational(c)
        a, b = self.lo * c, self.hi * c
        return CertifiedReal(min(a, b), max(a, b))

    def intersect(self, other: "CertifiedReal") -> "CertifiedReal":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise ValueError("disjoint intervals: an enclosure is wrong")
        return CertifiedReal(lo, hi)

    def __str__(self) -> str:
        return f"[{float(self.lo):.10g}, {float(self.hi):.10g}]"


def _directed_log(n: mpz, prec: int, rnd) -> Rational:
    # n is rounded in the same direction as the log, so the bound stays one-sided
    with gmpy2.context(precision=prec, round=rnd):
        return mpq(gmpy2.log(gmpy2.mpfr(n)))


def log_height(H: IntLike, eps=mpq(1, 10**12)) -> CertifiedReal:
    """Interval of width at most ``eps`` containing ``log(H)``."""
    H = mpz(H)
    if H < 1:
        raise ValueError("heights are positive integers")
    eps = as_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if H == 1:
        return CertifiedReal(mpq(0), mpq(0))
    # log H is about bits*0.69; relative precision needs those bits plus eps's.
    prec = 64 + H.bit_length().bit_length() + max(0, -int(gmpy2.floor(gmpy2.log2(eps))))
    while True:
        lo = _directed_log(H, prec, gmpy2.RoundDown)
        hi = _directed_log(H, prec, gmpy2.RoundUp)
        if hi - lo <= eps:
            return CertifiedReal(lo, hi)
        prec *= 2


def log_le(a: IntLike, b: IntLike, c=0) -> bool:
    """Decide ``log(a) <= log(b) + c`` for positive integers ``a``, ``b``.

    For ``c == 0`` this is exact; otherwise ``a/b = e^c`` cannot hold for a
    nonzero rational ``c``, so refining the intervals always terminates.
    """
    a, b, c = mpz(a), mpz(b), as_rational(c)
    if c == 0:
        return a <= b
    eps = mpq(1, 2**40)
    while True:
        gap = log_height(a, eps) - log_height(b, eps) - c
        if gap.hi <= 0:
            return True
        if gap.lo > 0:
            return False
        eps /= 2**32
