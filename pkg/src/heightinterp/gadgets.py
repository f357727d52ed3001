"""Definable height relations as formula templates with witness builders.

Every gadget comes in two halves:

* a formula builder taking interface terms and a name prefix for its bound
  variables (prefixes keep witnesses flat: all bound names are distinct);
* a witness builder returning values for exactly those bound variables,
  following the constructive direction of the corresponding height lemma.

Hypotheses that involve real constants (``h(x) <= h(y) + 1`` and the like)
are decided with certified logarithms via :func:`heights.log_le`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Optional, Sequence, Tuple

import gmpy2
from gmpy2 import isqrt, mpq, mpz

from .formula import (
    ONE,
    Add,
    And,
    AtomEq,
    AtomH,
    Exists,
    Formula,
    Mul,
    Term,
    Var,
    complete_witness,
    conj,
    free_vars,
    numeral,
)
from .heights import as_rational, log_le, mult_height

Assignment = Dict[str, object]

EXHAUSTIVE_LIMIT = 10**6

__all__ = [
    "GadgetError",
    "Guarantee",
    "GadgetInstance",
    "four_squares",
    "rational_four_squares",
    "JElement",
    "j_element",
    "formula_E11",
    "formula_S",
    "formula_J",
    "formula_A",
    "formula_AM",
    "formula_EM",
    "formula_L",
    "witness_J",
    "witness_A",
    "witness_AM",
    "witness_EM",
    "witness_L",
    "sound_A",
    "sound_AM",
    "sound_EM",
    "sound_L",
    "gadget_J",
    "gadget_A",
    "gadget_AM",
    "gadget_EM",
    "gadget_L",
    "catalog",
]


class GadgetError(ValueError):
    """A witness was requested for inputs outside the gadget's completeness hypothesis."""


# ---------------------------------------------------------------- four squares


def _four_squares_small(n: int) -> Tuple[int, int, int, int]:
    """Lexicographically largest k1 >= k2 >= k3 >= k4 >= 0 with sum of squares n."""
    for a in range(int(isqrt(n)), -1, -1):
        ra = n - a * a
        if 3 * a * a < ra:  # the rest cannot fit under a
            break
        for b in range(min(a, int(isqrt(ra))), -1, -1):
            rb = ra - b * b
            if 2 * b * b < rb:
                break
            for c in range(min(b, int(isqrt(rb))), -1, -1):
                rc = rb - c * c
                if c * c < rc:
                    break
                d = int(isqrt(rc))
                if d * d == rc and d <= c:
                    return (a, b, c, d)
    raise AssertionError(f"no four-square decomposition of {n}")  # Lagrange


def _three_squares_small(r: int) -> Optional[Tuple[mpz, mpz, mpz]]:
    for a in range(int(isqrt(r)), -1, -1):
        ra = r - a * a
        if 2 * a * a < ra:
            break
        for b in range(min(a, int(isqrt(ra))), -1, -1):
            rb = ra - b * b
            if b * b < rb:
                break
            c = int(isqrt(rb))
            if c * c == rb:
                return (mpz(a), mpz(b), mpz(c))
    return None


_SMALL_PRIMES = [p for p in range(3, 2000) if gmpy2.is_prime(p)]
# cheap compositeness filter before Miller-Rabin on large candidates
_PRIMORIAL = mpz(1)
for _p in range(3, 20000, 2):
    if gmpy2.is_prime(_p):
        _PRIMORIAL *= _p


def _two_squares_prime(p: mpz) -> Optional[Tuple[mpz, mpz]]:
    """b^2 + c^2 = p for a prime p = 1 mod 4 (None if p turns out unsuitable)."""
    for a in _SMALL_PRIMES:
        j = gmpy2.jacobi(a, p)
        if j == -1:
            break
        if j == 0:
            return None
    else:
        return None
    s = gmpy2.powmod(a, (p - 1) // 4, p)
    if (s * s) % p != p - 1:
        return None
    a, b = p, s
    r = isqrt(p)
    while b > r:
        a, b = b, a % b
    c2 = p - b * b
    c = isqrt(c2)
    if c * c != c2:
        return None
    return b, c


def _two_squares(p: mpz) -> Optional[Tuple[mpz, mpz]]:
    """Two squares for 0, 1, 2, perfect squares, primes = 1 mod 4 and twice such primes."""
    if p < 3:
        return {0: (mpz(0), mpz(0)), 1: (mpz(1), mpz(0)), 2: (mpz(1), mpz(1))}[int(p)]
    s = isqrt(p)
    if s * s == p:
        return s, mpz(0)
    if p % 4 == 2:
        half = _two_squares(p // 2)
        if half is None:
            return None
        b, c = half
        return b + c, abs(b - c)
    if p % 4 != 1:
        return None
    if p > 20000 and gmpy2.gcd(p, _PRIMORIAL) != 1:
        return None
    # the result is verified exactly, so a weak probable-prime test suffices
    if not gmpy2.is_strong_prp(p, 2):
        return None
    return _two_squares_prime(p)


def _three_squares(r: mpz, tries: int = 200000) -> Optional[Tuple[mpz, mpz, mpz]]:
    r = mpz(r)
    if r <= EXHAUSTIVE_LIMIT:
        return _three_squares_small(int(r))
    scale = mpz(1)
    while r % 4 == 0:
        r //= 4
        scale *= 2
    if r % 8 == 7:
        return None
    y = isqrt(r)
    for _ in range(tries):
        if y < 0:
            break
        two = _two_squares(r - y * y)
        if two is not None:
            return (y * scale, two[0] * scale, two[1] * scale)
        y -= 1
    return None


def _four_squares_large(n: mpz) -> Tuple[mpz, mpz, mpz, mpz]:
    scale = mpz(1)
    while n % 4 == 0 and n > 0:
        n //= 4
        scale *= 2
    x = isqrt(n)
    while x >= 0:
        r = n - x * x
        if r % 8 != 7 and r % 4 != 0:
            t = _three_squares(r, tries=20000)
            if t is not None:
                return tuple(sorted((x * scale,) + tuple(v * scale for v in t), reverse=True))
        x -= 1
    raise AssertionError("four-squares search exhausted")  # unreachable by Lagrange


def four_squares(n) -> Tuple[int, int, int, int]:
    """Deterministic k1 >= k2 >= k3 >= k4 >= 0 with k1^2 + k2^2 + k3^2 + k4^2 = n.

    Up to 10^6 the lexicographically largest decomposition is returned; above
    that a deterministic greedy search is used (x near sqrt(n), then a prime
    remainder split into two squares by the Hermite--Serret method).
    """
    n = int(n)
    if n < 0:
        raise ValueError("four_squares needs n >= 0")
    if n <= EXHAUSTIVE_LIMIT:
        return _four_squares_small(n)
    k = tuple(int(v) for v in _four_squares_large(mpz(n)))
    assert sum(v * v for v in k) == n
    return k


def rational_four_squares(q) -> Tuple:
    """Rationals r1..r4 with r1^2 + ... + r4^2 = q exactly."""
    q = as_rational(q)
    if q < 0:
        raise ValueError("negative rationals are not sums of squares")
    a, b = int(q.numerator), int(q.denominator)
    d = int(isqrt(b))
    if d * d == b:
        return tuple(mpq(k, d) for k in four_squares(a))
    return tuple(mpq(k, b) for k in four_squares(a * b))


# ---------------------------------------------------------------- J elements


@dataclass(frozen=True)
class JElement:
    """q in [1, 2] with H(q) = T, and square witnesses for q - 1 and 2 - q."""

    q: object
    low: tuple
    high: tuple


def _check_j(e: JElement) -> JElement:
    assert sum(s * s for s in e.low) == e.q - 1
    assert sum(s * s for s in e.high) == 2 - e.q
    return e


def _family_value(e) -> mpz:
    c = 2 * mpz(e) ** 2 + 1
    return c * c + 1


def _family_element(T: mpz) -> Optional[JElement]:
    """Closed form when T = c^2 + 1 with c = 2e^2 + 1 and e >= 1.

    q = T/c^2 has q - 1 = (1/c)^2 and 2 - q = ((c-1)^2 + (2e)^2)/c^2.
    """
    c = isqrt(T - 1)
    if c * c != T - 1 or c % 2 == 0 or c < 3:
        return None
    e = isqrt((c - 1) // 2)
    if 2 * e * e + 1 != c:
        return None
    z = mpq(0)
    return _check_j(JElement(mpq(T, c * c), (mpq(1, c), z, z, z), (mpq(c - 1, c), mpq(2 * e, c), z, z)))


def family_at_least(target) -> mpz:
    """Smallest height T = (2e^2+1)^2 + 1 (e >= 1) with T >= target."""
    target = mpz(target)
    e = mpz(1)
    if target > 10:
        e = max(mpz(1), gmpy2.iroot(target // 4, 4)[0] - 1)
        while e > 1 and _family_value(e - 1) >= target:
            e -= 1
    while _family_value(e) < target:
        e += 1
    return _family_value(e)


@lru_cache(maxsize=4096)
def j_element(T) -> JElement:
    """An element of J of multiplicative height exactly ``T``.

    For ``T <= 10^6`` this is ``T/(T-1)``.  Larger heights use ``T/c^2`` with
    ``c`` just below ``sqrt(T)`` and coprime to ``T``: then ``T - c^2`` and the
    correction term in ``2c^2 - T = (c-a)^2 + r`` are only about ``sqrt(T)``,
    which keeps the square decompositions cheap.
    """
    T = mpz(T)
    if T < 1:
        raise ValueError("heights are positive")
    if T == 1:
        z = mpq(0)
        return _check_j(JElement(mpq(1), (z, z, z, z), (mpq(1), z, z, z)))
    fam = _family_element(T)
    if fam is not None:
        return fam
    if T <= EXHAUSTIVE_LIMIT:
        q = mpq(T, T - 1)
        return _check_j(JElement(q, rational_four_squares(q - 1), rational_four_squares(2 - q)))
    # q = T/c^2 with c = C - a.  Then 2c^2 - T = (c - a)^2 + R where
    # R = C^2 - T - 2a^2; picking a near sqrt((C^2 - T)/2) makes R about
    # T^(1/4), so both square searches only need primes far below T.
    C = isqrt(T) + 1
    while True:
        D = C * C - T
        a0 = isqrt(D // 2)
        for a in range(int(a0), max(int(a0) - 8, 0), -1):
            c = C - a
            if 2 * c * c < T or gmpy2.gcd(c, T) != 1:
                continue
            t = _three_squares(D - 2 * a * a)
            if t is None:
                continue
            low = _four_squares_large(T - c * c)
            q = mpq(T, c * c)
            high = (mpq(c - a, c),) + tuple(mpq(v, c) for v in t)
            return _check_j(JElement(q, tuple(mpq(v, c) for v in low), high))
        C += 1


# ---------------------------------------------------------------- formulas


def _sum_sq(vs: Sequence[Term]) -> Term:
    sq = [Mul(t, t) for t in vs]
    return Add(Add(sq[0], sq[1]), Add(sq[2], sq[3]))


def formula_E11(x: Term, y: Term) -> Formula:
    """h(x) = h(y)."""
    return And(AtomH(1, 1, (x,), (y,)), AtomH(1, 1, (y,), (x,)))


def formula_S(x: Term, y: Term, z: Term) -> Formula:
    """h(x) + h(y) = h(z), via h(x) + h(y) = h_3(x, y, xy)."""
    triple = (x, y, Mul(x, y))
    return And(AtomH(1, 3, (z,), triple), AtomH(3, 1, triple, (z,)))


def _j_names(p: str) -> tuple:
    return tuple(f"{p}s{i}" for i in range(1, 5)) + tuple(f"{p}r{i}" for i in range(1, 5))


def formula_J(q: Term, p: str = "") -> Formula:
    """1 <= q <= 2: both q - 1 and 2 - q are sums of four squares."""
    names = _j_names(p)
    s = [Var(n) for n in names[:4]]
    r = [Var(n) for n in names[4:]]
    lower = AtomEq(q, Add(ONE, _sum_sq(s)))
    upper = AtomEq(Add(ONE, ONE), Add(q, _sum_sq(r)))
    return Exists(names, And(lower, upper))


def formula_A(x: Term, y: Term, p: str = "") -> Formula:
    """Approximate comparison: complete for h(x) <= h(y)+1, sound for h(x) <= h(y)+2."""
    q = Var(p + "q")
    body = conj([formula_J(q, p + "j."), formula_E11(y, q), AtomH(1, 1, (x,), (Add(q, numeral(5)),))])
    return Exists((p + "q",), body)


def _chain_names(M: int, p: str) -> tuple:
    return tuple(f"{p}t{j}" for j in range(1, 2 * M))


def formula_AM(M: int, x: Term, y: Term, p: str = "") -> Formula:
    """Chain of 2M-1 intermediate points; complete for h(x) <= h(y)+M, sound for 4M."""
    if M < 1:
        raise ValueError("M must be at least 1")
    if M == 1:
        return formula_A(x, y, p)
    names = _chain_names(M, p)
    pts = [x] + [Var(n) for n in names] + [y]
    links = [formula_A(pts[i], pts[i + 1], f"{p}a{i}.") for i in range(len(pts) - 1)]
    return Exists(names, conj(links))


def formula_EM(M: int, x: Term, y: Term, p: str = "") -> Formula:
    """|h(x) - h(y)| <= M implies it; it implies |h(x) - h(y)| <= 4M."""
    return And(formula_AM(M, x, y, p + "f."), formula_AM(M, y, x, p + "b."))


L_OFFSET = 50000


def formula_L(x: Term, y: Term, p: str = "") -> Formula:
    """Strict gap: complete for h(x)+11 <= h(y), sound for h(x)+10 <= h(y)."""
    q = Var(p + "q")
    body = conj([formula_J(q, p + "j."), formula_E11(x, q), AtomH(1, 1, (Add(q, numeral(L_OFFSET)),), (y,))])
    return Exists((p + "q",), body)


# ---------------------------------------------------------------- witnesses


def witness_J(q, p: str = "", element: Optional[JElement] = None) -> Assignment:
    q = as_rational(q)
    if element is None:
        if not (1 <= q <= 2):
            raise GadgetError(f"{q} is not in [1, 2]")
        element = JElement(q, rational_four_squares(q - 1), rational_four_squares(2 - q))
    names = _j_names(p)
    return dict(zip(names, element.low + element.high))


def witness_A(x, y, p: str = "", strict: bool = True) -> Assignment:
    """Bound-variable values for ``formula_A(x, y, p)``; needs h(x) <= h(y) + 1."""
    hx, hy = mult_height(as_rational(x)), mult_height(as_rational(y))
    if strict and not log_le(hx, hy, 1):
        raise GadgetError("A-witness needs h(x) <= h(y) + 1")
    e = j_element(hy)
    w = {p + "q": e.q}
    w.update(witness_J(e.q, p + "j.", e))
    return w


def _chain_values(M: int, y) -> list:
    """t_j = 2^(2M-j) H(y); above 10^6 rounded up to the nearest cheap J-height."""
    v = mult_height(as_rational(y))
    out = []
    for j in range(1, 2 * M):
        t = 2 ** (2 * M - j) * v
        out.append(mpq(t if t <= EXHAUSTIVE_LIMIT else family_at_least(t)))
    return out


def witness_AM(M: int, x, y, p: str = "", strict: bool = True) -> Assignment:
    """Chain witness t_j = 2^(2M-j) H(y); needs h(x) <= h(y) + M."""
    if strict and not log_le(mult_height(as_rational(x)), mult_height(as_rational(y)), M):
        raise GadgetError(f"A^{M}-witness needs h(x) <= h(y) + {M}")
    if M == 1:
        return witness_A(x, y, p, strict=False)
    names = _chain_names(M, p)
    ts = _chain_values(M, y)
    pts = [as_rational(x)] + ts + [as_rational(y)]
    w: Assignment = dict(zip(names, ts))
    for i in range(len(pts) - 1):
        w.update(witness_A(pts[i], pts[i + 1], f"{p}a{i}.", strict=False))
    return w


def witness_EM(M: int, x, y, p: str = "", strict: bool = True) -> Assignment:
    if strict:
        hx, hy = mult_height(as_rational(x)), mult_height(as_rational(y))
        if not (log_le(hx, hy, M) and log_le(hy, hx, M)):
            raise GadgetError(f"E^{M}-witness needs |h(x) - h(y)| <= {M}")
    w = witness_AM(M, x, y, p + "f.", strict=False)
    w.update(witness_AM(M, y, x, p + "b.", strict=False))
    return w


def witness_L(x, y, p: str = "", strict: bool = True) -> Assignment:
    """q in J with h(q) = h(x); needs h(x) + 11 <= h(y)."""
    hx, hy = mult_height(as_rational(x)), mult_height(as_rational(y))
    if strict and not log_le(hx, hy, -11):
        raise GadgetError("L-witness needs h(x) + 11 <= h(y)")
    e = j_element(hx)
    w = {p + "q": e.q}
    w.update(witness_J(e.q, p + "j.", e))
    return w


# ---------------------------------------------------------------- soundness checks


def sound_A(x, y) -> bool:
    return log_le(mult_height(as_rational(x)), mult_height(as_rational(y)), 2)


def sound_AM(M: int, x, y) -> bool:
    return log_le(mult_height(as_rational(x)), mult_height(as_rational(y)), 4 * M)


def sound_EM(M: int, x, y) -> bool:
    return sound_AM(M, x, y) and sound_AM(M, y, x)


def sound_L(x, y) -> bool:
    return log_le(mult_height(as_rational(x)), mult_height(as_rational(y)), -10)


# ---------------------------------------------------------------- instances


@dataclass(frozen=True)
class Guarantee:
    """complete: hypothesis bound under which a witness is built; sound: bound every acceptance satisfies."""

    complete_bound: object
    sound_bound: object


@dataclass(frozen=True)
class GadgetInstance:
    name: str
    formula: Formula
    interface: tuple
    guarantee: Optional[Guarantee] = None
    builder: Optional[Callable[..., Assignment]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if free_vars(self.formula) != set(self.interface):
            raise ValueError(f"{self.name}: free variables differ from the interface")

    def witness(self, *values, strict: bool = True, complete: bool = True, **options) -> Assignment:
        """Full assignment (interface values plus bound variables).

        Values may be rationals or objects carrying the value as ``.q``
        (such as X4 certificates, which some builders need).  With
        ``complete`` the variables of unused disjuncts are set to 0.
        """
        if self.builder is None:
            raise GadgetError(f"{self.name} has no witness builder")
        if len(values) != len(self.interface):
            raise ValueError(f"{self.name} takes {len(self.interface)} values")
        w: Assignment = {n: as_rational(getattr(val, "q", val)) for n, val in zip(self.interface, values)}
        w.update(self.builder(*values, strict=strict, **options))
        return complete_witness(self.formula, w) if complete else w


def gadget_J() -> GadgetInstance:
    return GadgetInstance(
        "J", formula_J(Var("q")), ("q",), Guarantee(None, None),
        lambda q, strict=True: witness_J(q),
    )


def gadget_A() -> GadgetInstance:
    return GadgetInstance(
        "A", formula_A(Var("x"), Var("y")), ("x", "y"), Guarantee(mpq(1), mpq(2)),
        lambda x, y, strict=True: witness_A(x, y, strict=strict),
    )


def gadget_AM(M: int) -> GadgetInstance:
    return GadgetInstance(
        f"A^{M}", formula_AM(M, Var("x"), Var("y")), ("x", "y"), Guarantee(mpq(M), mpq(4 * M)),
        lambda x, y, strict=True: witness_AM(M, x, y, strict=strict),
    )


def gadget_EM(M: int) -> GadgetInstance:
    return GadgetInstance(
        f"E^{M}", formula_EM(M, Var("x"), Var("y")), ("x", "y"), Guarantee(mpq(M), mpq(4 * M)),
        lambda x, y, strict=True: witness_EM(M, x, y, strict=strict),
    )


def gadget_L() -> GadgetInstance:
    return GadgetInstance(
        "L", formula_L(Var("x"), Var("y")), ("x", "y"), Guarantee(mpq(11), mpq(10)),
        lambda x, y, strict=True: witness_L(x, y, strict=strict),
    )


def catalog(max_M: int = 4) -> Dict[str, GadgetInstance]:
    out = {"J": gadget_J(), "A": gadget_A(), "L": gadget_L()}
    for M in range(1, max_M + 1):
        out[f"A^{M}"] = gadget_AM(M)
        out[f"E^{M}"] = gadget_EM(M)
    return out
