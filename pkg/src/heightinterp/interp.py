"""Interpreting (N; 0, 1, +, B, =) inside the rationals with height comparisons.

Fix ``Gamma = [N] E(Q)`` with generator ``Q_1 = [N]P1`` and ``D = N^2 hhat(P1)``.
``X`` is the set of x-coordinates of nonzero points of ``Gamma`` together with
0; ``X_n`` collects rationals whose height is a sum of ``n`` heights of
``X``-elements.  On ``X_4`` the map ``theta`` sends ``q`` to the unique ``m``
with ``h(q)`` close to ``m D``.  Every natural number is hit, via Lagrange's
four squares theorem.

This module holds the profile (``N``, ``c_E``, a certified ``D``), the
margin analysis that decides which ``D`` are large enough, the encoder and
decoder for ``theta``, and the gadgets for 0, 1, =, + and B on ``X_4``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq, mpz

from . import curve
from .curve import INFINITY, Point, gamma_point, generator, pi, scalar_mul
from .formula import (
    ONE,
    ZERO,
    Add,
    And,
    AtomEq,
    Exists,
    Formula,
    Mul,
    Or,
    Term,
    Var,
    conj,
    numeral,
)
from .gadgets import (
    Assignment,
    GadgetError,
    GadgetInstance,
    Guarantee,
    formula_E11,
    formula_EM,
    formula_L,
    formula_S,
    four_squares,
    witness_EM,
    witness_L,
)
from .heights import CertifiedReal, as_rational, format_rational, log_height, mult_height

# Thresholds of the approximate-equality gadgets; fixed, only D scales.
M_ZERO, M_ONE, M_EQ, M_ADD, M_B = 16, 32, 32, 48, 20


class InterpError(ValueError):
    pass


class ProfileRejected(InterpError):
    pass


class PrecisionError(InterpError):
    pass


class NotInX4(InterpError):
    pass


class RangeError(InterpError):
    pass


# ---------------------------------------------------------------- margins


@dataclass(frozen=True)
class Constraint:
    name: str
    source: str
    bound: object  # D must be strictly larger


@dataclass(frozen=True)
class SlackReport:
    c_E: object
    constraints: tuple
    intermediates: tuple  # (name, value) pairs quoted by the proofs
    completeness: tuple  # (name, required, limit, ok)
    B_dec: object
    D_min: object

    @property
    def feasible(self) -> bool:
        return all(ok for *_, ok in self.completeness)

    def as_dict(self) -> dict:
        return {
            "c_E": format_rational(self.c_E),
            "constraints": [
                {"name": c.name, "source": c.source, "D_greater_than": format_rational(c.bound)}
                for c in self.constraints
            ],
            "intermediates": {n: format_rational(v) for n, v in self.intermediates},
            "completeness": [
                {"name": n, "required": format_rational(r), "limit": format_rational(l), "ok": ok}
                for n, r, l, ok in self.completeness
            ],
            "B_dec": format_rational(self.B_dec),
            "D_min": format_rational(self.D_min),
        }


def slack_analysis(c_E=4) -> SlackReport:
    """Lower bounds on D under which every relation gadget decodes correctly.

    ``e4 = 4 c_E`` bounds ``|h(q) - theta(q) D|`` on ``X_4``; ``E^M`` accepts only
    pairs with height difference at most ``4M``.
    """
    c = as_rational(c_E)
    if c <= 0:
        raise ValueError("c_E must be positive")
    e4 = 4 * c
    zero_h = mpq(4 * M_ZERO)
    one_h = 4 * M_ONE + e4
    eq_slack = 2 * e4 + 4 * M_EQ
    add_slack = 3 * e4 + 4 * M_ADD
    b_h = 4 * M_B + c
    soundness = [
        Constraint("zero", "E^16(0,x): |h(x)| <= 64, plus the X4 error", zero_h + e4),
        Constraint("one", "E^32(q1,x): |h(x) - D| <= 4*32 + e4, plus the X4 error", one_h + e4),
        Constraint("eq", "E^32(x,y): e4 + e4 + 4*32", eq_slack),
        Constraint("add", "E^48(w,z) with S(x,y,w): 3*e4 + 4*48", add_slack),
        Constraint("B", "E^20(x,gamma): 4*20 + c_E, plus the X4 error", b_h + e4),
    ]
    B_dec = max(c.bound for c in soundness)
    constraints = soundness + [
        Constraint("L-separation", "h(Q_k) + 11 <= h(Q_{k+1}) for k >= 0: D >= 11 + 2 c_E", 11 + 2 * c),
        Constraint("uniqueness", "two multiples of D within e4 of one height: D > 2 e4 + 1", 2 * e4 + 1),
        Constraint("decode-window", "unique m with |h - mD| <= B_dec: D > 2 B_dec", 2 * B_dec),
    ]
    completeness = (
        ("zero", e4, mpq(M_ZERO), e4 <= M_ZERO),
        ("one", 2 * e4, mpq(M_ONE), 2 * e4 <= M_ONE),
        ("eq", 2 * e4, mpq(M_EQ), 2 * e4 <= M_EQ),
        ("add", 3 * e4, mpq(M_ADD), 3 * e4 <= M_ADD),
        ("B", e4 + c, mpq(M_B), e4 + c <= M_B),
    )
    intermediates = (
        ("zero", zero_h),
        ("one", one_h),
        ("eq", eq_slack),
        ("add", add_slack),
        ("B", b_h),
    )
    return SlackReport(
        c_E=c,
        constraints=tuple(constraints),
        intermediates=intermediates,
        completeness=completeness,
        B_dec=B_dec,
        D_min=max(x.bound for x in constraints),
    )


# ---------------------------------------------------------------- profiles


@lru_cache(maxsize=64)
def _hhat_P1(k: int) -> CertifiedReal:
    return curve.canonical_height(generator(), k)


@dataclass(frozen=True)
class Profile:
    N: int
    c_E: object
    D: CertifiedReal
    m_max: int
    B_dec: object
    k: int = 0  # doubling depth used for the canonical height

    @property
    def window(self):
        return self.B_dec

    def as_dict(self) -> dict:
        return {
            "N": self.N,
            "c_E": format_rational(self.c_E),
            "D": [format_rational(self.D.lo), format_rational(self.D.hi)],
            "D_approx": float(self.D.mid),
            "m_max": self.m_max,
            "B_dec": format_rational(self.B_dec),
            "k": self.k,
        }


def build_profile(N: int = 200, m_max: int = 100, c_E=4, k_start: int = 8, k_limit: int = 16) -> Profile:
    """Certify ``D = N^2 hhat(P1)`` and check the margins for decoding up to ``m_max``."""
    if N < 1 or m_max < 1:
        raise ValueError("N and m_max must be positive")
    report = slack_analysis(c_E)
    if not report.feasible:
        bad = [n for n, _, _, ok in report.completeness if not ok]
        raise ProfileRejected(f"c_E={c_E} breaks the completeness margins of {bad}")
    for k in range(k_start, k_limit + 1):
        D = _hhat_P1(k).scale(N * N)
        if D.hi <= report.D_min:
            raise ProfileRejected(f"D <= {float(D.hi):.4g} is not above D_min = {report.D_min}")
        if D.lo <= report.D_min:
            continue
        if D.width * m_max < (D.lo - 2 * report.B_dec) / 4:
            return Profile(N, report.c_E, D, m_max, report.B_dec, k)
    raise PrecisionError(f"could not certify D tightly enough for m_max={m_max} with k <= {k_limit}")


# ---------------------------------------------------------------- [N] chains on the curve


def _on_curve(x: Term, y: Term) -> Formula:
    return AtomEq(Mul(y, y), Add(Mul(Mul(x, x), x), numeral(2)))


def _chain_plan(N: int) -> List[str]:
    return [op for bit in bin(N)[3:] for op in (("dbl", "add") if bit == "1" else ("dbl",))]


def _double_eqs(x: Term, y: Term, lam: Term, x2: Term, y2: Term) -> List[Formula]:
    three_x2 = Add(Add(Mul(x, x), Mul(x, x)), Mul(x, x))
    return [
        AtomEq(Mul(Add(y, y), lam), three_x2),
        AtomEq(Add(x2, Add(x, x)), Mul(lam, lam)),
        AtomEq(Add(Add(y2, y), Mul(lam, x2)), Mul(lam, x)),
    ]


def _add_eqs(x1, y1, x2, y2, lam, t, x3, y3) -> List[Formula]:
    """P3 = P1 + P2 for points with distinct x (t witnesses x2 - x1 != 0)."""
    return [
        AtomEq(Mul(t, x2), Add(ONE, Mul(t, x1))),
        AtomEq(Add(Mul(lam, x2), y1), Add(y2, Mul(lam, x1))),
        AtomEq(Add(Add(x3, x1), x2), Mul(lam, lam)),
        AtomEq(Add(Add(y3, y1), Mul(lam, x3)), Mul(lam, x1)),
    ]


def formula_chain(N: int, ux: Term, uy: Term, p: str) -> Tuple[List[str], List[Formula], Tuple[Term, Term]]:
    """Equations saying the last point is [N](ux, uy), unrolled as double-and-add."""
    names: List[str] = []
    eqs: List[Formula] = []
    cx, cy = ux, uy
    for i, op in enumerate(_chain_plan(N)):
        lam, nx, ny = f"{p}c{i}.l", f"{p}c{i}.x", f"{p}c{i}.y"
        if op == "dbl":
            names += [lam, nx, ny]
            eqs += _double_eqs(cx, cy, Var(lam), Var(nx), Var(ny))
        else:
            t = f"{p}c{i}.t"
            names += [lam, t, nx, ny]
            eqs += _add_eqs(cx, cy, ux, uy, Var(lam), Var(t), Var(nx), Var(ny))
        cx, cy = Var(nx), Var(ny)
    return names, eqs, (cx, cy)


def witness_chain(N: int, U: Point, p: str) -> Tuple[Assignment, Point]:
    w: Assignment = {}
    C = U
    for i, op in enumerate(_chain_plan(N)):
        if op == "dbl":
            assert C.y != 0
            lam = 3 * C.x * C.x / (2 * C.y)
            x3 = lam * lam - 2 * C.x
            y3 = lam * (C.x - x3) - C.y
        else:
            # torsion-free group: [j]U = +-U only for j = +-1, never reached here
            assert C.x != U.x, "degenerate addition step"
            lam = (U.y - C.y) / (U.x - C.x)
            x3 = lam * lam - C.x - U.x
            y3 = lam * (C.x - x3) - C.y
            w[f"{p}c{i}.t"] = 1 / (U.x - C.x)
        w[f"{p}c{i}.l"] = lam
        w[f"{p}c{i}.x"] = x3
        w[f"{p}c{i}.y"] = y3
        C = Point(x3, y3)
    return w, C


# ---------------------------------------------------------------- X and X_n


def formula_X(g: Term, N: int, p: str = "") -> Formula:
    """g = 0, or g is the x-coordinate of [N](u, v) for a rational point (u, v)."""
    u, v = p + "u", p + "v"
    names, eqs, (fx, _) = formula_chain(N, Var(u), Var(v), p)
    body = conj([_on_curve(Var(u), Var(v))] + eqs + [AtomEq(g, fx)])
    return Or(AtomEq(g, ZERO), Exists((u, v) + tuple(names), body))


def witness_X(N: int, U: Optional[Point], p: str = "") -> Tuple[Assignment, object]:
    """Witness for X at pi([N]U), or for g = 0 when U is None; returns (assignment, g)."""
    if U is None or U.is_infinity:
        return {}, mpq(0)
    if not curve.on_curve(U):
        raise GadgetError("U is not on the curve")
    w, Q = witness_chain(N, U, p)
    w[p + "u"], w[p + "v"] = U.x, U.y
    return w, Q.x


def formula_X1(q: Term, N: int, p: str = "") -> Formula:
    g = p + "g"
    return Exists((g,), And(formula_X(Var(g), N, p + "x."), formula_E11(q, Var(g))))


def formula_Xn(n: int, q: Term, N: int, p: str = "") -> Formula:
    if not 1 <= n <= 4:
        raise ValueError("X_n is only used for 1 <= n <= 4")
    if n == 1:
        return formula_X1(q, N, p)
    u, v = p + "u", p + "v"
    body = conj([
        formula_Xn(n - 1, Var(u), N, p + "n."),
        formula_X1(Var(v), N, p + "o."),
        formula_S(Var(u), Var(v), q),
    ])
    return Exists((u, v), body)


def witness_X1(N: int, k: int, p: str = "") -> Tuple[Assignment, object]:
    """X_1 witness for the value H(pi(Q_k)) (or 1 when k = 0); returns (assignment, value)."""
    U = scalar_mul(k, generator()) if k else None
    w, g = witness_X(N, U, p + "x.")
    w[p + "g"] = g
    return w, mpq(mult_height(g))


def witness_Xn(N: int, ks: Sequence[int], p: str = "") -> Tuple[Assignment, object]:
    """X_n witness for the product of the heights r_j of pi(Q_{k_j}), n = len(ks)."""
    n = len(ks)
    if n == 1:
        return witness_X1(N, ks[0], p)
    w, u = witness_Xn(N, ks[:-1], p + "n.")
    w1, v = witness_X1(N, ks[-1], p + "o.")
    w.update(w1)
    w[p + "u"], w[p + "v"] = u, v
    return w, u * v


# ---------------------------------------------------------------- theta


@dataclass(frozen=True)
class X4Certificate:
    k: tuple
    u: tuple
    r: tuple
    q: object

    @property
    def m(self) -> int:
        return sum(x * x for x in self.k)

    def as_dict(self) -> dict:
        return {
            "k": list(self.k),
            "u": [format_rational(x) for x in self.u],
            "r": [int(x) for x in self.r],
            "q": format_rational(self.q),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "X4Certificate":
        return cls(
            tuple(int(x) for x in d["k"]),
            tuple(as_rational(x) for x in d["u"]),
            tuple(mpz(x) for x in d["r"]),
            as_rational(d["q"]),
        )


def encode(m: int, profile: Profile, k: Optional[Sequence[int]] = None) -> X4Certificate:
    """The element of X_4 built from a four-squares decomposition of ``m``."""
    m = int(m)
    if m < 0 or m > profile.m_max:
        raise RangeError(f"{m} is outside 0..{profile.m_max}")
    ks = tuple(int(x) for x in (four_squares(m) if k is None else k))
    if len(ks) != 4 or sum(x * x for x in ks) != m:
        raise InterpError(f"{ks} is not a four-squares decomposition of {m}")
    us = tuple(pi(gamma_point(kj, profile.N)) if kj else mpq(0) for kj in ks)
    rs = tuple(mult_height(u) for u in us)
    q = mpq(rs[0] * rs[1] * rs[2] * rs[3])
    return X4Certificate(ks, us, rs, q)


def verify_certificate(cert: X4Certificate, profile: Profile) -> bool:
    """Exact consistency of a certificate with the profile's Gamma."""
    if len(cert.k) != 4:
        return False
    for kj, uj, rj in zip(cert.k, cert.u, cert.r):
        expect = pi(gamma_point(kj, profile.N)) if kj else mpq(0)
        if uj != expect or rj != mult_height(uj):
            return False
    return cert.q == cert.r[0] * cert.r[1] * cert.r[2] * cert.r[3]


def height_error(q, m: int, profile: Profile) -> CertifiedReal:
    """Enclosure of h(q) - m D."""
    return log_height(mult_height(as_rational(q)), mpq(1, 2**40)) - profile.D.scale(m)


def decode(q, profile: Profile) -> int:
    """theta(q) for q in X_4: the unique m >= 0 with |h(q) - m D| <= window."""
    h = log_height(mult_height(as_rational(q)), mpq(1, 2**40))
    T = profile.window
    guess = int((h.mid / profile.D.mid).__round__()) if h.mid else 0
    found = None
    for m in (guess - 1, guess, guess + 1):
        if m < 0:
            continue
        err = h - profile.D.scale(m)
        if -T <= err.lo and err.hi <= T:
            if found is not None:
                raise PrecisionError("two candidates for theta; D is not certified tightly enough")
            found = m
        elif err.hi >= -T and err.lo <= T:
            raise PrecisionError(f"cannot decide whether |h(q) - {m}D| <= {T}")
    if found is None:
        raise NotInX4(f"h(q) = {h} is not within {T} of a multiple of D")
    return found


# ---------------------------------------------------------------- relation gadgets


def formula_X4(q: Term, profile: Profile, p: str) -> Formula:
    return formula_Xn(4, q, profile.N, p)


def witness_X4(cert: X4Certificate, profile: Profile, p: str) -> Assignment:
    w, value = witness_Xn(profile.N, cert.k, p)
    assert value == cert.q
    return w


@lru_cache(maxsize=16)
def _q1(profile: Profile):
    return encode(1, profile).q


def _with_membership(body: Formula, names: Sequence[str], profile: Profile, p: str) -> Formula:
    parts = [formula_X4(Var(n), profile, f"{p}m{i}.") for i, n in enumerate(names)]
    return conj(parts + [body])


def _membership_witness(certs: Sequence[X4Certificate], profile: Profile, p: str) -> Assignment:
    w: Assignment = {}
    for i, c in enumerate(certs):
        w.update(witness_X4(c, profile, f"{p}m{i}."))
    return w


def formula_zero(x: Term, profile: Profile, p: str = "") -> Formula:
    return formula_EM(M_ZERO, ZERO, x, p)


def formula_one(x: Term, profile: Profile, p: str = "") -> Formula:
    return formula_EM(M_ONE, numeral(int(_q1(profile))), x, p)


def formula_eq(x: Term, y: Term, profile: Profile, p: str = "") -> Formula:
    return formula_EM(M_EQ, x, y, p)


def formula_add(x: Term, y: Term, z: Term, profile: Profile, p: str = "") -> Formula:
    w = p + "w"
    return Exists((w,), And(formula_EM(M_ADD, Var(w), z, p + "e."), formula_S(x, y, Var(w))))


def witness_zero(x, profile: Profile, p: str = "", strict: bool = True) -> Assignment:
    return witness_EM(M_ZERO, 0, x, p, strict=strict)


def witness_one(x, profile: Profile, p: str = "", strict: bool = True) -> Assignment:
    return witness_EM(M_ONE, _q1(profile), x, p, strict=strict)


def witness_eq(x, y, profile: Profile, p: str = "", strict: bool = True) -> Assignment:
    return witness_EM(M_EQ, x, y, p, strict=strict)


def witness_add(x, y, z, profile: Profile, p: str = "", strict: bool = True) -> Assignment:
    wv = mpq(mult_height(as_rational(x)) * mult_height(as_rational(y)))
    out = {p + "w": wv}
    out.update(witness_EM(M_ADD, wv, z, p + "e.", strict=strict))
    return out


# B: consecutive squares, through consecutive multiples of Q_1.


def _formula_C(g: Term, d: Term, o1x: Term, o1y: Term, N: int, p: str) -> Formula:
    """(g, d) = (pi(Q), pi(Q + Q_1)) for an affine Q in Gamma with Q + Q_1 affine."""
    u, v, qx, qy, rx, ry = (p + s for s in ("u", "v", "qx", "qy", "rx", "ry"))
    names, eqs, (fx, fy) = formula_chain(N, Var(u), Var(v), p)
    lam, t, lam2 = p + "l", p + "t", p + "l2"
    Qx, Qy, Rx, Ry = Var(qx), Var(qy), Var(rx), Var(ry)
    generic = Exists((lam, t), conj(_add_eqs(Qx, Qy, o1x, o1y, Var(lam), Var(t), Rx, Ry)))
    doubling = Exists((lam2,), conj([AtomEq(Qx, o1x), AtomEq(Qy, o1y)] + _double_eqs(Qx, Qy, Var(lam2), Rx, Ry)))
    body = conj(
        [_on_curve(Var(u), Var(v))]
        + eqs
        + [AtomEq(Qx, fx), AtomEq(Qy, fy), AtomEq(g, Qx), AtomEq(d, Rx), Or(generic, doubling)]
    )
    return Exists((u, v, qx, qy, rx, ry) + tuple(names), body)


def formula_B(x: Term, y: Term, profile: Profile, p: str = "") -> Formula:
    """theta(x) = k^2 and theta(y) = (k+1)^2 for some k >= 0 (given x, y in X_4)."""
    N = profile.N
    g, d, m1 = p + "g", p + "d", p + "m1"
    names, eqs, (o1x, o1y) = formula_chain(N, Var(m1), ONE, p + "q1.")
    G, Dv = Var(g), Var(d)
    g2, d2 = p + "g2", p + "d2"
    from_C = Exists((g2, d2), conj([
        _formula_C(Var(g2), Var(d2), o1x, o1y, N, p + "c."),
        formula_E11(G, Var(g2)),
        formula_E11(Dv, Var(d2)),
    ]))
    k0 = And(formula_E11(G, ZERO), formula_E11(Dv, o1x))
    km1 = And(formula_E11(G, o1x), formula_E11(Dv, ZERO))
    body = conj(
        [AtomEq(Add(Var(m1), ONE), ZERO)]
        + eqs
        + [
            Or(from_C, Or(k0, km1)),
            formula_L(G, Dv, p + "l."),
            formula_EM(M_B, x, G, p + "ex."),
            formula_EM(M_B, y, Dv, p + "ey."),
        ]
    )
    return Exists((g, d, m1) + tuple(names), body)


def witness_B(x, y, k: int, profile: Profile, p: str = "", strict: bool = True) -> Assignment:
    """Witness for B(x, y) where theta(x) = k^2 and theta(y) = (k+1)^2."""
    if k < 0:
        raise GadgetError("k must be nonnegative")
    N = profile.N
    P1 = generator()
    w, Q1 = witness_chain(N, P1, p + "q1.")
    w[p + "m1"] = mpq(-1)
    if k == 0:
        gv, dv = mpq(0), Q1.x
    else:
        pc = p + "c."
        U = scalar_mul(k, P1)
        wc, Q = witness_chain(N, U, pc)
        w.update(wc)
        R = curve.add(Q, Q1)
        w.update({pc + "u": U.x, pc + "v": U.y, pc + "qx": Q.x, pc + "qy": Q.y, pc + "rx": R.x, pc + "ry": R.y})
        if k == 1:
            w[pc + "l2"] = 3 * Q.x * Q.x / (2 * Q.y)
        else:
            w[pc + "l"] = (Q1.y - Q.y) / (Q1.x - Q.x)
            w[pc + "t"] = 1 / (Q1.x - Q.x)
        gv, dv = Q.x, R.x
        w[p + "g2"], w[p + "d2"] = gv, dv
    w[p + "g"], w[p + "d"] = gv, dv
    w.update(witness_L(gv, dv, p + "l.", strict=strict))
    w.update(witness_EM(M_B, x, gv, p + "ex.", strict=strict))
    w.update(witness_EM(M_B, y, dv, p + "ey.", strict=strict))
    return w


# ---------------------------------------------------------------- gadget instances


def _instance(name, formula, interface, guarantee, builder):
    return GadgetInstance(name, formula, tuple(interface), guarantee, builder)


def gadget_X(profile: Profile) -> GadgetInstance:
    def build(g, U=None, strict=True):
        w, gv = witness_X(profile.N, U)
        if gv != as_rational(g):
            raise GadgetError("U does not produce the requested x-coordinate")
        return w
    return _instance("X", formula_X(Var("g"), profile.N), ("g",), None, build)


def gadget_Xn(n: int, profile: Profile) -> GadgetInstance:
    def build(q, ks=None, strict=True):
        if ks is None or len(ks) != n:
            raise GadgetError(f"X_{n} witnesses need {n} multipliers k_j")
        w, value = witness_Xn(profile.N, ks)
        if value != as_rational(q):
            raise GadgetError("multipliers do not produce the requested value")
        return w
    return _instance(f"X_{n}", formula_Xn(n, Var("q"), profile.N), ("q",), None, build)


def _certs(values, profile):
    out = []
    for v in values:
        if isinstance(v, X4Certificate):
            out.append(v)
        else:
            raise GadgetError("membership witnesses need X4 certificates; pass encode(m, profile)")
    return out


def _relation(name, names, profile, with_membership, body, builder, guarantee=None):
    formula = _with_membership(body, names, profile, "") if with_membership else body

    def build(*values, strict=True, **kw):
        vals = [v.q if isinstance(v, X4Certificate) else as_rational(v) for v in values]
        w = builder(*vals, strict=strict, **kw)
        if with_membership:
            w.update(_membership_witness(_certs(values, profile), profile, ""))
        return w

    return _instance(name, formula, names, guarantee, build)


def gadget_zero(profile: Profile, with_membership: bool = True) -> GadgetInstance:
    return _relation("zero", ("x",), profile, with_membership, formula_zero(Var("x"), profile),
                     lambda x, strict=True: witness_zero(x, profile, strict=strict))


def gadget_one(profile: Profile, with_membership: bool = True) -> GadgetInstance:
    return _relation("one", ("x",), profile, with_membership, formula_one(Var("x"), profile),
                     lambda x, strict=True: witness_one(x, profile, strict=strict))


def gadget_eq(profile: Profile, with_membership: bool = True) -> GadgetInstance:
    return _relation("eq", ("x", "y"), profile, with_membership, formula_eq(Var("x"), Var("y"), profile),
                     lambda x, y, strict=True: witness_eq(x, y, profile, strict=strict))


def gadget_add(profile: Profile, with_membership: bool = True) -> GadgetInstance:
    return _relation("add", ("x", "y", "z"), profile, with_membership,
                     formula_add(Var("x"), Var("y"), Var("z"), profile),
                     lambda x, y, z, strict=True: witness_add(x, y, z, profile, strict=strict))


def gadget_B(profile: Profile, with_membership: bool = True) -> GadgetInstance:
    def build(x, y, strict=True, k=None):
        if k is None:
            raise GadgetError("B witnesses need k with theta(x) = k^2")
        return witness_B(x, y, k, profile, strict=strict)
    return _relation("B", ("x", "y"), profile, with_membership, formula_B(Var("x"), Var("y"), profile), build)
