"""Positive existential formulas over (Q; 0, 1, +, *, =, H_{m,n}).

Formulas are immutable trees.  The concrete syntax is S-expressions::

    formula := (exists (v ...) formula) | (and f f ...) | (or f f ...)
             | (= term term) | (H m n (term ...) (term ...)) | (B term term)
    term    := integer | identifier | (+ term term) | (* term term)

``B`` (consecutive squares) only occurs on the natural-number side; the
rational checker rejects it.  Integer literals are sugar: they are expanded
into compact sums and products of 0 and 1 at parse time.

Witnesses are flat: one assignment covers the free variables and every
existentially bound variable, so bound names must be distinct.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Sequence, Union

from gmpy2 import mpq

from .heights import Rational, as_rational, holds_H

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class FormulaError(ValueError):
    pass


class ParseError(FormulaError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class MissingVariable(FormulaError, KeyError):
    def __init__(self, name: str):
        FormulaError.__init__(self, f"witness does not assign variable {name!r}")
        self.name = name

    def __str__(self) -> str:
        return self.args[0]


# ---------------------------------------------------------------- terms


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Zero:
    pass


@dataclass(frozen=True, slots=True)
class One:
    pass


@dataclass(frozen=True, slots=True)
class Add:
    left: "Term"
    right: "Term"


@dataclass(frozen=True, slots=True)
class Mul:
    left: "Term"
    right: "Term"


Term = Union[Var, Zero, One, Add, Mul]

ZERO = Zero()
ONE = One()

# ---------------------------------------------------------------- formulas


@dataclass(frozen=True, slots=True)
class AtomEq:
    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class AtomH:
    m: int
    n: int
    xs: tuple
    ys: tuple

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or len(self.xs) != self.m or len(self.ys) != self.n:
            raise FormulaError(
                f"H atom arity mismatch: declared ({self.m},{self.n}), "
                f"got ({len(self.xs)},{len(self.ys)})"
            )


@dataclass(frozen=True, slots=True)
class AtomB:
    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Exists:
    vars: tuple
    body: "Formula"

    def __post_init__(self):
        if not self.vars:
            raise FormulaError("exists needs at least one variable")


Formula = Union[AtomEq, AtomH, AtomB, And, Or, Exists]


def H(xs: Sequence[Term], ys: Sequence[Term]) -> AtomH:
    return AtomH(len(xs), len(ys), tuple(xs), tuple(ys))


def H11(x: Term, y: Term) -> AtomH:
    return AtomH(1, 1, (x,), (y,))


def v(name: str) -> Var:
    return Var(name)


def conj(parts: Sequence[Formula]) -> Formula:
    """Balanced conjunction (keeps the tree shallow)."""
    parts = list(parts)
    if not parts:
        return AtomEq(ZERO, ZERO)
    while len(parts) > 1:
        nxt = [And(parts[i], parts[i + 1]) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def disj(parts: Sequence[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        raise FormulaError("empty disjunction")
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Or(p, out)
    return out


def exists(names: Iterable[str], body: Formula) -> Formula:
    names = tuple(names)
    return Exists(names, body) if names else body


# ---------------------------------------------------------------- literals


@lru_cache(maxsize=None)
def _pow2(h: int) -> Term:
    """2**h as a term, by repeated squaring."""
    if h == 0:
        return ONE
    if h == 1:
        return Add(ONE, ONE)
    half = _pow2(h // 2)
    sq = Mul(half, half)
    return Add(sq, sq) if h % 2 else sq


_TWO = Add(ONE, ONE)


def _horner(n: int, base_bits: int, base: Term, digit) -> Term:
    """Horner form over limbs of ``base_bits`` bits, most significant first."""
    mask = (1 << base_bits) - 1
    limbs = []
    while n:
        limbs.append(n & mask)
        n >>= base_bits
    out = digit(limbs[-1])
    for limb in reversed(limbs[:-1]):
        out = Mul(out, base)
        if limb:
            out = Add(out, digit(limb))
    return out


def _small_numeral(n: int) -> Term:
    if n < 4:
        return (ZERO, ONE, _TWO, Add(_TWO, ONE))[n]
    out = ONE
    for bit in bin(n)[3:]:
        out = Mul(_TWO, out)
        if bit == "1":
            out = Add(out, ONE)
    return out


def numeral(n: int) -> Term:
    """Expand a nonnegative integer into a term over 0, 1, +, *.

    Binary Horner form below 2^16, Horner over 16-bit limbs below 2^1024 and
    over 1024-bit limbs beyond; the printed size stays linear in the bit
    length while the nesting depth stays modest.
    """
    n = int(n)
    if n < 0:
        raise FormulaError("numerals must be nonnegative")
    if n < 1 << 16:
        return _small_numeral(n)
    if n < 1 << 1024:
        return _horner(n, 16, _pow2(16), _small_numeral)
    return _horner(n, 1024, _pow2(1024), lambda d: numeral(d) if d else ZERO)


# ---------------------------------------------------------------- variables


def term_vars(t: Term, out: set | None = None) -> set:
    out = set() if out is None else out
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Var):
            out.add(s.name)
        elif isinstance(s, (Add, Mul)):
            stack.append(s.left)
            stack.append(s.right)
    return out


def _atom_terms(f) -> tuple:
    if isinstance(f, AtomH):
        return f.xs + f.ys
    return (f.left, f.right)


def free_vars(f: Formula) -> set:
    if isinstance(f, (AtomEq, AtomB, AtomH)):
        out: set = set()
        for t in _atom_terms(f):
            term_vars(t, out)
        return out
    if isinstance(f, (And, Or)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, Exists):
        return free_vars(f.body) - set(f.vars)
    raise FormulaError(f"not a formula: {f!r}")


def bound_vars(f: Formula) -> list:
    """Every bound name, with repetitions, in left-to-right order."""
    out: list = []
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Exists):
            out.extend(g.vars)
            stack.append(g.body)
        elif isinstance(g, (And, Or)):
            stack.append(g.right)
            stack.append(g.left)
    return out


def complete_witness(f: Formula, w: Mapping[str, object]) -> dict:
    """``w`` plus 0 for every bound variable it leaves out (variables of disjuncts the witness does not use)."""
    out = dict(w)
    for name in bound_vars(f):
        out.setdefault(name, mpq(0))
    return out


def all_vars(f: Formula) -> set:
    return free_vars(f) | set(bound_vars(f))


def check_flat_names(f: Formula) -> None:
    """Flat witnesses need every bound name to be distinct and not free."""
    seen: set = set()
    for name in bound_vars(f):
        if name in seen:
            raise FormulaError(f"variable {name!r} is bound twice; flat witnesses need distinct names")
        seen.add(name)
    clash = seen & free_vars(f)
    if clash:
        raise FormulaError(f"variables both free and bound: {sorted(clash)}")


def size(f) -> int:
    """Node count (terms included)."""
    n = 0
    stack = [f]
    while stack:
        g = stack.pop()
        n += 1
        if isinstance(g, (Add, Mul, And, Or)):
            stack.append(g.left)
            stack.append(g.right)
        elif isinstance(g, Exists):
            stack.append(g.body)
        elif isinstance(g, (AtomEq, AtomB, AtomH)):
            stack.extend(_atom_terms(g))
    return n


# ---------------------------------------------------------------- evaluation


def eval_term(t: Term, env: Mapping[str, Rational], memo: dict | None = None) -> Rational:
    memo = {} if memo is None else memo
    return _eval(t, env, memo)


def _eval(t, env, memo):
    if isinstance(t, Var):
        try:
            return as_rational(env[t.name])
        except KeyError:
            raise MissingVariable(t.name) from None
    if isinstance(t, Zero):
        return mpq(0)
    if isinstance(t, One):
        return mpq(1)
    key = id(t)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    a = _eval(t.left, env, memo)
    b = _eval(t.right, env, memo)
    val = a + b if isinstance(t, Add) else a * b
    memo[key] = (t, val)  # keep t alive so its id is not reused
    return val


def check_witness(f: Formula, w: Mapping[str, object]) -> bool:
    """Evaluate ``f`` exactly under the flat witness ``w``.

    Each existential is read off ``w``; no search is performed.  A conjunction
    with a false conjunct is false and a disjunction with a true disjunct is
    true even if the other side mentions unassigned variables; otherwise a
    missing variable raises :class:`MissingVariable`.
    """
    check_flat_names(f)
    env = {k: as_rational(val) for k, val in w.items()}
    return _check(f, env, {})


def _check(f, env, memo) -> bool:
    if isinstance(f, AtomEq):
        return _eval(f.left, env, memo) == _eval(f.right, env, memo)
    if isinstance(f, AtomH):
        xs = [_eval(t, env, memo) for t in f.xs]
        ys = [_eval(t, env, memo) for t in f.ys]
        return holds_H(xs, ys)
    if isinstance(f, AtomB):
        raise FormulaError("B atoms are only meaningful over the naturals")
    if isinstance(f, Exists):
        return _check(f.body, env, memo)
    if isinstance(f, (And, Or)):
        decisive = isinstance(f, Or)
        missing = None
        for part in (f.left, f.right):
            try:
                if _check(part, env, memo) == decisive:
                    return decisive
            except MissingVariable as exc:
                missing = exc
        if missing is not None:
            raise missing
        return not decisive
    raise FormulaError(f"not a formula: {f!r}")


# ---------------------------------------------------------------- rendering


def render_term(t: Term) -> str:
    out: list = []
    _render_term(t, out)
    return "".join(out)


def _render_term(t, out):
    if isinstance(t, Var):
        out.append(t.name)
    elif isinstance(t, Zero):
        out.append("0")
    elif isinstance(t, One):
        out.append("1")
    else:
        out.append("(+ " if isinstance(t, Add) else "(* ")
        _render_term(t.left, out)
        out.append(" ")
        _render_term(t.right, out)
        out.append(")")


def render(f: Formula) -> str:
    out: list = []
    _render(f, out)
    return "".join(out)


def _render(f, out):
    if isinstance(f, (AtomEq, AtomB)):
        out.append("(= " if isinstance(f, AtomEq) else "(B ")
        _render_term(f.left, out)
        out.append(" ")
        _render_term(f.right, out)
        out.append(")")
    elif isinstance(f, AtomH):
        out.append(f"(H {f.m} {f.n} (")
        for i, t in enumerate(f.xs):
            if i:
                out.append(" ")
            _render_term(t, out)
        out.append(") (")
        for i, t in enumerate(f.ys):
            if i:
                out.append(" ")
            _render_term(t, out)
        out.append("))")
    elif isinstance(f, (And, Or)):
        out.append("(and " if isinstance(f, And) else "(or ")
        _render(f.left, out)
        out.append(" ")
        _render(f.right, out)
        out.append(")")
    elif isinstance(f, Exists):
        out.append("(exists (" + " ".join(f.vars) + ") ")
        _render(f.body, out)
        out.append(")")
    else:
        raise FormulaError(f"not a formula: {f!r}")


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\(|\)|[^\s()]+")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_.']*\Z")
_INT = re.compile(r"[0-9]+\Z")


class _Parser:
    """Single-pass recursive descent over the token list; positions are recovered only for errors."""

    def __init__(self, text: str):
        self.text = text
        self.toks = _TOKEN.findall(text)
        self.i = 0
        self.cache: dict = {}

    def error(self, message: str, i: Optional[int] = None) -> ParseError:
        i = self.i if i is None else i
        for n, m in enumerate(_TOKEN.finditer(self.text)):
            if n == i:
                return ParseError(message, m.start())
        return ParseError(message, len(self.text))

    def peek(self) -> str:
        if self.i >= len(self.toks):
            raise self.error("unexpected end of input")
        return self.toks[self.i]

    def expect(self, tok: str) -> None:
        if self.peek() != tok:
            raise self.error(f"expected {tok!r}")
        self.i += 1

    def open_(self) -> int:
        """Consume '(' and return its token index (for error positions)."""
        i = self.i
        if self.peek() != "(":
            raise self.error("expected '('")
        self.i += 1
        return i

    def atom(self) -> str:
        tok = self.peek()
        if tok in ("(", ")"):
            raise self.error("expected a token")
        self.i += 1
        return tok

    def term(self) -> Term:
        # iterative: numerals nest thousands of levels deep
        toks, cache = self.toks, self.cache
        i = self.i
        stack: list = []  # [op, start index, first argument or None]
        try:
            while True:
                tok = toks[i]
                if tok == "(":
                    op = toks[i + 1]
                    if op != "+" and op != "*":
                        raise self.error("expected (+ t t) or (* t t)", i)
                    stack.append([op, i, None])
                    i += 2
                    continue
                if tok == ")":
                    raise self.error("expected a term", i)
                val = cache.get(tok)
                if val is None:
                    if _INT.match(tok):
                        val = numeral(int(tok))
                    elif _IDENT.match(tok):
                        val = Var(tok)
                    else:
                        raise self.error(f"bad term token {tok!r}", i)
                    cache[tok] = val
                i += 1
                while stack:
                    frame = stack[-1]
                    if frame[2] is None:
                        frame[2] = val
                        break
                    if toks[i] != ")":
                        raise self.error(f"'{frame[0]}' takes two arguments", frame[1])
                    i += 1
                    stack.pop()
                    val = Add(frame[2], val) if frame[0] == "+" else Mul(frame[2], val)
                else:
                    self.i = i
                    return val
        except IndexError:
            raise self.error("unexpected end of input", len(toks)) from None

    def terms(self) -> tuple:
        self.open_()
        out = []
        while self.peek() != ")":
            out.append(self.term())
        self.i += 1
        return tuple(out)

    def formula(self) -> Formula:
        if self.i < len(self.toks) and self.toks[self.i] != "(":
            raise self.error("expected a formula")
        start = self.open_()
        head = self.peek()
        if head == "(" or head == ")":
            raise self.error("expected a formula", start)
        self.i += 1
        if head in ("=", "B"):
            a = self.term()
            if self.peek() == ")":
                raise self.error(f"'{head}' takes two terms", start)
            b = self.term()
            if self.peek() != ")":
                raise self.error(f"'{head}' takes two terms", start)
            self.i += 1
            return AtomEq(a, b) if head == "=" else AtomB(a, b)
        if head == "H":
            try:
                m, n = int(self.atom()), int(self.atom())
            except ValueError:
                raise self.error("H arities must be integers", start) from None
            xs, ys = self.terms(), self.terms()
            self.expect(")")
            if len(xs) != m or len(ys) != n:
                raise self.error(f"H arity mismatch: declared ({m},{n}), got ({len(xs)},{len(ys)})", start)
            return AtomH(m, n, xs, ys)
        if head in ("and", "or"):
            parts = []
            while self.peek() != ")":
                parts.append(self.formula())
            self.i += 1
            if len(parts) < 2:
                raise self.error(f"'{head}' needs at least two formulas", start)
            cls = And if head == "and" else Or
            out = parts[-1]
            for p in reversed(parts[:-1]):
                out = cls(p, out)
            return out
        if head == "exists":
            self.open_()
            names = []
            while self.peek() != ")":
                tok = self.atom()
                if not _IDENT.match(tok):
                    raise self.error("bad bound variable", self.i - 1)
                names.append(tok)
            self.i += 1
            if not names:
                raise self.error("exists needs at least one variable", start)
            body = self.formula()
            self.expect(")")
            return Exists(tuple(names), body)
        raise self.error(f"unknown connective {head!r}", start)

    def finish(self, result):
        if self.i != len(self.toks):
            raise self.error("expected exactly one expression")
        return result


def parse(text: str) -> Formula:
    p = _Parser(text)
    return p.finish(p.formula())


def parse_term(text: str) -> Term:
    p = _Parser(text)
    return p.finish(p.term())


# ---------------------------------------------------------------- demo sentence


def _power(t: Term, e: int) -> Term:
    if e == 1:
        return t
    half = _power(t, e // 2)
    sq = Mul(half, half)
    return Mul(sq, t) if e % 2 else sq


def example_PM(M: int) -> Formula:
    """Sentence: some a with a^3 != a has a point on x2^2 = x1^5 + a of height >= h(a^M).

    ``a^3 != a`` is written positively as ``exists t, t*a^3 = 1 + t*a``.
    """
    if M < 1:
        raise FormulaError("M must be at least 1")
    a, x1, x2, t = Var("a"), Var("x1"), Var("x2"), Var("t")
    neq = Exists(("t",), AtomEq(Mul(t, _power(a, 3)), Add(ONE, Mul(t, a))))
    curve = AtomEq(Mul(x2, x2), Add(_power(x1, 5), a))
    big = AtomH(1, 2, (_power(a, M),), (x1, x2))
    return Exists(("a", "x1", "x2"), And(neq, And(curve, big)))
