"""Compiling positive existential sentences over (N; 0, 1, +, *, =) into the rationals.

Pipeline:

1. constant subterms are folded into +-only numerals;
2. every product is replaced by its definition from the consecutive-squares
   relation B (``eliminate_mul``);
3. atoms are flattened into the primitives ``x = 0``, ``x = 1``, ``x = y``,
   ``x + y = z`` and ``B(x, y)`` over fresh variables;
4. each natural-number variable ``x`` becomes a rational variable ``v.x``
   restricted to X_4, and each primitive becomes the matching gadget.

Truth never enters the compiler.  It enters through witnesses: a natural
number assignment is lifted to a rational witness (``witness_up``) and a
checked rational witness is decoded back (``witness_down``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from gmpy2 import isqrt, mpq

from .formula import (
    ONE,
    ZERO,
    Add,
    And,
    AtomB,
    AtomEq,
    AtomH,
    Exists,
    Formula,
    FormulaError,
    MissingVariable,
    Mul,
    One,
    Or,
    Term,
    Var,
    Zero,
    bound_vars,
    check_flat_names,
    check_witness,
    complete_witness,
    conj,
    free_vars,
    term_vars,
)
from .interp import (
    Profile,
    RangeError,
    X4Certificate,
    decode,
    encode,
    formula_add,
    formula_B,
    formula_eq,
    formula_one,
    formula_X4,
    formula_zero,
    witness_add,
    witness_B,
    witness_eq,
    witness_one,
    witness_X4,
    witness_zero,
)


class CompileError(FormulaError):
    pass


class Refusal(ValueError):
    """The natural-number assignment does not satisfy the formula."""


# ---------------------------------------------------------------- natural-number semantics


def is_consecutive_squares(a: int, b: int) -> bool:
    """B(a, b): a = k^2 and b = (k+1)^2 for some k >= 0."""
    if a < 0 or b < 0:
        return False
    k = int(isqrt(a))
    return k * k == a and b == (k + 1) ** 2


def nat_term(t: Term, A: Mapping[str, int], memo: Optional[dict] = None) -> int:
    memo = {} if memo is None else memo
    if isinstance(t, Var):
        try:
            return A[t.name]
        except KeyError:
            raise MissingVariable(t.name) from None
    if isinstance(t, Zero):
        return 0
    if isinstance(t, One):
        return 1
    hit = memo.get(id(t))
    if hit is not None:
        return hit[1]
    a, b = nat_term(t.left, A, memo), nat_term(t.right, A, memo)
    val = a + b if isinstance(t, Add) else a * b
    memo[id(t)] = (t, val)
    return val


def nat_holds(f: Formula, A: Mapping[str, int]) -> bool:
    """Truth over N when ``A`` assigns the relevant variables (flat, like check_witness)."""
    if isinstance(f, AtomEq):
        return nat_term(f.left, A) == nat_term(f.right, A)
    if isinstance(f, AtomB):
        return is_consecutive_squares(nat_term(f.left, A), nat_term(f.right, A))
    if isinstance(f, AtomH):
        raise FormulaError("height atoms do not belong to natural-number formulas")
    if isinstance(f, Exists):
        return nat_holds(f.body, A)
    decisive = isinstance(f, Or)
    missing = None
    for part in (f.left, f.right):
        try:
            if nat_holds(part, A) == decisive:
                return decisive
        except MissingVariable as exc:
            missing = exc
    if missing is not None:
        raise missing
    return not decisive


# ---------------------------------------------------------------- rewriting helpers


def nat_numeral(n: int) -> Term:
    """n as a term over 0, 1, + only (doubling, shared subterms)."""
    if n < 2:
        return ONE if n else ZERO
    half = nat_numeral(n // 2)
    t = Add(half, half)
    return Add(t, ONE) if n % 2 else t


def _has_mul(t: Term) -> bool:
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Mul):
            return True
        if isinstance(s, Add):
            stack += [s.left, s.right]
    return False


def _fold_term(t: Term) -> Term:
    if isinstance(t, (Add, Mul)):
        if not term_vars(t):
            return nat_numeral(nat_term(t, {}))
        l, r = _fold_term(t.left), _fold_term(t.right)
        if l is t.left and r is t.right:
            return t
        return type(t)(l, r)
    return t


def map_atoms(f: Formula, fn) -> Formula:
    if isinstance(f, (AtomEq, AtomB, AtomH)):
        return fn(f)
    if isinstance(f, (And, Or)):
        l, r = map_atoms(f.left, fn), map_atoms(f.right, fn)
        return f if (l is f.left and r is f.right) else type(f)(l, r)
    if isinstance(f, Exists):
        b = map_atoms(f.body, fn)
        return f if b is f.body else Exists(f.vars, b)
    raise FormulaError(f"not a formula: {f!r}")


def fold_constants(f: Formula) -> Formula:
    """Replace variable-free products and sums by +-only numerals."""
    def atom(a):
        if isinstance(a, AtomH):
            raise FormulaError("height atoms do not belong to natural-number formulas")
        l, r = _fold_term(a.left), _fold_term(a.right)
        return a if (l is a.left and r is a.right) else type(a)(l, r)
    return map_atoms(f, atom)


def _contains_mul(f: Formula) -> bool:
    found = []

    def atom(a):
        if any(_has_mul(t) for t in (a.left, a.right)):
            found.append(a)
        return a
    map_atoms(f, atom)
    return bool(found)


# ---------------------------------------------------------------- multiplication from B


def formula_sigma(x: Term, u: Term, z: str) -> Formula:
    """u = x^2, defined as: exists z, B(u, z) and z = u + 2x + 1."""
    return Exists((z,), And(AtomB(u, Var(z)), AtomEq(Var(z), Add(Add(Add(u, x), x), ONE))))


def formula_mul(x: Term, y: Term, p: Term, tag: str) -> Formula:
    """x * y = p, via (x+y)^2 = x^2 + 2p + y^2."""
    u, v, w = tag + "u", tag + "v", tag + "w"
    U, V, W = Var(u), Var(v), Var(w)
    body = conj([
        formula_sigma(x, U, tag + "z1"),
        formula_sigma(y, V, tag + "z2"),
        formula_sigma(Add(x, y), W, tag + "z3"),
        AtomEq(W, Add(Add(U, Add(p, p)), V)),
    ])
    return Exists((u, v, w), body)


def _innermost_mul(t: Term) -> Optional[Mul]:
    if isinstance(t, Mul):
        return _innermost_mul(t.left) or _innermost_mul(t.right) or t
    if isinstance(t, Add):
        return _innermost_mul(t.left) or _innermost_mul(t.right)
    return None


def _replace(t: Term, old: Term, new: Term) -> Term:
    if t is old:
        return new
    if isinstance(t, (Add, Mul)):
        l, r = _replace(t.left, old, new), _replace(t.right, old, new)
        return t if (l is t.left and r is t.right) else type(t)(l, r)
    return t


def eliminate_mul(f: Formula) -> Formula:
    """Equivalent formula over (0, 1, +, B, =); inputs without products come back unchanged."""
    if not _contains_mul(f):
        return f
    f = fold_constants(f)
    counter = [0]

    def atom(a):
        defs = []
        names = []
        while True:
            m = _innermost_mul(a.left) or _innermost_mul(a.right)
            if m is None:
                break
            tag = f"_m{counter[0]}"
            counter[0] += 1
            p = Var(tag + "p")
            a = type(a)(_replace(a.left, m, p), _replace(a.right, m, p))
            defs.append(formula_mul(m.left, m.right, p, tag))
            names.append(p.name)
        if not defs:
            return a
        return Exists(tuple(names), conj(defs + [a]))
    return map_atoms(f, atom)


# ---------------------------------------------------------------- flattening


def flatten(f: Formula) -> Formula:
    """Rewrite atoms into the primitives x=0, x=1, x=y, x+y=z, B(x,y) over fresh variables."""
    counter = [0]

    def fresh():
        name = f"_f{counter[0]}"
        counter[0] += 1
        return name

    def atom(a):
        prims: List[Formula] = []
        names: List[str] = []
        memo: Dict[int, str] = {}

        def node(t) -> str:
            if isinstance(t, Var):
                return t.name
            hit = memo.get(id(t))
            if hit is not None:
                return hit
            n = fresh()
            names.append(n)
            if isinstance(t, Zero):
                prims.append(AtomEq(Var(n), ZERO))
            elif isinstance(t, One):
                prims.append(AtomEq(Var(n), ONE))
            elif isinstance(t, Add):
                prims.append(AtomEq(Add(Var(node(t.left)), Var(node(t.right))), Var(n)))
            else:
                raise CompileError("products must be eliminated before flattening")
            memo[id(t)] = n
            return n

        if isinstance(a, AtomB):
            prims.append(AtomB(Var(node(a.left)), Var(node(a.right))))
        else:
            s, t = a.left, a.right
            if isinstance(s, (Zero, One)) and not isinstance(t, (Zero, One)):
                s, t = t, s
            if isinstance(t, (Zero, One)):
                if isinstance(s, (Zero, One)):
                    # constant equation: compare through fresh variables
                    prims.append(AtomEq(Var(node(s)), t))
                else:
                    prims.append(AtomEq(Var(node(s)), t))
            elif isinstance(s, Add) or isinstance(t, Add):
                if not isinstance(s, Add):
                    s, t = t, s
                a_, b_ = node(s.left), node(s.right)
                prims.append(AtomEq(Add(Var(a_), Var(b_)), Var(node(t))))
            else:
                prims.append(AtomEq(Var(node(s)), Var(node(t))))
        body = conj(prims)
        return Exists(tuple(names), body) if names else body

    return map_atoms(f, atom)


def primitive_kind(a: Formula) -> Tuple[str, Tuple[str, ...]]:
    if isinstance(a, AtomB):
        return "B", (a.left.name, a.right.name)
    if isinstance(a.right, Zero):
        return "zero", (a.left.name,)
    if isinstance(a.right, One):
        return "one", (a.left.name,)
    if isinstance(a.left, Add):
        return "add", (a.left.left.name, a.left.right.name, a.right.name)
    return "eq", (a.left.name, a.right.name)


# ---------------------------------------------------------------- natural-number solver


def _prenex(f: Formula) -> Tuple[List[str], Formula]:
    names: List[str] = []

    def strip(g):
        if isinstance(g, Exists):
            names.extend(g.vars)
            return strip(g.body)
        if isinstance(g, (And, Or)):
            return type(g)(strip(g.left), strip(g.right))
        return g
    return names, strip(f)


def _dnf(f: Formula) -> List[List[Formula]]:
    if isinstance(f, Or):
        return _dnf(f.left) + _dnf(f.right)
    if isinstance(f, And):
        return [a + b for a in _dnf(f.left) for b in _dnf(f.right)]
    return [[f]]


def _degree(t: Term, u: str) -> int:
    if isinstance(t, Var):
        return 1 if t.name == u else 0
    if isinstance(t, Add):
        return max(_degree(t.left, u), _degree(t.right, u))
    if isinstance(t, Mul):
        return _degree(t.left, u) + _degree(t.right, u)
    return 0


def _diff(a: Formula, A: Mapping[str, int]) -> int:
    return nat_term(a.left, A) - nat_term(a.right, A)


def _linear_in(a: Formula, names: Sequence[str]) -> bool:
    return all(_degree(a.left, u) <= 1 and _degree(a.right, u) <= 1 for u in names)


def _atom_vars(a: Formula) -> set:
    return term_vars(a.left) | term_vars(a.right)


def _propagate(atoms: Sequence[Formula], A: Dict[str, int]) -> Optional[Dict[str, int]]:
    changed = True
    while changed:
        changed = False
        for a in atoms:
            unknown = [v for v in _atom_vars(a) if v not in A]
            if not unknown:
                if not nat_holds(a, A):
                    return None
                continue
            if isinstance(a, AtomEq):
                if len(unknown) == 1 and _linear_in(a, unknown):
                    u = unknown[0]
                    f0 = _diff(a, {**A, u: 0})
                    slope = _diff(a, {**A, u: 1}) - f0
                    if slope == 0:
                        if f0 != 0:
                            return None
                        continue
                    if f0 % slope or -f0 // slope < 0:
                        return None
                    A[u] = -f0 // slope
                    changed = True
                continue
            # B(s, t)
            s_unknown = term_vars(a.left) - A.keys()
            t_unknown = term_vars(a.right) - A.keys()
            if not s_unknown and isinstance(a.right, Var):
                s = nat_term(a.left, A)
                k = int(isqrt(s)) if s >= 0 else -1
                if k < 0 or k * k != s:
                    return None
                A[a.right.name] = (k + 1) ** 2
                changed = True
            elif not t_unknown and isinstance(a.left, Var):
                t = nat_term(a.right, A)
                j = int(isqrt(t)) if t >= 0 else 0
                if j < 1 or j * j != t:
                    return None
                A[a.left.name] = (j - 1) ** 2
                changed = True
            elif isinstance(a.left, Var) and isinstance(a.right, Var) and not (s_unknown - {a.left.name}) \
                    and not (t_unknown - {a.right.name}):
                k = _pair_rule(a.left.name, a.right.name, atoms, A)
                if k is False:
                    return None
                if k is not None:
                    A[a.left.name], A[a.right.name] = k * k, (k + 1) ** 2
                    changed = True
    return A


def _pair_rule(x: str, y: str, atoms, A):
    """k from an equation fixing y - x when B(x, y) has both sides unknown."""
    for e in atoms:
        if not isinstance(e, AtomEq):
            continue
        unknown = {v for v in _atom_vars(e) if v not in A}
        if unknown != {x, y} or not _linear_in(e, (x, y)):
            continue
        g00 = _diff(e, {**A, x: 0, y: 0})
        cx = _diff(e, {**A, x: 1, y: 0}) - g00
        cy = _diff(e, {**A, x: 0, y: 1}) - g00
        cxy = _diff(e, {**A, x: 1, y: 1}) - g00 - cx - cy
        if cxy != 0 or cy == 0 or cx != -cy:
            continue
        # g00 + cy (y - x) = 0
        if g00 % cy:
            return False
        d = -g00 // cy
        if d < 1 or d % 2 == 0:
            return False
        return (d - 1) // 2
    return None


def is_auxiliary(name: str) -> bool:
    """Variables introduced by rewriting (``_m``, ``_f``) start with an underscore."""
    return name.startswith("_")


def _solve_clause(atoms, order, A, bound, limited=frozenset()) -> Optional[Dict[str, int]]:
    A = _propagate(atoms, dict(A))
    if A is None:
        return None
    if any(A[k] > bound for k in limited if k in A):
        return None
    for v in order:
        if v not in A:
            for val in range(bound + 1):
                r = _solve_clause(atoms, order, {**A, v: val}, bound, limited)
                if r is not None:
                    return r
            return None
    return A


def uniquify(f: Formula) -> Formula:
    """Rename bound variables so that every binder introduces a fresh name."""
    used = set(free_vars(f))

    def go(g, env):
        if isinstance(g, Exists):
            env = dict(env)
            new = []
            for n in g.vars:
                m, i = n, 1
                while m in used:
                    i += 1
                    m = f"{n}_{i}"
                used.add(m)
                env[n] = m
                new.append(m)
            return Exists(tuple(new), go(g.body, env))
        if isinstance(g, (And, Or)):
            return type(g)(go(g.left, env), go(g.right, env))
        ren = lambda t: _rename(t, env)
        if isinstance(g, AtomH):
            return AtomH(g.m, g.n, tuple(map(ren, g.xs)), tuple(map(ren, g.ys)))
        return type(g)(ren(g.left), ren(g.right))
    return go(f, {})


def _rename(t, env):
    if isinstance(t, Var):
        return Var(env.get(t.name, t.name))
    if isinstance(t, (Add, Mul)):
        return type(t)(_rename(t.left, env), _rename(t.right, env))
    return t


def nat_solve(f: Formula, fixed: Optional[Mapping[str, int]] = None, bound: int = 30) -> Optional[Dict[str, int]]:
    """A satisfying assignment over N, or None.

    Quantified source variables range over 0..bound, even when an equation
    forces their value.  Free variables act as parameters: values in
    ``fixed`` are taken as given, the others are unrestricted when forced.
    Auxiliary variables (leading underscore, introduced by
    :func:`eliminate_mul` and :func:`flatten`) are likewise unrestricted when
    forced.  Anything not forced is enumerated over 0..bound.  Forced values are propagated first;
    the rest are enumerated, source variables before auxiliary ones, each
    group in quantifier order.  ``f`` must use distinct bound names (see
    :func:`uniquify`).
    """
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    check_flat_names(f)
    fixed = {k: int(v) for k, v in (fixed or {}).items()}
    for v, val in fixed.items():
        if val < 0:
            raise ValueError(f"{v} = {val} is not a natural number")
    f = fold_constants(f)
    names, matrix = _prenex(f)
    order = sorted(free_vars(f)) + names
    order = [v for v in order if not is_auxiliary(v)] + [v for v in order if is_auxiliary(v)]
    limited = frozenset(v for v in names if not is_auxiliary(v) and v not in fixed)
    for clause in _dnf(matrix):
        cvars = set().union(*(_atom_vars(a) for a in clause))
        base = {k: v for k, v in fixed.items() if k in cvars}
        r = _solve_clause(clause, [v for v in order if v in cvars], base, bound, limited)
        if r is not None:
            for k, v in fixed.items():
                r.setdefault(k, v)
            return r
    return None


def nat_eval(f: Formula, bound: int = 30, assignment: Optional[Mapping[str, int]] = None) -> bool:
    """Is ``f`` true over N with its quantified source variables in 0..bound?  See :func:`nat_solve`."""
    missing = free_vars(f) - set(assignment or {})
    if missing:
        raise MissingVariable(sorted(missing)[0])
    return nat_solve(uniquify(f), assignment, bound) is not None


# ---------------------------------------------------------------- compilation


@dataclass(frozen=True)
class CompileOutput:
    sentence: Formula
    var_map: Dict[str, str]
    inventory: Tuple[Tuple[str, int], ...]
    source: Formula = field(repr=False)
    flat: Formula = field(repr=False)
    profile: Profile = field(repr=False)
    plan: object = field(default=None, repr=False, compare=False)

    @property
    def user_vars(self) -> Tuple[str, ...]:
        return tuple(sorted(free_vars(self.source) | set(bound_vars(self.source))))


def qvar(name: str) -> str:
    return "v." + name


def _validate_names(f: Formula) -> None:
    for n in free_vars(f) | set(bound_vars(f)):
        if n.startswith("_") or "." in n:
            raise CompileError(f"variable name {n!r} is reserved (leading '_' or '.')")
    check_flat_names(f)


_FORMULAS = {
    "zero": lambda args, pr, p: formula_zero(Var(qvar(args[0])), pr, p),
    "one": lambda args, pr, p: formula_one(Var(qvar(args[0])), pr, p),
    "eq": lambda args, pr, p: formula_eq(Var(qvar(args[0])), Var(qvar(args[1])), pr, p),
    "add": lambda args, pr, p: formula_add(*(Var(qvar(a)) for a in args), pr, p),
    "B": lambda args, pr, p: formula_B(Var(qvar(args[0])), Var(qvar(args[1])), pr, p),
}


def compile_formula(f: Formula, profile: Profile) -> CompileOutput:
    """Translate an N-formula into an equivalent-at-theta formula over Q with heights."""
    _validate_names(f)
    flat = flatten(eliminate_mul(fold_constants(f)))
    counts: Dict[str, int] = {}
    gi = [0]

    def membership(names):
        return [formula_X4(Var(qvar(n)), profile, f"m.{n}.") for n in names]

    def tr(g):
        if isinstance(g, Exists):
            body, plan = tr(g.body)
            counts["X_4"] = counts.get("X_4", 0) + len(g.vars)
            out = Exists(tuple(qvar(n) for n in g.vars), conj(membership(g.vars) + [body]))
            return out, ("exists", g.vars, plan)
        if isinstance(g, (And, Or)):
            l, pl = tr(g.left)
            r, pr_ = tr(g.right)
            kind = "and" if isinstance(g, And) else "or"
            return type(g)(l, r), (kind, pl, pr_, g.left)
        kind, args = primitive_kind(g)
        p = f"g{gi[0]}."
        gi[0] += 1
        counts[kind] = counts.get(kind, 0) + 1
        return _FORMULAS[kind](args, profile, p), ("atom", kind, args, p)

    body, plan = tr(flat)
    top = sorted(free_vars(flat))
    counts["X_4"] = counts.get("X_4", 0) + len(top)
    sentence = conj(membership(top) + [body]) if top else body
    nat_vars = set(free_vars(flat)) | set(bound_vars(flat))
    var_map = {n: qvar(n) for n in sorted(nat_vars)}
    return CompileOutput(
        sentence=sentence,
        var_map=var_map,
        inventory=tuple(sorted(counts.items())),
        source=f,
        flat=flat,
        profile=profile,
        plan=(top, plan),
    )


# ``compile`` is the public name; the builtin stays reachable as builtins.compile.
compile = compile_formula


# ---------------------------------------------------------------- witnesses


def witness_up(f_or_out, a: Mapping[str, int], profile: Profile, complete: bool = True) -> Dict[str, object]:
    """Rational witness for the compiled sentence from a satisfying N-assignment.

    Variables of disjuncts the witness does not use are set to 0 unless
    ``complete`` is false.
    """
    out = f_or_out if isinstance(f_or_out, CompileOutput) else compile_formula(f_or_out, profile)
    if out.profile != profile:
        raise CompileError("the compiled sentence belongs to another profile")
    for k, v in a.items():
        if int(v) > profile.m_max:
            raise RangeError(f"{k} = {v} exceeds m_max = {profile.m_max}")
    A = nat_solve(out.flat, a, profile.m_max)
    if A is None:
        raise Refusal("the assignment does not satisfy the formula (within m_max)")
    too_big = {k: v for k, v in A.items() if v > profile.m_max}
    if too_big:
        raise RangeError(f"witness values exceed m_max = {profile.m_max}: {too_big}")

    certs: Dict[int, X4Certificate] = {}
    w: Dict[str, object] = {}

    def cert(n):
        val = A.setdefault(n, 0)
        if val not in certs:
            certs[val] = encode(val, profile)
        return certs[val]

    def bind(names):
        for n in names:
            c = cert(n)
            w[qvar(n)] = c.q
            w.update(witness_X4(c, profile, f"m.{n}."))

    def fill(node):
        tag = node[0]
        if tag == "exists":
            bind(node[1])
            fill(node[2])
        elif tag == "and":
            fill(node[1])
            fill(node[2])
        elif tag == "or":
            try:
                left = nat_holds(node[3], A)
            except MissingVariable:
                left = False
            fill(node[1] if left else node[2])
        else:
            _, kind, args, p = node
            qs = [cert(n).q for n in args]
            if kind == "zero":
                w.update(witness_zero(qs[0], profile, p))
            elif kind == "one":
                w.update(witness_one(qs[0], profile, p))
            elif kind == "eq":
                w.update(witness_eq(qs[0], qs[1], profile, p))
            elif kind == "add":
                w.update(witness_add(qs[0], qs[1], qs[2], profile, p))
            else:
                k = int(isqrt(A[args[0]]))
                w.update(witness_B(qs[0], qs[1], k, profile, p))

    top, plan = out.plan
    bind(top)
    fill(plan)
    return complete_witness(out.sentence, w) if complete else w


class WitnessRejected(ValueError):
    pass


def witness_down(w: Mapping[str, object], out: CompileOutput, profile: Profile) -> Dict[str, int]:
    """Decode a checked rational witness into an N-assignment of the source variables."""
    if not check_witness(out.sentence, w):
        raise WitnessRejected("the witness does not satisfy the compiled sentence")
    decoded = {n: decode(w[q], profile) for n, q in out.var_map.items() if q in w}
    if nat_solve(out.flat, decoded, profile.m_max) is None:
        raise AssertionError("decoded assignment fails over N; the interpretation is broken")
    return {n: decoded[n] for n in out.user_vars if n in decoded}
