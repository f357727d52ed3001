"""Randomized invariant suites behind ``heightinterp verify-lemmas``.

Each check compares a construction against an independent exact oracle
(integer arithmetic, the witness checker, or the natural-number evaluator)
and counts failures; nothing here is trusted on its own say-so.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import List, Optional

from gmpy2 import mpq

from . import curve, gadgets, heights, interp, reduce
from .formula import Var, check_witness, parse, render

SUITES = ["heights", "curve", "gadgets", "interp", "reduce"]


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: int = 0
    detail: str = ""

    def record(self, ok: bool, note: str = "") -> None:
        self.checked += 1
        if not ok:
            self.failures += 1
            if note and not self.detail:
                self.detail = note

    def as_dict(self) -> dict:
        return {"name": self.name, "checked": self.checked, "failures": self.failures, "detail": self.detail}


def random_rational(rng: random.Random, bound: int = 10**18) -> mpq:
    num = rng.randint(-bound, bound)
    den = rng.randint(1, bound)
    return mpq(num, den)


def _fraction_height(*qs: Fraction) -> int:
    """Oracle with the standard library: max(|d q_i|, d) for d the common denominator."""
    d = 1
    for q in qs:
        d = d * q.denominator // gcd(d, q.denominator)
    return max([d] + [abs(q.numerator) * (d // q.denominator) for q in qs])


# ---------------------------------------------------------------- suites


def suite_heights(samples: int, rng: random.Random, profile=None) -> List[SuiteResult]:
    add = SuiteResult("addition of heights")
    oracle = SuiteResult("height vs fractions oracle")
    prod = SuiteResult("product formula")
    for _ in range(samples):
        a, b = random_rational(rng), random_rational(rng)
        add.record(heights.mult_height(a) * heights.mult_height(b) == heights.mult_height((a, b, a * b)), f"{a}, {b}")
        fa, fb = Fraction(int(a.numerator), int(a.denominator)), Fraction(int(b.numerator), int(b.denominator))
        oracle.record(heights.mult_height((a, b)) == _fraction_height(fa, fb), f"{a}, {b}")
        c = random_rational(rng, 10**6)
        if c:
            prod.record(heights.product_formula_check(c), str(c))
    return [add, oracle, prod]


def suite_curve(samples: int, rng: random.Random, profile=None) -> List[SuiteResult]:
    law = SuiteResult("group law")
    P1 = curve.generator()
    for _ in range(min(samples, 50)):
        a, b = rng.randint(-8, 8), rng.randint(-8, 8)
        lhs = curve.add(curve.scalar_mul(a, P1), curve.scalar_mul(b, P1))
        law.record(lhs == curve.scalar_mul(a + b, P1) and curve.on_curve(lhs), f"{a}+{b}")
    hh = curve.canonical_height(P1, 10)
    ref = SuiteResult("canonical height encloses reference")
    ref.record(hh.contains(mpq(curve.CONSTANTS.hhat_P1_reference)) and hh.width < mpq(1, 10**4),
               str(hh))
    gap = SuiteResult("height gap bounds, k <= 12")
    for k in range(1, 13):
        g = curve.height_gap(k, hh)
        gap.record(curve.CONSTANTS.gap_lower < g.lo and g.hi < curve.CONSTANTS.gap_upper, f"k={k}: {g}")
    return [law, ref, gap]


def with_height(rng: random.Random, H: int) -> mpq:
    """A random rational of multiplicative height exactly H."""
    other = rng.randint(0, H)
    if gcd(other, H) != 1:
        other = 1 if H > 1 else 0
    q = mpq(H, other) if (other and rng.random() < 0.5) else mpq(other, H)
    return -q if rng.random() < 0.5 else q


def _pair_at_gap(rng: random.Random, gap: float) -> tuple:
    """(x, y) with log H(x) - log H(y) close to ``gap``; heights stay below 10^12 to keep witnesses cheap."""
    hy = rng.randint(2, 10**5)
    hx = min(max(1, int(hy * math.exp(gap))), 10**12)
    return with_height(rng, hx), with_height(rng, hy)


def suite_gadgets(samples: int, rng: random.Random, profile=None) -> List[SuiteResult]:
    out = []
    four = SuiteResult("four squares")
    for _ in range(samples):
        n = rng.randint(0, 10**30)
        four.record(sum(k * k for k in gadgets.four_squares(n)) == n, str(n))
    out.append(four)

    # (name, gadget, completeness hypothesis on (hx, hy), gap range hitting it, soundness check)
    specs = [("A", gadgets.gadget_A(), lambda hx, hy: heights.log_le(hx, hy, 1), (-3.0, 1.0), gadgets.sound_A)]
    for M in range(1, 5):
        specs.append((f"A^{M}", gadgets.gadget_AM(M), lambda hx, hy, M=M: heights.log_le(hx, hy, M),
                      (-3.0 * M, float(M)), lambda x, y, M=M: gadgets.sound_AM(M, x, y)))
        specs.append((f"E^{M}", gadgets.gadget_EM(M),
                      lambda hx, hy, M=M: heights.log_le(hx, hy, M) and heights.log_le(hy, hx, M),
                      (-float(M), float(M)), lambda x, y, M=M: gadgets.sound_EM(M, x, y)))
    specs.append(("L", gadgets.gadget_L(), lambda hx, hy: heights.log_le(hx, hy, -11), (-20.0, -11.0),
                  gadgets.sound_L))
    for name, g, hypothesis, (lo, hi), sound in specs:
        comp = SuiteResult(f"{name} completeness")
        snd = SuiteResult(f"{name} soundness")
        while comp.checked < samples:
            x, y = _pair_at_gap(rng, rng.uniform(lo, hi))
            if hypothesis(heights.mult_height(x), heights.mult_height(y)):
                acc = check_witness(g.formula, g.witness(x, y))
                comp.record(acc, f"{x}, {y}")
                if acc:
                    snd.record(sound(x, y), f"{x}, {y}")
        for _ in range(samples):
            # witnesses built without the hypothesis: whatever is accepted must satisfy the sound bound
            x, y = _pair_at_gap(rng, rng.uniform(lo - 12, hi + 12))
            if check_witness(g.formula, g.witness(x, y, strict=False)):
                snd.record(sound(x, y), f"{x}, {y}")
        out += [comp, snd]
    return out


def suite_interp(samples: int, rng: random.Random, profile=None) -> List[SuiteResult]:
    profile = profile or interp.build_profile(N=30, m_max=100)
    rt = SuiteResult(f"theta round trip m <= {profile.m_max}")
    for m in range(profile.m_max + 1):
        cert = interp.encode(m, profile)
        err = interp.height_error(cert.q, m, profile)
        ok = interp.decode(cert.q, profile) == m and -16 <= err.lo and err.hi <= 16
        rt.record(ok, f"m={m}: error {err}")
    rel = SuiteResult("relation gadgets (small values)")
    small = min(profile.m_max, 9)
    enc = {m: interp.encode(m, profile) for m in range(small + 1)}
    cases = [("zero", (0,)), ("one", (1,))]
    for _ in range(max(1, min(samples, 20) // 4)):
        a, b = rng.randint(0, 3), rng.randint(0, 3)
        cases += [("eq", (a, a)), ("add", (a, b, a + b))]
    for k in range(0, 3):
        cases.append(("B", (k * k, (k + 1) ** 2)))
    makers = {"zero": interp.gadget_zero, "one": interp.gadget_one, "eq": interp.gadget_eq,
              "add": interp.gadget_add, "B": interp.gadget_B}
    built = {}
    for name, vals in cases:
        if any(v > small for v in vals):
            continue
        if name not in built:
            built[name] = makers[name](profile)
        g = built[name]
        opts = {"k": int(vals[0] ** 0.5)} if name == "B" else {}
        w = g.witness(*(enc[v] for v in vals), **opts)
        rel.record(check_witness(g.formula, w), f"{name}{vals}")
    return [rt, rel]


CORPUS_SMALL = [
    "(exists (x) (= (+ x x) (+ 1 1)))",
    "(exists (x y) (and (= (+ x y) 3) (= x (+ y 1))))",
    "(exists (x) (= (* x x) 4))",
    "(exists (x y) (and (= (* x y) 6) (= (+ x y) 5)))",
    "(exists (x) (or (= (+ x x) 1) (B x 9)))",
    "(B 9 16)",
]


def suite_reduce(samples: int, rng: random.Random, profile=None) -> List[SuiteResult]:
    mul = SuiteResult("multiplication from B, 0 <= x, y <= 30")
    g = reduce.formula_mul(Var("x"), Var("y"), Var("z"), "_m0")
    for x in range(31):
        for y in range(31):
            sol = reduce.nat_solve(g, {"x": x, "y": y}, 30)
            wrong = reduce.nat_solve(g, {"x": x, "y": y, "z": x * y + 1}, 30)
            mul.record(sol is not None and sol["z"] == x * y and wrong is None, f"{x}*{y}")
    elim = SuiteResult("eliminate_mul preserves truth")
    for s in CORPUS_SMALL:
        f = parse(s)
        for bound in (3, 10, 30):
            elim.record(reduce.nat_eval(f, bound) == reduce.nat_eval(reduce.eliminate_mul(f), bound), s)
    rt = SuiteResult("render/parse round trip")
    for s in CORPUS_SMALL:
        f = parse(s)
        rt.record(parse(render(f)) == f and parse(render(reduce.eliminate_mul(f))) == reduce.eliminate_mul(f), s)
    return [mul, elim, rt]


_RUNNERS = {
    "heights": suite_heights,
    "curve": suite_curve,
    "gadgets": suite_gadgets,
    "interp": suite_interp,
    "reduce": suite_reduce,
}


def run_suite(name: str, samples: int = 200, seed: int = 0, profile: Optional[interp.Profile] = None):
    rng = random.Random(f"{name}:{seed}")
    return _RUNNERS[name](samples, rng, profile)
