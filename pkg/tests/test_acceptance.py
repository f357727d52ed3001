"""Acceptance criteria 1-9.

Each test prints one line ``[PASS|FAIL] criterion n: ...`` with the measured
quantities and wall time; time limits are part of the verdict.  They are
repeated in an "acceptance criteria" section at the end of the run; use
``pytest -s`` to see them live.
"""

import random
import time

import pytest
from conftest import VERDICTS
from gmpy2 import mpq

from heightinterp import curve, heights, interp, reduce, verify
from heightinterp.formula import check_witness, parse, render
from heightinterp.gadgets import catalog

REF_HHAT = mpq("0.7545769")


def verdict(n, ok, detail, elapsed, limit):
    ok = bool(ok) and elapsed < limit
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail} ({elapsed:.2f}s, limit {limit:g}s)"
    print("\n" + line)
    VERDICTS.append(line)
    return ok


def test_criterion_1_height_sum_identity():
    rng = random.Random(1)
    t = time.perf_counter()
    failures = 0
    for _ in range(10**4):
        a = verify.random_rational(rng, 10**18)
        b = verify.random_rational(rng, 10**18)
        if heights.mult_height(a) * heights.mult_height(b) != heights.mult_height((a, b, a * b)):
            failures += 1
    dt = time.perf_counter() - t
    assert verdict(1, failures == 0, f"10^4 pairs, {failures} failures", dt, 10)


def test_criterion_2_canonical_height():
    P1 = curve.generator()
    t = time.perf_counter()
    h6 = curve.canonical_height(P1, 6)
    dt6 = time.perf_counter() - t
    ok6 = verdict("2 (k=6)", h6.contains(REF_HHAT) and h6.width < mpq(1, 100),
                  f"interval {h6}, width {float(h6.width):.3g}", dt6, 10)
    t = time.perf_counter()
    h12 = curve.canonical_height(P1, 12)
    dt12 = time.perf_counter() - t
    ok12 = verdict("2 (k=12)", h12.contains(REF_HHAT) and h12.width < mpq(1, 10**6),
                   f"interval {h12}, width {float(h12.width):.3g}", dt12, 300)
    assert ok6 and ok12


def test_criterion_3_height_gap():
    t = time.perf_counter()
    hh = curve.canonical_height(curve.generator(), 12)
    lo, hi = curve.CONSTANTS.gap_lower, curve.CONSTANTS.gap_upper
    bad, worst = [], [mpq(0), mpq(0)]
    for k in range(1, 13):
        g = curve.height_gap(k, hh)
        worst = [min(worst[0], g.lo), max(worst[1], g.hi)]
        if not (lo < g.lo and g.hi < hi):
            bad.append(k)
    dt = time.perf_counter() - t
    assert verdict(3, not bad, f"gaps for k=1..12 within [{float(worst[0]):.4f}, {float(worst[1]):.4f}] "
                   f"inside ({float(lo)}, {float(hi)}); outside: {bad}", dt, 300)


def test_criterion_4_gadgets():
    t = time.perf_counter()
    results = verify.suite_gadgets(1000, random.Random("criterion-4"))
    dt = time.perf_counter() - t
    by_name = {r.name: r for r in results}
    enough = all(by_name[f"{g} completeness"].checked >= 1000 for g in ["A", "L"] + [f"A^{M}" for M in range(1, 5)]
                 + [f"E^{M}" for M in range(1, 5)])
    failures = sum(r.failures for r in results)
    summary = ", ".join(f"{r.name} {r.checked}" for r in results if "completeness" in r.name)
    assert verdict(4, enough and failures == 0, f"{failures} failures; accepted: {summary}", dt, 60)


def test_criterion_5_theta_round_trip():
    t = time.perf_counter()
    p30 = interp.build_profile(N=30, m_max=100, c_E=4)
    bad = []
    worst = mpq(0)
    for m in range(101):
        cert = interp.encode(m, p30)
        err = interp.height_error(cert.q, m, p30)
        worst = max(worst, -err.lo, err.hi)
        if interp.decode(cert.q, p30) != m or not (-16 <= err.lo and err.hi <= 16):
            bad.append(m)
    p200 = interp.build_profile(N=200, m_max=5, c_E=4)
    for m in range(6):
        cert = interp.encode(m, p200)
        err = interp.height_error(cert.q, m, p200)
        worst = max(worst, -err.lo, err.hi)
        if interp.decode(cert.q, p200) != m or not (-16 <= err.lo and err.hi <= 16):
            bad.append(("N=200", m))
    dt = time.perf_counter() - t
    assert verdict(5, not bad, f"N=30 m<=100 and N=200 m<=5; max |h - mD| <= {float(worst):.3f}; failures {bad}",
                   dt, 600)


def test_criterion_6_multiplication_from_B():
    g = reduce.formula_mul(reduce.Var("x"), reduce.Var("y"), reduce.Var("z"), "_m0")
    t = time.perf_counter()
    bad = []
    for x in range(31):
        for y in range(31):
            sol = reduce.nat_solve(g, {"x": x, "y": y}, 30)
            if sol is None or sol["z"] != x * y or reduce.nat_solve(g, {"x": x, "y": y, "z": x * y + 1}, 30):
                bad.append((x, y))
    dt = time.perf_counter() - t
    assert verdict(6, not bad, f"0 <= x, y <= 30 exhaustive, mismatches {bad}", dt, 1)


# true sentences over N; values stay small so witnesses remain cheap at N = 30
CORPUS = [
    "(exists (x) (= (+ x x) (+ 1 1)))",
    "(exists (x) (= x 0))",
    "(exists (x y) (and (= (+ x y) 3) (= x (+ y 1))))",
    "(exists (x) (= (+ x 1) 3))",
    "(B 0 1)",
    "(B 1 4)",
    "(exists (x) (B x 4))",
    "(exists (x y) (and (B x y) (= y 1)))",
    "(exists (x) (= (* x x) 1))",
    "(exists (x) (= (* x x) 0))",
    "(exists (x) (or (= (+ x x) 1) (= x 2)))",
    "(= (+ 1 1) 2)",
    "(exists (x) (= (* x 1) 2))",
    "(exists (x) (= (* x x) 4))",
]

_compiled = {}


def _corpus_profile():
    return interp.build_profile(N=30, m_max=100, c_E=4)


def test_criterion_7_end_to_end():
    t = time.perf_counter()
    profile = _corpus_profile()
    rng = random.Random(7)
    problems, perturbed, rejected = [], 0, 0
    for text in CORPUS:
        f = parse(text)
        out = reduce.compile_formula(f, profile)
        _compiled[text] = out
        w = reduce.witness_up(out, {}, profile)
        if not check_witness(out.sentence, w):
            problems.append(("rejected", text))
            continue
        a = reduce.witness_down(w, out, profile)
        if not reduce.nat_eval(f, 30, {k: v for k, v in a.items() if k not in reduce.bound_vars(f)}):
            problems.append(("nat_eval", text))
        # solve the source with the decoded values of its bound variables fixed
        if reduce.nat_solve(reduce.uniquify(f), a, 30) is None:
            problems.append(("decoded assignment", text))
        # perturb a gadget variable the witness uses (not a zero-filled untaken disjunct)
        used = reduce.witness_up(out, {}, profile, complete=False)
        key = rng.choice(sorted(k for k in used if k.startswith("g")))
        bad = dict(w)
        bad[key] = bad[key] + mpq(1, 2)
        perturbed += 1
        if not check_witness(out.sentence, bad):
            rejected += 1
        else:
            problems.append(("perturbation accepted", text, key))
    dt = time.perf_counter() - t
    ok = not problems and len(CORPUS) >= 10 and rejected >= 10
    assert verdict(7, ok, f"{len(CORPUS)} sentences, {rejected}/{perturbed} perturbations rejected, problems {problems}",
                   dt, 900)


def test_criterion_8_slack():
    t = time.perf_counter()
    rep = interp.slack_analysis(4)
    inter = set(dict(rep.intermediates).values())
    has = {160, 240, 84} <= inter
    accepted = {}
    for N in (200, 30, 5):
        try:
            interp.build_profile(N=N, m_max=100, c_E=4)
            accepted[N] = True
        except interp.ProfileRejected:
            accepted[N] = False
    dt = time.perf_counter() - t
    ok = has and rep.D_min < 30000 and accepted == {200: True, 30: True, 5: False}
    assert verdict(8, ok, f"intermediates {sorted(map(int, inter))}, D_min {rep.D_min}, accepted {accepted}", dt, 1)


def test_criterion_9_parser_round_trip():
    from strategies import random_formula

    rng = random.Random(9)
    t = time.perf_counter()
    randoms = [random_formula(rng) for _ in range(1000)]
    bad_random = sum(parse(render(f)) != f for f in randoms)
    profile = _corpus_profile()
    sentences = [g.formula for g in catalog(4).values()]
    makers = [interp.gadget_zero, interp.gadget_one, interp.gadget_eq, interp.gadget_add, interp.gadget_B]
    sentences += [m(profile).formula for m in makers]
    sentences += [parse(s) for s in CORPUS]
    t_build = time.perf_counter()
    sentences += [(_compiled.get(s) or reduce.compile_formula(parse(s), profile)).sentence for s in CORPUS]
    t_build = time.perf_counter() - t_build
    bad = bad_random + sum(parse(render(f)) != f for f in sentences)
    dt = time.perf_counter() - t - t_build
    assert verdict(9, bad == 0 and len(randoms) >= 1000,
                   f"{len(randoms)} random ASTs + {len(sentences)} gadget/corpus sentences, {bad} mismatches", dt, 10)
