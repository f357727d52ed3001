"""heightinterp command line.

Every subcommand prints a human-readable report, or JSON with ``--json``, and
exits 0 exactly when its verdict is positive.  Profile parameters come from
flags, from a ``key=value`` config file (``--config``), or from the file named
by ``HEIGHTINTERP_PROFILE``; flags win over files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Dict, List, Optional

from . import curve, heights, interp, reduce
from .formula import FormulaError, ParseError, check_witness, parse, render, size
from .heights import RationalError, format_rational, parse_rational

PROFILE_ENV = "HEIGHTINTERP_PROFILE"
DEFAULTS = {"N": 200, "m_max": 100, "c_E": "4", "k_limit": 16}


class CommandFailed(Exception):
    """A negative verdict or a surfaced error; carries the exit code."""

    def __init__(self, message: str, code: int = 1):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------- config


def read_config(path: str) -> Dict[str, str]:
    """Parse ``key=value`` lines; '#' starts a comment.  JSON profile files are accepted too."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        return {k: v for k, v in data.items() if k in ("N", "m_max", "c_E", "k_limit", "eps")}
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CommandFailed(f"{path}:{lineno}: expected key=value", 2)
        k, v = (s.strip() for s in line.split("=", 1))
        out[k] = v
    return out


def resolve_config(args) -> dict:
    cfg = dict(DEFAULTS)
    path = getattr(args, "config", None) or os.environ.get(PROFILE_ENV)
    if path:
        cfg.update(read_config(path))
    for key in ("N", "m_max", "c_E"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def load_profile(args) -> interp.Profile:
    cfg = resolve_config(args)
    try:
        return interp.build_profile(
            N=int(cfg["N"]),
            m_max=int(cfg["m_max"]),
            c_E=heights.as_rational(str(cfg["c_E"])),
            k_limit=int(cfg.get("k_limit", 16)),
        )
    except (interp.ProfileRejected, interp.PrecisionError, ValueError) as exc:
        raise CommandFailed(f"profile rejected: {exc}")


def add_profile_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--N", type=int, help="multiplier N (default 200)")
    p.add_argument("--mmax", "--m-max", dest="m_max", type=int, help="largest encodable natural number")
    p.add_argument("--cE", "--c-E", dest="c_E", help="height-gap constant c_E (rational)")
    p.add_argument("--config", help="key=value profile file (default: $%s)" % PROFILE_ENV)


def emit(args, human: str, data) -> None:
    if args.json:
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        print(human)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: Optional[str], text: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------- height


def cmd_height(args) -> int:
    vals = args.values
    op = args.op
    try:
        if op == "h":
            qs = [parse_rational(v) for v in vals]
            h = heights.mult_height(qs[0] if len(qs) == 1 else qs)
            emit(args, str(h), {"height": int(h)})
            return 0
        if op == "H":
            if "--" in vals:
                i = vals.index("--")
                xs, ys = vals[:i], vals[i + 1:]
            elif len(vals) == 2:
                xs, ys = vals[:1], vals[1:]
            else:
                raise CommandFailed("usage: height H x... -- y...", 2)
            xs = [parse_rational(v) for v in xs]
            ys = [parse_rational(v) for v in ys]
            verdict = heights.holds_H(xs, ys)
        elif op == "E":
            if len(vals) != 2:
                raise CommandFailed("usage: height E x y", 2)
            verdict = heights.holds_E(*map(parse_rational, vals))
        else:
            if len(vals) != 3:
                raise CommandFailed("usage: height S x y z", 2)
            verdict = heights.holds_S(*map(parse_rational, vals))
    except RationalError as exc:
        raise CommandFailed(f"malformed rational: {exc}", 2)
    emit(args, "true" if verdict else "false", {"op": op, "holds": verdict})
    return 0 if verdict else 1


# ---------------------------------------------------------------- curve


def cmd_curve(args) -> int:
    P1 = curve.generator()
    if args.what == "mul":
        P = curve.scalar_mul(args.n, P1)
        text = curve.format_point(P)
        emit(args, text, {"n": args.n, "point": text, "naive_height": int(curve.naive_height(P))})
        return 0
    if args.what == "hhat":
        t = time.perf_counter()
        hh = curve.canonical_height(P1, args.k)
        dt = time.perf_counter() - t
        emit(
            args,
            f"hhat(P1) in {hh}  (width {float(hh.width):.3e}, {dt:.2f}s)",
            {"k": args.k, "lo": format_rational(hh.lo), "hi": format_rational(hh.hi),
             "lo_approx": float(hh.lo), "hi_approx": float(hh.hi), "width": float(hh.width)},
        )
        return 0
    # gap
    hh = curve.canonical_height(P1, args.k)
    lo, hi = curve.CONSTANTS.gap_lower, curve.CONSTANTS.gap_upper
    rows, ok = [], True
    for k in range(1, args.range + 1):
        g = curve.height_gap(k, hh)
        inside = lo < g.lo and g.hi < hi
        ok &= inside
        rows.append({"k": k, "lo": float(g.lo), "hi": float(g.hi), "inside": inside})
    human = "\n".join(f"k={r['k']:3d}  [{r['lo']:+.6f}, {r['hi']:+.6f}]  {'ok' if r['inside'] else 'OUTSIDE'}"
                      for r in rows)
    human += f"\nall gaps inside ({float(lo)}, {float(hi)}): {ok}"
    emit(args, human, {"bounds": [float(lo), float(hi)], "gaps": rows, "all_inside": ok})
    return 0 if ok else 1


# ---------------------------------------------------------------- encode / decode


def cmd_encode(args) -> int:
    profile = load_profile(args)
    try:
        cert = interp.encode(args.m, profile)
    except interp.InterpError as exc:
        raise CommandFailed(str(exc))
    text = json.dumps(cert.as_dict(), indent=2)
    _write(args.output, text + "\n")
    if args.json or not args.output:
        print(text)
    else:
        q = format_rational(cert.q)
        short = q if len(q) <= 40 else f"{q[:18]}...{q[-18:]} ({len(q)} digits)"
        print(f"m = {cert.m}, k = {list(cert.k)}, q = {short}; written to {args.output}")
    return 0


def cmd_decode(args) -> int:
    profile = load_profile(args)
    text = _read(args.source).strip()
    try:
        if text.startswith("{"):
            cert = interp.X4Certificate.from_dict(json.loads(text))
            if not interp.verify_certificate(cert, profile):
                raise CommandFailed("certificate is inconsistent with the profile")
            q = cert.q
        else:
            q = parse_rational(text)
        m = interp.decode(q, profile)
    except (interp.InterpError, RationalError, KeyError, ValueError) as exc:
        if isinstance(exc, CommandFailed):
            raise
        raise CommandFailed(f"{type(exc).__name__}: {exc}")
    emit(args, str(m), {"m": m})
    return 0


# ---------------------------------------------------------------- compile / check / witnesses


def _load_nat_formula(path: str):
    try:
        return parse(_read(path))
    except ParseError as exc:
        raise CommandFailed(f"parse error: {exc}", 2)


def _compile(args, profile):
    try:
        return reduce.compile_formula(_load_nat_formula(args.formula), profile)
    except FormulaError as exc:
        if isinstance(exc, ParseError):
            raise
        raise CommandFailed(f"compile error: {exc}", 2)


def _load_witness(path: str) -> dict:
    try:
        data = json.loads(_read(path))
        return {k: heights.as_rational(v) for k, v in data.items()}
    except (ValueError, RationalError) as exc:
        raise CommandFailed(f"malformed witness file: {exc}", 2)


def _dump_witness(w: dict) -> str:
    return json.dumps({k: format_rational(v) for k, v in sorted(w.items())}, indent=1)


def cmd_compile(args) -> int:
    profile = load_profile(args)
    out = _compile(args, profile)
    text = render(out.sentence)
    _write(args.output, text + "\n")
    _write(args.var_map, json.dumps(out.var_map, indent=2) + "\n")
    data = {"var_map": out.var_map, "inventory": dict(out.inventory), "size": size(out.sentence),
            "profile": profile.as_dict()}
    if args.json:
        if not args.output:
            data["sentence"] = text
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        if not args.output:
            print(text)
        print(f"; size {data['size']} nodes; gadgets {data['inventory']}", file=sys.stderr)
        print("; var_map " + json.dumps(out.var_map), file=sys.stderr)
    return 0


def cmd_check(args) -> int:
    try:
        sentence = parse(_read(args.sentence))
    except ParseError as exc:
        raise CommandFailed(f"parse error: {exc}", 2)
    w = _load_witness(args.witness)
    try:
        ok = check_witness(sentence, w)
    except FormulaError as exc:
        raise CommandFailed(f"reject: {exc}")
    emit(args, "accept" if ok else "reject", {"accepted": ok})
    return 0 if ok else 1


def cmd_witness_up(args) -> int:
    profile = load_profile(args)
    out = _compile(args, profile)
    try:
        assignment = {k: int(v) for k, v in json.loads(_read(args.assignment)).items()} if args.assignment else {}
    except (ValueError, TypeError) as exc:
        raise CommandFailed(f"malformed assignment: {exc}", 2)
    try:
        w = reduce.witness_up(out, assignment, profile)
    except (reduce.Refusal, interp.InterpError) as exc:
        raise CommandFailed(f"refused: {exc}")
    text = _dump_witness(w)
    _write(args.output, text + "\n")
    if args.output:
        emit(args, f"{len(w)} witness values written to {args.output}", {"variables": len(w), "output": args.output})
    else:
        print(text)
    return 0


def cmd_witness_down(args) -> int:
    profile = load_profile(args)
    out = _compile(args, profile)
    w = _load_witness(args.witness)
    try:
        a = reduce.witness_down(w, out, profile)
    except (reduce.WitnessRejected, interp.InterpError) as exc:
        raise CommandFailed(f"rejected: {exc}")
    emit(args, json.dumps(a), {"assignment": a})
    return 0


# ---------------------------------------------------------------- slack / profile / verify


def cmd_slack(args) -> int:
    c_E = heights.as_rational(args.c_E)
    rep = interp.slack_analysis(c_E)
    lines = [f"c_E = {format_rational(rep.c_E)}", "constraint        D must exceed"]
    for c in rep.constraints:
        lines.append(f"  {c.name:16s}{format_rational(c.bound):>8s}   {c.source}")
    lines.append(f"decode window B_dec = {format_rational(rep.B_dec)};  D_min = {format_rational(rep.D_min)}")
    for n, req, lim, ok in rep.completeness:
        lines.append(f"  completeness {n:6s} needs {format_rational(req)} <= {format_rational(lim)}: {ok}")
    data = rep.as_dict()
    verdict = rep.feasible
    if args.check_N is not None:
        try:
            prof = interp.build_profile(N=args.check_N, m_max=args.m_max or 100, c_E=c_E)
            lines.append(f"N = {args.check_N}: accepted, D in {prof.D}")
            data["check"] = {"N": args.check_N, "accepted": True, "profile": prof.as_dict()}
        except (interp.ProfileRejected, interp.PrecisionError) as exc:
            verdict = False
            lines.append(f"N = {args.check_N}: rejected ({exc})")
            data["check"] = {"N": args.check_N, "accepted": False, "reason": str(exc)}
    emit(args, "\n".join(lines), data)
    return 0 if verdict else 1


def cmd_profile(args) -> int:
    profile = load_profile(args)
    data = profile.as_dict()
    human = "\n".join(f"{k} = {v}" for k, v in data.items())
    _write(args.output, json.dumps(data, indent=2) + "\n")
    emit(args, human, data)
    return 0


def cmd_verify_lemmas(args) -> int:
    from . import verify

    suites = verify.SUITES if args.suite == "all" else [args.suite]
    profile = load_profile(args) if any(s == "interp" for s in suites) else None
    results = []
    for s in suites:
        results.extend(verify.run_suite(s, samples=args.samples, seed=args.seed, profile=profile))
    ok = all(r.failures == 0 for r in results)
    human = "\n".join(f"{'pass' if r.failures == 0 else 'FAIL'}  {r.name:32s} {r.checked} checked, {r.failures} failed"
                      + (f"  ({r.detail})" if r.detail else "") for r in results)
    emit(args, human, {"passed": ok, "results": [r.as_dict() for r in results]})
    return 0 if ok else 1


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heightinterp", description=__doc__.splitlines()[0])
    ap.add_argument("--json", action="store_true", help="machine-readable output")
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
        p.set_defaults(func=fn)
        return p

    p = cmd("height", cmd_height, "multiplicative heights and the H / E / S relations")
    p.add_argument("op", choices=["h", "H", "E", "S"])
    p.add_argument("values", nargs=argparse.REMAINDER)

    p = cmd("curve", cmd_curve, "arithmetic on y^2 = x^3 + 2 with P1 = (-1, 1)")
    csub = p.add_subparsers(dest="what", required=True)
    m = csub.add_parser("mul")
    m.add_argument("n", type=int)
    m = csub.add_parser("hhat")
    m.add_argument("--k", type=int, default=12, help="doubling depth")
    m = csub.add_parser("gap")
    m.add_argument("--range", type=int, default=12)
    m.add_argument("--k", type=int, default=10, help="doubling depth for hhat")
    for m in csub.choices.values():
        m.add_argument("--json", action="store_true", default=argparse.SUPPRESS)

    p = cmd("encode", cmd_encode, "X_4 certificate for a natural number")
    p.add_argument("m", type=int)
    p.add_argument("-o", "--output")
    add_profile_flags(p)

    p = cmd("decode", cmd_decode, "theta of a certificate file or rational")
    p.add_argument("source", help="certificate JSON, a file holding a/b, or - for stdin")
    add_profile_flags(p)

    p = cmd("compile", cmd_compile, "compile an N-sentence to a sentence over Q")
    p.add_argument("formula")
    p.add_argument("-o", "--output")
    p.add_argument("--var-map", dest="var_map")
    add_profile_flags(p)

    p = cmd("check", cmd_check, "check a witness against a sentence")
    p.add_argument("sentence")
    p.add_argument("witness")

    p = cmd("witness-up", cmd_witness_up, "rational witness from an N-assignment")
    p.add_argument("formula")
    p.add_argument("assignment", nargs="?")
    p.add_argument("-o", "--output")
    add_profile_flags(p)

    p = cmd("witness-down", cmd_witness_down, "N-assignment from a rational witness")
    p.add_argument("formula")
    p.add_argument("witness")
    add_profile_flags(p)

    p = cmd("verify-lemmas", cmd_verify_lemmas, "run the invariant suites")
    p.add_argument("--suite", default="all", choices=["all", "heights", "curve", "gadgets", "interp", "reduce"])
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    add_profile_flags(p)

    p = cmd("slack", cmd_slack, "margin table for c_E")
    p.add_argument("--cE", "--c-E", dest="c_E", default="4")
    p.add_argument("--check-N", dest="check_N", type=int)
    p.add_argument("--mmax", dest="m_max", type=int)

    p = cmd("profile", cmd_profile, "build and print a profile")
    p.add_argument("-o", "--output")
    add_profile_flags(p)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CommandFailed as exc:
        print(f"heightinterp {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"heightinterp {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
