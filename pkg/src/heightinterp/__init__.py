"""Exact heights on Q, the curve y^2 = x^3 + 2, and an interpretation of (N; 0, 1, +, *) in Q with height comparisons."""

from .curve import INFINITY, Point, canonical_height, gamma_point, generator, scalar_mul
from .formula import check_witness, parse, render
from .heights import CertifiedReal, log_height, mult_height
from .interp import Profile, build_profile, decode, encode, slack_analysis
from .reduce import CompileOutput, compile_formula, eliminate_mul, nat_eval, witness_down, witness_up

__version__ = "0.1.0"

__all__ = [
    "INFINITY", "Point", "canonical_height", "gamma_point", "generator", "scalar_mul",
    "check_witness", "parse", "render",
    "CertifiedReal", "log_height", "mult_height",
    "Profile", "build_profile", "decode", "encode", "slack_analysis",
    "CompileOutput", "compile_formula", "eliminate_mul", "nat_eval", "witness_down", "witness_up",
]
