import json
import random

import pytest
from gmpy2 import mpq

from heightinterp.curve import gamma_point, generator, scalar_mul
from heightinterp.formula import check_witness, parse, render
from heightinterp.gadgets import GadgetError
from heightinterp.interp import (
    InterpError,
    NotInX4,
    ProfileRejected,
    RangeError,
    X4Certificate,
    build_profile,
    decode,
    encode,
    gadget_add,
    gadget_B,
    gadget_eq,
    gadget_one,
    gadget_X,
    gadget_zero,
    height_error,
    slack_analysis,
    verify_certificate,
)


def test_slack_intermediates():
    rep = slack_analysis(4)
    inter = dict(rep.intermediates)
    assert inter["eq"] == 160  # 16 + 16 + 4*32
    assert inter["add"] == 240  # 3*16 + 192
    assert inter["B"] == 84  # 4*20 + 4
    assert rep.feasible
    assert rep.D_min < 30000


def test_slack_infeasible_for_large_cE():
    assert not slack_analysis(6).feasible
    with pytest.raises(ProfileRejected):
        build_profile(N=200, c_E=6)


def test_profiles():
    p200 = build_profile(N=200, m_max=5)
    assert p200.D.lo > 30000
    assert build_profile(N=30, m_max=10).D.lo > slack_analysis(4).D_min
    with pytest.raises(ProfileRejected):
        build_profile(N=5)


def test_encode_zero_is_one(profile30):
    assert encode(0, profile30).q == 1


@pytest.mark.parametrize("m", [0, 1, 2, 3, 7, 15, 16, 50, 99, 100])
def test_round_trip(profile30, m):
    cert = encode(m, profile30)
    assert cert.m == m
    assert verify_certificate(cert, profile30)
    assert decode(cert.q, profile30) == m
    err = height_error(cert.q, m, profile30)
    assert -16 <= err.lo and err.hi <= 16


def test_alternative_decompositions_decode_alike(profile30):
    a = encode(9, profile30, k=(3, 0, 0, 0))
    b = encode(9, profile30, k=(2, 2, 1, 0))
    assert a.q != b.q
    assert decode(a.q, profile30) == decode(b.q, profile30) == 9


def test_range_and_membership_errors(profile30):
    with pytest.raises(RangeError):
        encode(101, profile30)
    with pytest.raises(InterpError):
        encode(5, profile30, k=(1, 1, 1, 1))
    # a rational whose height sits halfway between multiples of D is not in X_4
    q = mpq(2 ** int(profile30.D.mid * 1.5 / 0.6931))
    with pytest.raises(NotInX4):
        decode(q, profile30)


def test_certificate_json_round_trip(profile30):
    cert = encode(11, profile30)
    again = X4Certificate.from_dict(json.loads(json.dumps(cert.as_dict())))
    assert again == cert


def test_X_gadget(profile30):
    g = gadget_X(profile30)
    for k in (0, 1, 2, -1):
        U = None if k == 0 else scalar_mul(k, generator())
        val = mpq(0) if k == 0 else gamma_point(k, profile30.N).x
        assert check_witness(g.formula, g.witness(val, U=U))
    w = g.witness(gamma_point(1, profile30.N).x, U=generator())
    w["g"] = gamma_point(2, profile30.N).x
    assert not check_witness(g.formula, w)


@pytest.fixture(scope="module")
def certs(profile30):
    return {m: encode(m, profile30) for m in range(0, 10)}


def test_relation_gadgets_accept(profile30, certs):
    assert check_witness(gadget_zero(profile30).formula, gadget_zero(profile30).witness(certs[0]))
    assert check_witness(gadget_one(profile30).formula, gadget_one(profile30).witness(certs[1]))
    g = gadget_eq(profile30)
    assert check_witness(g.formula, g.witness(certs[5], encode(5, profile30, k=(1, 0, 2, 0))))
    g = gadget_add(profile30)
    assert check_witness(g.formula, g.witness(certs[2], certs[3], certs[5]))
    g = gadget_B(profile30)
    for k in range(3):
        assert check_witness(g.formula, g.witness(certs[k * k], certs[(k + 1) ** 2], k=k))


def test_relation_gadgets_refuse_false(profile30, certs):
    cases = [
        (gadget_zero(profile30), (certs[1],), {}),
        (gadget_one(profile30), (certs[2],), {}),
        (gadget_eq(profile30), (certs[5], certs[6]), {}),
        (gadget_add(profile30), (certs[2], certs[3], certs[6]), {}),
        (gadget_B(profile30), (certs[4], certs[8]), {"k": 2}),
    ]
    for g, vals, opts in cases:
        with pytest.raises((GadgetError, InterpError)):
            g.witness(*vals, **opts)
        try:
            w = g.witness(*vals, strict=False, **opts)
        except (GadgetError, InterpError):
            continue
        assert not check_witness(g.formula, w), g.name


def test_add_perturbations_rejected(profile30, certs):
    g = gadget_add(profile30)
    w = g.witness(certs[2], certs[3], certs[5])
    # variables of disjuncts the witness does not take are irrelevant; perturb the used ones
    used = g.witness(certs[2], certs[3], certs[5], complete=False)
    rng = random.Random(7)
    for k in rng.sample(sorted(k for k in used if k not in g.interface), 30):
        bad = dict(w)
        bad[k] = bad[k] + 1
        assert not check_witness(g.formula, bad), k


def test_gadget_round_trip(profile30):
    g = gadget_add(profile30)
    assert parse(render(g.formula)) == g.formula
