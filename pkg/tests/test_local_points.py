from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from _data import curve_config, rank_two_config
from signed_iwasawa.cyclotomic import galois_apply, pi_sequence
from signed_iwasawa.dvr import INF
from signed_iwasawa.formal_group import EulerData, _eye
from signed_iwasawa.local_points import (
    LocalPointSystem,
    ell_of_c,
    ell_of_d,
    epsilon_log,
    verify_q_system,
)


@pytest.fixture(scope="module")
def curve():
    return EulerData.from_json(curve_config(9))


@pytest.fixture(scope="module")
def curve_a3():
    return EulerData.from_json(curve_config(9, a3=3))


@pytest.fixture(scope="module")
def rank_two():
    return EulerData.from_json(rank_two_config(9))


def test_epsilon_log(curve, curve_a3, rank_two):
    assert epsilon_log(curve) == (Fraction(3, 4),)
    assert epsilon_log(curve_a3) == (Fraction(3),)
    # adjugate oracle for the rank-two inverse
    M = sympy.Matrix(4 * sympy.eye(2) - sympy.Matrix(rank_two.C_p.tolist()))
    expect = M.adjugate() * sympy.Matrix([3, 3]) / M.det()
    assert epsilon_log(rank_two) == tuple(Fraction(int(x.p), int(x.q)) for x in expect)


def test_ell_of_c_separated_form(curve):
    assert ell_of_c(curve, 0).terms == {}
    assert ell_of_c(curve, 1).terms == {1: (Fraction(1),)}
    c3 = ell_of_c(curve, 3)
    assert c3.constant == (Fraction(3, 4),)
    assert c3.terms == {3: (Fraction(1),), 1: (Fraction(-1, 3),)}


def test_ell_of_d0(curve):
    S = LocalPointSystem(curve, 1)
    d0 = S.d(0)
    # d_0 = (C_p - 2) eps, so ell(d_0) = -2 * 3/4 in Z_3
    expect = S.level.scalar(S.ring.scalar(Fraction(-3, 2) * 3**S.scale))
    assert d0[0] == expect
    assert ell_of_d(curve, 0, system=S).flat[0] == expect


def test_d_is_invariant(curve):
    S = LocalPointSystem(curve, 2)
    field = S.k(1)
    for a in field.generators():
        assert galois_apply(a, S.d(1)[0]) == S.d(1)[0]


def test_intermediate_relation_by_hand(curve):
    # Tr_{L_2/L_1} ell(c_2) = C_p ell(c_1) - ell(c_0) with C_p = 0
    S = LocalPointSystem(curve, 1)
    lhs = S.tr(S.c(2), S.L(2), S.L(1))
    assert lhs[0] == -S.c(0)[0]


@pytest.mark.parametrize("which", ["curve", "curve_a3", "rank_two"])
def test_q_system(which, request):
    E = request.getfixturevalue(which)
    rep = verify_q_system(E, nmax=2, precision=6)
    assert rep.passed, rep.failures()
    conds = {r.condition for r in rep.rows}
    assert conds == {"trace-c", "(i)", "(ii)", "(iii)"}
    for r in rep.rows:
        if r.condition != "(i)":
            assert r.residual_valuation is INF


def test_wrong_relation_is_caught(curve):
    S = LocalPointSystem(curve, 2)
    lhs = S.tr(S.d(2), S.k(2), S.k(1))
    rhs = S.sub(S.apply(curve.C_p + 3 * _eye(1), S.d(1)), S.d(0))
    v = S.valuation(S.sub(lhs, rhs))
    assert v is not INF and v == 1 + S.valuation(S.d(1))


def test_report_json(curve):
    rep = verify_q_system(curve, nmax=1, precision=4)
    doc = rep.to_json()
    assert doc["pass"] and doc["verified_precision"] == 4
    assert {"condition", "n", "residual_valuation", "pass"} <= set(doc["rows"][0])


@settings(max_examples=12, deadline=None)
@given(a=st.integers(-2, 2))
def test_relations_hold_for_any_supersingular_trace(a):
    E = EulerData.from_json(curve_config(9, a3=3 * a))
    assert verify_q_system(E, nmax=1, precision=4).passed


@settings(max_examples=10, deadline=None)
@given(a=st.sampled_from([2, 4, 5, 7, 8, 10]), n=st.integers(1, 3))
def test_galois_equivariance(curve, a, n):
    S = LocalPointSystem(curve, 1)
    val = ell_of_c(curve, n)
    lhs = galois_apply(a, S.c(n)[0])
    # conjugate the points e_m inside the separated form
    rhs = S.level.scalar(S.ring.scalar(val.constant[0] * 3**S.scale))
    for m, vec in val.terms.items():
        rhs = rhs + galois_apply(a, pi_sequence(m, S.level)) * S.level.scalar(S.ring.scalar(vec[0] * 3**S.scale))
    assert lhs == rhs

