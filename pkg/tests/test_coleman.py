from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from signed_iwasawa.coleman import (
    FLAT,
    SHARP,
    closed_form_valuation,
    h_matrix,
    h_valuation,
    jv_membership,
    mock_coleman_pair,
    verify_col_u_identity,
    verify_det,
    verify_recursion,
    verify_wronskian,
)
from signed_iwasawa.dvr import INF, make_ring
from signed_iwasawa.errors import InputError
from signed_iwasawa.iwasawa import IwasawaPoly

X, A = sympy.symbols("X a")


def _sympy_h(n, p, a):
    H = sympy.eye(2)
    for i in range(1, n + 1):
        cyc = sympy.cyclotomic_poly(p**i, X).subs(X, 1 + X)
        H = sympy.Matrix([[a, 1], [-cyc, 0]]) * H
    return H.applyfunc(sympy.expand)


def _sym(F):
    return sum(c * X**i for i, c in enumerate(F.coeffs))


@pytest.mark.parametrize("p,a,n", [(3, 3, 3), (3, 0, 2), (5, 10, 2), (3, -6, 3)])
def test_entries_match_matrix_product(p, a, n):
    H = h_matrix(n, a, p)
    ref = _sympy_h(n, p, a)
    for i in range(2):
        for j in range(2):
            assert sympy.expand(_sym(H.entry(i, j)) - ref[i, j]) == 0


def test_small_entries():
    H = h_matrix(2, 3, 3)
    assert H.sharp == IwasawaPoly([6, -3, -1])
    assert H.flat == IwasawaPoly([3])


def test_symbolic_det_matches_sympy():
    ref = _sympy_h(3, 3, A)
    omega_over_x = sympy.cancel(((1 + X) ** 27 - 1) / X)
    assert sympy.expand(ref.det() - omega_over_x) == 0
    assert verify_det(3, None, 3).passed


@pytest.mark.parametrize("p", [3, 5])
@pytest.mark.parametrize("a", ["zero", "p", "2p", None])
def test_identities(p, a):
    a_p = {"zero": 0, "p": p, "2p": 2 * p, None: None}[a]
    for n in range(1, 5):
        assert verify_det(n, a_p, p).passed
        assert verify_wronskian(n, a_p, p).passed
        assert verify_recursion(n, a_p, p).passed
        for u in (1, 2):
            assert verify_col_u_identity(n, u, a_p, p).passed


def test_col_u_needs_a_unit():
    with pytest.raises(InputError):
        verify_col_u_identity(2, 3, 3, 3)


def test_closed_forms():
    assert closed_form_valuation(1, SHARP, 3, 1) == 2
    assert closed_form_valuation(1, FLAT, 3, 1) == 0
    assert closed_form_valuation(2, SHARP, 3, 1) == 2
    assert closed_form_valuation(2, FLAT, 3, 1) == 6
    assert closed_form_valuation(3, SHARP, 3, 1) == 18 * Fraction(10, 9)
    assert closed_form_valuation(1, SHARP, 3, INF) is INF


@pytest.mark.parametrize("p,a_p", [(3, 3), (3, 9), (5, 5), (5, 25)])
def test_computed_valuations_match(p, a_p):
    for n in range(1, 5):
        for sign in (SHARP, FLAT):
            c = h_valuation(n, sign, a_p, p)
            assert c.applicable and c.equal, c


def test_valuations_over_ramified_coefficients():
    # a_p = pi with pi^2 = 3, so r_p = 1/2
    R = make_ring(3, 2, 1, [-3, 0, 1], precision=40)
    for n in range(1, 4):
        for sign in (SHARP, FLAT):
            c = h_valuation(n, sign, R.gen, 3)
            assert c.closed_form == closed_form_valuation(n, sign, 3, Fraction(1, 2))
            if c.applicable:
                assert c.equal


def test_jv_membership():
    # (p - 1) g1(0) = (2 - a_p) g2(0): p = 3, a_p = 3 gives 2 g1(0) = -g2(0)
    assert jv_membership(IwasawaPoly([1, 5]), IwasawaPoly([-2, 7]), 3, 3).member
    assert not jv_membership(IwasawaPoly([1]), IwasawaPoly([1]), 3, 3).member


def test_mock_coleman_family_is_compatible():
    rows = mock_coleman_pair(3, IwasawaPoly([1, 2, 1]), IwasawaPoly([2, 0, 5]), 3, 3)
    assert all(r.compatible for r in rows)


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(1, 4),
    k=st.integers(-3, 3),
    p=st.sampled_from([3, 5]),
)
def test_identities_for_random_multiples_of_p(n, k, p):
    a_p = k * p
    assert verify_det(n, a_p, p).passed
    assert verify_wronskian(n, a_p, p).passed
