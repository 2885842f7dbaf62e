from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from signed_iwasawa.cyclotomic import (
    CycLevel,
    TowerField,
    cyclotomic_eisenstein,
    embed,
    eps_valuation,
    galois_apply,
    pi_sequence,
    totient,
    trace,
)
from signed_iwasawa.dvr import DvrRing, make_ring
from signed_iwasawa.errors import InputError, NotInField


@pytest.fixture(scope="module")
def lev3():
    return CycLevel(3, 3, DvrRing(3, precision=12))


def test_eisenstein_polynomials():
    assert cyclotomic_eisenstein(3, 1) == (3, 3, 1)
    # Phi_9(1 + X) = ((1+X)^9 - 1) / ((1+X)^3 - 1)
    import sympy

    X = sympy.symbols("X")
    expect = sympy.Poly(sympy.cancel(((1 + X) ** 9 - 1) / ((1 + X) ** 3 - 1)), X).all_coeffs()[::-1]
    assert list(cyclotomic_eisenstein(3, 2)) == [int(c) for c in expect]
    assert totient(3, 0) == 1 and totient(5, 2) == 20


def test_eps_valuations():
    L = CycLevel(3, 2, DvrRing(3, precision=10))
    assert eps_valuation(L.eps()) == 1
    assert eps_valuation(embed(CycLevel(3, 1, L.base).eps(), L)) == 3
    assert eps_valuation(L.scalar(3)) == 6
    assert eps_valuation(L.eps() * L.eps() * 7) == 2


def test_eps_valuation_over_ramified_base():
    R = make_ring(3, 2, 1, [-3, 0, 1], precision=20)
    L = CycLevel(3, 1, R)
    assert eps_valuation(L.scalar(R.pi())) == 1
    # eps_1 - pi has two terms of equal valuation; the norm fallback decides
    x = L.eps() - L.scalar(R.pi())
    v = eps_valuation(x)
    assert v >= 1 and (2 * v).denominator == 1


def test_pi_sequence_compatibility(lev3):
    for n in (1, 2, 3):
        e_n, e_prev = pi_sequence(n, lev3), pi_sequence(n - 1, lev3)
        assert (e_n + 1) ** 3 - 1 == e_prev


def test_traces_of_eps(lev3):
    # Tr(zeta_{p^n}) is -1 for n = 1 and 0 above, so Tr_{L_n/Q_p} eps_n = -1 - phi or -phi
    base = TowerField.L(0, 3, 3)
    for n in (1, 2, 3):
        t = trace(pi_sequence(n, lev3), TowerField.L(n, 3, 3), base)
        expect = (-1 if n == 1 else 0) - totient(3, n)
        assert t == lev3.scalar(expect)


def test_relative_trace_matches_coset_sum(lev3):
    # Tr_{L_2/k_1} by summing sigma_a over an explicit set of coset representatives
    x = pi_sequence(2, lev3) * pi_sequence(2, lev3) + pi_sequence(1, lev3) * 5
    big, small = TowerField.L(2, 3, 3), TowerField.k(1, 3, 3)
    pN = 27
    # explicit enumeration of (fixer of k_1) / (fixer of L_2)
    reps = []
    for a in sorted(small.subgroup):
        if not any((a * pow(r, -1, pN)) % pN in big.subgroup for r in reps):
            reps.append(a)
    assert len(reps) == big.degree // small.degree == 2
    brute = lev3.zero()
    for a in reps:
        brute = brute + galois_apply(a, x)
    assert trace(x, big, small) == brute


def test_field_degrees():
    assert TowerField.L(2, 3, 3).degree == 6
    assert TowerField.k(1, 3, 3).degree == 3
    assert TowerField.k(0, 3, 3).degree == 1
    assert TowerField.k(2, 5, 3).degree == 25


def test_galois_action_small_cases():
    L = CycLevel(3, 1, DvrRing(3, precision=10))
    e = L.eps()
    assert galois_apply(2, e) == e * e + e * 2
    with pytest.raises(InputError):
        galois_apply(3, e)


def test_trace_checks_membership(lev3):
    with pytest.raises(NotInField):
        trace(pi_sequence(2, lev3), TowerField.L(1, 3, 3), TowerField.L(0, 3, 3))


def test_embed_is_a_ring_map():
    R = DvrRing(5, precision=8)
    lo, hi = CycLevel(5, 1, R), CycLevel(5, 2, R)
    x = lo.element([1, 2, 3])
    y = lo.element([4, 0, 1, 1])
    assert embed(x * y, hi) == embed(x, hi) * embed(y, hi)
    assert embed(x + y, hi) == embed(x, hi) + embed(y, hi)


coeff_lists = st.lists(st.integers(0, 3**8), min_size=1, max_size=18)
units = st.sampled_from([a for a in range(1, 27) if a % 3])


@settings(max_examples=40, deadline=None)
@given(a=units, b=units, xs=coeff_lists, ys=coeff_lists)
def test_galois_is_an_action_by_automorphisms(a, b, xs, ys):
    L = CycLevel(3, 3, DvrRing(3, precision=8))
    x, y = L.element(xs), L.element(ys)
    assert galois_apply(a, x * y) == galois_apply(a, x) * galois_apply(a, y)
    assert galois_apply(a, x + y) == galois_apply(a, x) + galois_apply(a, y)
    assert galois_apply(a, galois_apply(b, x)) == galois_apply(a * b % 27, x)


@settings(max_examples=25, deadline=None)
@given(xs=coeff_lists)
def test_traces_are_transitive_and_land_in_the_subfield(xs):
    L = CycLevel(3, 3, DvrRing(3, precision=8))
    x = L.element(xs)
    top, mid, bot = TowerField.L(3, 3, 3), TowerField.L(1, 3, 3), TowerField.L(0, 3, 3)
    t = trace(x, top, mid)
    assert mid.contains(t)
    assert trace(t, mid, bot) == trace(x, top, bot)
    # the full trace is a scalar
    assert not np.any(trace(x, top, bot).coeffs[1:])
