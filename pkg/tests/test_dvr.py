from fractions import Fraction
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from signed_iwasawa.dvr import INF, DvrElement, DvrRing, finite_module_length, make_ring, smith_normal_form, valuation
from signed_iwasawa.errors import InputError, NotFinite, PrecisionExhausted


@pytest.fixture(scope="module")
def z3():
    return DvrRing(3, precision=20)


@pytest.fixture(scope="module")
def ram():
    return make_ring(3, 2, 1, [-3, 0, 1], precision=20)


def test_base_ring_valuations(z3):
    assert valuation(z3.element(3)) == 1
    assert valuation(z3.element(18)) == 2
    assert valuation(z3.element(5)) == 0
    assert valuation(z3.element(0)) is INF
    assert str(INF) == "inf"


def test_ramified_generator_has_half_valuation(ram):
    assert valuation(ram.gen) == Fraction(1, 2)
    assert valuation(ram.gen * ram.gen) == 1
    assert valuation(ram.element(3)) == 1


def test_unramified_quadratic_ring():
    # X^2 - X - 1 = (X - 3)^2 mod 5, so it cannot define the extension
    assert [x for x in range(5) if (x * x - x - 1) % 5 == 0] == [3]
    with pytest.raises(InputError):
        make_ring(5, 1, 2, [-1, -1, 1])
    # 2 is not a square mod 5
    assert all((x * x - 2) % 5 for x in range(5))
    R = make_ring(5, 1, 2, [-2, 0, 1], precision=10)
    assert valuation(R.element(5)) == 1
    t = DvrElement(R, R.array([0, 1]))
    assert valuation(t) == 0
    assert t * t == R.element(2)
    assert valuation(R.gen) == 1  # the uniformizer of an unramified ring is p


def test_rejections():
    with pytest.raises(InputError):
        DvrRing(2)
    with pytest.raises(InputError):
        DvrRing(9)
    with pytest.raises(InputError):
        # X^2 - X - 1 splits mod 11 (4 is a root)
        make_ring(11, 1, 2, [-1, -1, 1])
    with pytest.raises(InputError):
        make_ring(3, 2, 1, [-9, 0, 1])  # constant term not of valuation 1
    with pytest.raises(InputError):
        make_ring(3, 2, 1, [-3, 1, 1])  # middle coefficient is a unit


def test_inverse_and_division(z3, ram):
    for R in (z3, ram):
        x = R.element(7) + R.gen * 3
        assert x * x.inverse() == R.one
        y = R.element(3) * x
        assert (y / x) == R.element(3)


def test_precision_propagation(z3):
    x = z3.element(9)
    y = z3.element(27)
    assert (x * y).prec == z3.precision


def test_snf_examples(z3):
    snf = smith_normal_form(z3.matrix([[1, 0], [0, 1]]), z3)
    assert list(snf.divisors.valuations) == [0, 0]
    assert snf.divisors.length == 0
    snf = smith_normal_form(z3.matrix([[3, 1], [0, 3]]), z3)
    assert list(snf.divisors.valuations) == [0, 2]
    assert snf.divisors.length == 2
    snf = smith_normal_form(z3.matrix([[3, 0], [0, 9]]), z3)
    assert snf.divisors.cardinality() == 3**3


def test_snf_certificates(z3, ram):
    rng = np.random.default_rng(3)
    for R in (z3, ram):
        M = R.array(rng.integers(-20, 20, size=(3, 4, R.d)))
        snf = smith_normal_form(M, R)
        D = R.matmul(R.matmul(snf.U, M), snf.V)
        off = D.copy()
        for k in range(snf.rank):
            off[k, k] = 0
        assert not np.any(off)


def test_singular_detection(z3):
    M = z3.matrix([[1, 2], [2, 4]])
    assert smith_normal_form(M, z3).divisors.rank_deficiency == 1
    with pytest.raises(NotFinite):
        finite_module_length(M, z3)
    with pytest.raises(PrecisionExhausted):
        smith_normal_form(M, z3, nonsingular=True)


def test_ramified_length(ram):
    # O / (pi) has length 1, O / (3) has length 2
    M = ram.matrix([[0, 0], [0, 0]])
    M[0, 0] = ram.pi()
    M[1, 1] = ram.scalar(3)
    assert finite_module_length(M, ram) == 3


def _coker_size_bruteforce(M, modulus):
    grid = np.array(list(itertools.product(range(modulus), repeat=2))).T
    img = (np.array(M) @ grid) % modulus
    return modulus**2 // len(np.unique(img[0] * modulus + img[1]))


def test_snf_against_coset_count(z3):
    # |Z_3^2 / M Z_3^2| = number of cosets of the image mod 3^6 when the
    # divisors stay below 3^6
    rng = np.random.default_rng(17)
    checked = 0
    while checked < 12:
        M = rng.integers(-9, 10, size=(2, 2)).tolist()
        det = M[0][0] * M[1][1] - M[0][1] * M[1][0]
        if det == 0:
            continue
        v = 0
        while det % 3 == 0:
            det //= 3
            v += 1
        if v >= 6:
            continue
        snf = smith_normal_form(z3.matrix(M), z3)
        assert snf.divisors.cardinality() == _coker_size_bruteforce(M, 3**6)
        checked += 1


small = st.integers(min_value=-500, max_value=500)


@settings(max_examples=60, deadline=None)
@given(a=small, b=small, c=small, d=small)
def test_valuation_is_multiplicative(a, b, c, d):
    R = make_ring(3, 2, 1, [-3, 0, 1], precision=24)
    x = R.element(a) + R.gen * b
    y = R.element(c) + R.gen * d
    vx, vy = valuation(x), valuation(y)
    if vx is INF or vy is INF:
        return
    assert valuation(x * y) == vx + vy


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-30, 30), min_size=3, max_size=3), min_size=3, max_size=3))
def test_snf_length_is_determinant_valuation(rows):
    R = DvrRing(3, precision=30)
    exact = int(__import__("sympy").Matrix(rows).det())
    if exact == 0:
        return
    v = 0
    while exact % 3 == 0:
        exact //= 3
        v += 1
    assert smith_normal_form(R.matrix(rows), R).divisors.length == v
