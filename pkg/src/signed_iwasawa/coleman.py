"""Logarithmic matrices C_i(X) = [[a_p, 1], [-Phi_i, 0]] and their products.

H_n = C_n ... C_1 (with H_0 = I).  The first row of H_n is (H_n^sharp,
H_n^flat).  Exact identities are checked in the variable Y = 1 + X, where
Phi_i(X) becomes the sparse 0/1 polynomial sum_{j<p} Y^(j p^(i-1)) and
omega_n / X becomes 1 + Y + ... + Y^(p^n - 1).  Substituting Y = 1 + X is a
ring isomorphism of Z[X] onto Z[Y], so an identity holds in one variable
exactly when it holds in the other, and coefficients stay small in Y.

a_p may be an int, None (a formal variable), or a DvrElement.  Polynomials
in (a, Y) are lists indexed by the power of a, each entry a list of ints.

Valuations at eps_n are computed separately, in the X-variable modulo a
power of p, from the row recursion H_n = a_p H_{n-1} - Phi_{n-1} H_{n-2}.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from . import _intpoly
from .cyclotomic import CycLevel, cyclotomic_eisenstein, eps_valuation, totient
from .dvr import INF, DvrElement, DvrRing
from .errors import InputError, PrecisionExhausted
from .iwasawa import IwasawaPoly, norm_lift, omega, poly_mul_ring

__all__ = [
    "LogMatrix",
    "IdentityCheck",
    "ValuationComparison",
    "MockColemanRow",
    "JvResult",
    "h_matrix",
    "verify_det",
    "verify_wronskian",
    "verify_col_u_identity",
    "verify_recursion",
    "closed_form_valuation",
    "h_valuation",
    "jv_membership",
    "mock_coleman_pair",
    "SHARP",
    "FLAT",
]

SHARP, FLAT = "sharp", "flat"
_SIGN_ALIASES = {"sharp": SHARP, "#": SHARP, "♯": SHARP, "flat": FLAT, "b": FLAT, "♭": FLAT}


def _sign(s: str) -> str:
    try:
        return _SIGN_ALIASES[s]
    except KeyError:
        raise InputError(f"sign must be 'sharp' or 'flat', got {s!r}", "sign") from None


# polynomials in (a, Y)

Bi = list  # list over powers of a of Y-polynomials


def _bi_trim(A: Bi) -> Bi:
    A = [_intpoly.trim(c) for c in A]
    while A and not A[-1]:
        A.pop()
    return A


def _bi_add(A: Bi, B: Bi) -> Bi:
    out = [list(c) for c in A] + [[] for _ in range(max(0, len(B) - len(A)))]
    for k, c in enumerate(B):
        out[k] = _intpoly.add(out[k], c)
    return out


def _bi_neg(A: Bi) -> Bi:
    return [[-x for x in c] for c in A]


def _bi_times_a(A: Bi, a: int | None) -> Bi:
    if a is None:
        return [[]] + [list(c) for c in A]
    return [[a * x for x in c] for c in A]


def _phi_y(i: int, p: int) -> list[int]:
    """Phi_i written in Y = 1 + X."""
    if i == 0:
        return [-1, 1]
    q = p ** (i - 1)
    out = [0] * ((p - 1) * q + 1)
    for j in range(p):
        out[j * q] = 1
    return out


def _omega_over_x_y(n: int, p: int) -> list[int]:
    return [1] * p**n


def _omega_y(n: int, p: int) -> list[int]:
    return [-1] + [0] * (p**n - 1) + [1]


def _mul_phi_y(c: Sequence[int], i: int, p: int) -> list[int]:
    """Multiply a Y-polynomial by Phi_i using shifted copies."""
    if not c:
        return []
    if i == 0:
        return _intpoly.sub(_intpoly.shift(c, 1), c)
    q = p ** (i - 1)
    arr = np.array(c, dtype=object)
    out = np.zeros(len(c) + (p - 1) * q, dtype=object)
    for j in range(p):
        out[j * q:j * q + len(c)] += arr
    return out.tolist()


def _bi_mul_phi(A: Bi, i: int, p: int) -> Bi:
    return [_mul_phi_y(c, i, p) for c in A]


def _bi_mul(A: Bi, B: Bi) -> Bi:
    out: Bi = [[] for _ in range(max(0, len(A) + len(B) - 1))]
    for i, a in enumerate(A):
        if not a:
            continue
        for j, b in enumerate(B):
            if b:
                out[i + j] = _intpoly.add(out[i + j], _intpoly.mul(a, b))
    return out


def _bi_mul_y(A: Bi, c: Sequence[int]) -> Bi:
    return [_intpoly.mul(a, c) for a in A]


def _bi_is_zero(A: Bi) -> bool:
    return not _bi_trim(A)


def _y_to_x(c: Sequence[int]) -> list[int]:
    """Rewrite P(Y) as P(1 + X) by Horner's rule."""
    out: list[int] = []
    for coeff in reversed(list(c)):
        # out <- out * (1 + X) + coeff
        shifted = [0] + out
        out = _intpoly.add(out, shifted)
        if out:
            out[0] += coeff
        else:
            out = [coeff]
    return _intpoly.trim(out)


def _x_to_y(c: Sequence[int]) -> list[int]:
    out: list[int] = []
    for coeff in reversed(list(c)):
        # out <- out * (Y - 1) + coeff
        out = _intpoly.sub([0] + out, out)
        if out:
            out[0] += coeff
        else:
            out = [coeff]
    return _intpoly.trim(out)


def _a_key(a_p: Any) -> int | None:
    if a_p is None or isinstance(a_p, str):
        return None
    if isinstance(a_p, (int, np.integer)):
        return int(a_p)
    raise InputError("exact identities need an integer or symbolic a_p", "a_p")


def _h_chain(n: int, p: int, a: int | None) -> list[list[Bi]]:
    """[H_0, ..., H_n] as 2x2 matrices of (a, Y)-polynomials."""
    H = [[[[1]], []], [[], [[1]]]]
    out = [H]
    for i in range(1, n + 1):
        r1, r2 = H
        new1 = [_bi_add(_bi_times_a(r1[j], a), r2[j]) for j in range(2)]
        new2 = [_bi_neg(_bi_mul_phi(r1[j], i, p)) for j in range(2)]
        H = [[_bi_trim(x) for x in new1], [_bi_trim(x) for x in new2]]
        out.append(H)
    return out


@dataclass
class LogMatrix:
    """H_n for a given prime and a_p.

    ``entries_y`` holds the four entries as (a, Y)-polynomials when a_p is
    an integer or symbolic; ``entries_x`` holds X-variable polynomials over
    a DvrRing when a_p is a ring element.
    """

    p: int
    n: int
    a_p: Any
    entries_y: list[list[Bi]] | None = None
    entries_x: list[list[IwasawaPoly]] | None = None

    def entry(self, i: int, j: int) -> IwasawaPoly:
        if self.entries_x is not None:
            return self.entries_x[i][j]
        if self.a_p is None:
            raise InputError("entries with symbolic a_p have no X-form; use entries_y")
        poly = self.entries_y[i][j]
        return IwasawaPoly(_y_to_x(poly[0]) if poly else [])

    @property
    def sharp(self) -> IwasawaPoly:
        return self.entry(0, 0)

    @property
    def flat(self) -> IwasawaPoly:
        return self.entry(0, 1)

    def det_y(self) -> Bi:
        e = self.entries_y
        return _bi_trim(_bi_add(_bi_mul(e[0][0], e[1][1]), _bi_neg(_bi_mul(e[0][1], e[1][0]))))


def h_matrix(n: int, a_p: Any, p: int) -> LogMatrix:
    """H_n = C_n(X) ... C_1(X), with H_0 the identity."""
    if n < 0:
        raise InputError("n must be nonnegative", "n")
    if isinstance(a_p, DvrElement):
        ring = a_p.ring
        rows = _x_rows(n, p, ring, a_p.coeffs)
        H = [
            [IwasawaPoly(rows[n][0], ring), IwasawaPoly(rows[n][1], ring)],
            [
                -IwasawaPoly(poly_mul_ring(ring, _phi_x(n, ring), rows[n - 1][0]), ring) if n else IwasawaPoly([], ring),
                -IwasawaPoly(poly_mul_ring(ring, _phi_x(n, ring), rows[n - 1][1]), ring) if n else IwasawaPoly([1], ring),
            ],
        ]
        return LogMatrix(p, n, a_p, entries_x=H)
    a = _a_key(a_p)
    return LogMatrix(p, n, a, entries_y=_h_chain(n, p, a)[n])


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    n: int
    p: int
    a_p: Any
    passed: bool


def _chain_cached(n: int, p: int, a_p: Any) -> list[list[list[Bi]]]:
    return _h_chain(n, p, _a_key(a_p))


def verify_det(n: int, a_p: Any, p: int, chain=None) -> IdentityCheck:
    """det H_n = omega_n / X, checked with zero residual."""
    chain = chain or _chain_cached(n, p, a_p)
    H = LogMatrix(p, n, a_p, entries_y=chain[n])
    ok = H.det_y() == [_omega_over_x_y(n, p)]
    return IdentityCheck("det", n, p, a_p, ok)


def verify_wronskian(n: int, a_p: Any, p: int, chain=None) -> IdentityCheck:
    """-H_n^sharp H_{n-1}^flat + H_n^flat H_{n-1}^sharp = omega_{n-1} / X."""
    if n < 1:
        raise InputError("the Wronskian identity needs n >= 1", "n")
    chain = chain or _chain_cached(n, p, a_p)
    (s1, f1), _ = chain[n]
    (s0, f0), _ = chain[n - 1]
    lhs = _bi_trim(_bi_add(_bi_neg(_bi_mul(s1, f0)), _bi_mul(f1, s0)))
    return IdentityCheck("wronskian", n, p, a_p, lhs == [_omega_over_x_y(n - 1, p)])


def verify_col_u_identity(n: int, u: int, a_p: Any, p: int, chain=None) -> IdentityCheck:
    """[1 u] H_n (-X H_{n-1}^flat, X H_{n-1}^sharp)^t = omega_{n-1}."""
    if n < 1:
        raise InputError("the identity needs n >= 1", "n")
    if u % p == 0:
        raise InputError("u must be a unit", "u")
    chain = chain or _chain_cached(n, p, a_p)
    H = chain[n]
    (s0, f0), _ = chain[n - 1]
    x = [-1, 1]
    v1 = _bi_neg(_bi_mul_y(f0, x))
    v2 = _bi_mul_y(s0, x)
    row1 = _bi_add(_bi_mul(H[0][0], v1), _bi_mul(H[0][1], v2))
    row2 = _bi_add(_bi_mul(H[1][0], v1), _bi_mul(H[1][1], v2))
    total = _bi_trim(_bi_add(row1, [[u * c for c in r] for r in row2]))
    return IdentityCheck("col_u", n, p, a_p, total == [_omega_y(n - 1, p)])


def verify_recursion(n: int, a_p: Any, p: int, chain=None) -> IdentityCheck:
    """H_{n+1}^s = a_p H_n^s - Phi_n H_{n-1}^s for both signs (n >= 1)."""
    chain = chain or _chain_cached(n + 1, p, a_p)
    a = _a_key(a_p)
    ok = True
    for s in range(2):
        rhs = _bi_add(_bi_times_a(chain[n][0][s], a), _bi_neg(_bi_mul_phi(chain[n - 1][0][s], n, p)))
        ok = ok and _bi_trim(rhs) == chain[n + 1][0][s]
    return IdentityCheck("recursion", n, p, a_p, ok)


# valuations at eps_n


def _phi_x(i: int, ring: DvrRing) -> np.ndarray:
    coeffs = cyclotomic_eisenstein(ring.p, i)
    out = ring.zeros((len(coeffs),))
    out[:, 0] = ring.array(np.array(coeffs, dtype=object))
    return out


def _x_rows(n: int, p: int, ring: DvrRing, a: np.ndarray) -> list[list[np.ndarray]]:
    """First rows of H_0..H_n in the X-variable over ``ring``."""
    one = ring.zeros((1,))
    one[0] = ring.scalar(1)
    empty = ring.zeros((0,))
    rows = [[one, empty]]
    if n >= 1:
        rows.append([ring.mul(one, a[None, :]), one.copy()])
    for i in range(2, n + 1):
        row = []
        for s in range(2):
            t1 = ring.mul(rows[i - 1][s], a[None, :]) if len(rows[i - 1][s]) else empty
            t2 = poly_mul_ring(ring, _phi_x(i - 1, ring), rows[i - 2][s]) if len(rows[i - 2][s]) else empty
            size = max(len(t1), len(t2))
            acc = ring.zeros((size,))
            acc[: len(t1)] += t1
            acc[: len(t2)] -= t2
            row.append(ring.array(acc))
        rows.append(row)
    return rows


def closed_form_valuation(n: int, sign: str, p: int, r_p: Any) -> Any:
    """The closed-form ord_{eps_n} H_n^sign(eps_n) for n >= 1.

    ``r_p`` = ord_p(a_p), a Fraction, or INF when a_p = 0.
    """
    if n < 1:
        raise InputError("closed forms need n >= 1", "n")
    sign = _sign(sign)
    ph = totient(p, n)
    if n % 2:
        half = (n - 1) // 2
        if sign == SHARP:
            if r_p is INF:
                return INF
            s = Fraction(r_p) + sum((Fraction(1, p ** (2 * k)) for k in range(1, half + 1)), Fraction(0))
        else:
            s = sum((Fraction(1, p ** (2 * k - 1)) for k in range(1, half + 1)), Fraction(0))
    else:
        half = n // 2
        if sign == SHARP:
            s = sum((Fraction(1, p ** (2 * k - 1)) for k in range(1, half + 1)), Fraction(0))
        else:
            if r_p is INF:
                return INF
            s = Fraction(r_p) + sum((Fraction(1, p ** (2 * k)) for k in range(1, half)), Fraction(0))
    return ph * s


@dataclass(frozen=True)
class ValuationComparison:
    """Computed against closed-form ord_{eps_n} H_n^sign(eps_n).

    ``applicable`` is False when the two terms of the recursion tie in
    valuation, in which case ``equal`` is not asserted.
    """

    n: int
    sign: str
    computed: Any
    closed_form: Any
    equal: bool
    applicable: bool


def _ring_for(a_p: Any, p: int | None, precision: int | None) -> tuple[DvrRing, np.ndarray, Any]:
    if isinstance(a_p, DvrElement):
        return a_p.ring, a_p.coeffs, a_p.valuation()
    if p is None:
        raise InputError("p is required for integer a_p", "p")
    a = int(a_p)
    if a == 0:
        r_p = INF
        need = 4
    else:
        v = 0
        while a % p ** (v + 1) == 0:
            v += 1
        r_p = Fraction(v)
        need = v + 4
    ring = DvrRing(p, precision=precision or need)
    return ring, ring.scalar(a), r_p


def _eps_val_or_inf(level: CycLevel, coeffs: np.ndarray) -> Any:
    if len(coeffs) == 0 or not np.any(coeffs):
        return INF
    elem = level.from_poly(coeffs)
    try:
        return eps_valuation(elem)
    except PrecisionExhausted:
        return INF


def h_valuation(
    n: int, sign: str, a_p: Any, p: int | None = None, precision: int | None = None
) -> ValuationComparison:
    """ord_{eps_n} H_n^sign(eps_n) computed directly, next to the closed form."""
    sign = _sign(sign)
    ring, a, r_p = _ring_for(a_p, p, precision)
    p = ring.p
    s = 0 if sign == SHARP else 1
    rows = _x_rows(n, p, ring, a)
    level = CycLevel(p, n, ring)
    computed = _eps_val_or_inf(level, rows[n][s])
    closed = closed_form_valuation(n, sign, p, r_p)
    applicable = True
    if n >= 2:
        t1 = ring.mul(rows[n - 1][s], a[None, :]) if len(rows[n - 1][s]) else rows[n - 1][s]
        t2 = poly_mul_ring(ring, _phi_x(n - 1, ring), rows[n - 2][s]) if len(rows[n - 2][s]) else rows[n - 2][s]
        v1, v2 = _eps_val_or_inf(level, t1), _eps_val_or_inf(level, t2)
        applicable = v1 != v2 or v1 is INF
    return ValuationComparison(n, sign, computed, closed, computed == closed, applicable)


# the algebraic shadow of the Coleman image


@dataclass(frozen=True)
class JvResult:
    member: bool
    certified: bool


def jv_membership(g1: IwasawaPoly, g2: IwasawaPoly, a_p: Any, p: int) -> JvResult:
    """Test (p - 1) g1(0) = (2 - a_p) g2(0)."""
    c1, c2 = g1.coefficient(0), g2.coefficient(0)
    exact = g1.ring is None and g2.ring is None and isinstance(a_p, (int, np.integer))
    if exact:
        return JvResult((p - 1) * c1 == (2 - int(a_p)) * c2, True)
    ring = next(
        (x.ring for x in (g1, g2) if x.ring is not None),
        a_p.ring if isinstance(a_p, DvrElement) else None,
    )
    if ring is None:
        raise InputError("a ring is required for non-integer data")
    diff = ring.element(c1) * (p - 1) - (ring.element(2) - ring.element(a_p)) * ring.element(c2)
    zero = diff.valuation() is INF
    # vanishing at finite precision is a pass with a caveat
    return JvResult(zero, False)


@dataclass(frozen=True)
class MockColemanRow:
    n: int
    col: IwasawaPoly
    second_row: IwasawaPoly
    compatible: bool


def mock_coleman_pair(
    n_max: int, s_sharp: IwasawaPoly, s_flat: IwasawaPoly, a_p: int, p: int
) -> list[MockColemanRow]:
    """Col_n = first row of H_n (s_sharp, s_flat)^t mod omega_n, n = 1..n_max.

    Each row also records whether the second row of the same product agrees
    with -xi_{n-1}(Col_{n-1}) modulo omega_n, where Col_0 = s_sharp mod X.
    """
    a = _a_key(a_p)
    if a is None:
        raise InputError("mock Coleman families need a numeric a_p", "a_p")
    chain = _h_chain(n_max, p, a)
    prev = s_sharp.mod_omega(0, p)
    out = []
    for n in range(1, n_max + 1):
        H = LogMatrix(p, n, a, entries_y=chain[n])
        top = (H.entry(0, 0) * s_sharp + H.entry(0, 1) * s_flat).mod_omega(n, p)
        bottom = (H.entry(1, 0) * s_sharp + H.entry(1, 1) * s_flat).mod_omega(n, p)
        expected = (-norm_lift(prev, n, p)).mod_omega(n, p)
        out.append(MockColemanRow(n, top, bottom, bottom == expected))
        prev = top
    return out
