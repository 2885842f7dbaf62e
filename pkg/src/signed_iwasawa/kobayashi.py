"""Kobayashi ranks of projective systems of modules over O.

A module is presented as O^m modulo the column span of a relation matrix
R (shape ``(m, k, d)`` in the ring's array layout, k may be 0).  A
transition pi_n : M_n -> M_{n-1} is a matrix on generators.  For

    nabla M_n = len(ker pi_n) - len(coker pi_n) + rank M_{n-1}

the cokernel is read off the Smith form of [R_{n-1} | P], and the kernel
is the lattice {x : P x in span R_{n-1}} modulo span R_n, whose length is
a difference of torsion lengths of two lattices with the same
saturation.

The analytic side is e * ord_{eps_n} F(eps_n) for the quotients
O[X]/(F, omega_n), which :func:`nabla_oracle` recomputes from scratch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cyclotomic import CycLevel, eps_valuation
from .dvr import DvrRing, smith_normal_form
from .errors import InputError, NotExact, PrecisionExhausted
from .iwasawa import IwasawaPoly, evaluate_at_eps, mu_lambda

__all__ = [
    "ProjectiveSystem",
    "NablaResult",
    "AsymptoticRow",
    "AsymptoticTable",
    "AdditivityReport",
    "nabla_direct",
    "nabla_char_series",
    "nabla_oracle",
    "nabla_asymptotic",
    "nabla_additivity_check",
    "char_series_system",
    "multiplication_matrix",
    "direct_sum",
]


def _hcat(ring: DvrRing, *mats: np.ndarray) -> np.ndarray:
    rows = mats[0].shape[0]
    parts = [ring.array(m).reshape(rows, -1, ring.d) for m in mats]
    return np.concatenate(parts, axis=1) if parts else ring.zeros((rows, 0))


def _invariants(ring: DvrRing, R: np.ndarray) -> tuple[int, int, tuple[Fraction, ...]]:
    """(rank of the span, torsion length of O^m / span, divisor valuations)."""
    if R.shape[1] == 0 or R.shape[0] == 0:
        return 0, 0, ()
    snf = smith_normal_form(R, ring, transforms=False)
    return snf.rank, snf.divisors.length, snf.divisors.valuations


def _kernel_lattice(ring: DvrRing, P: np.ndarray, R1: np.ndarray) -> np.ndarray:
    """Generators of {x in O^m : P x lies in the span of R1}."""
    m = P.shape[1]
    A = _hcat(ring, P, (-ring.array(R1)) % ring.modulus) if R1.shape[1] else ring.array(P)
    if A.shape[0] == 0:
        return ring.identity(m)
    snf = smith_normal_form(A, ring)
    return snf.V[:m, snf.rank:]


@dataclass
class ProjectiveSystem:
    """Modules M_n = O^{m_n} / span(relations[n]) with maps pi_n: M_n -> M_{n-1}."""

    ring: DvrRing
    relations: dict[int, np.ndarray]
    transitions: dict[int, np.ndarray] = field(default_factory=dict)

    def generators(self, n: int) -> int:
        return self.relations[n].shape[0]

    def rank(self, n: int) -> int:
        r, _, _ = _invariants(self.ring, self.relations[n])
        return self.generators(n) - r

    def length(self, n: int) -> int:
        """Length of the torsion part of M_n."""
        return _invariants(self.ring, self.relations[n])[1]

    def check(self, n: int):
        if n not in self.relations or n - 1 not in self.relations or n not in self.transitions:
            raise InputError(f"system has no data for the transition at level {n}", "n")
        P = self.transitions[n]
        if P.shape[:2] != (self.generators(n - 1), self.generators(n)):
            raise InputError(f"transition at level {n} has the wrong shape", "transitions")


@dataclass
class NablaResult:
    n: int
    defined: bool
    value: int | None
    ker_length: int | None = None
    coker_length: int | None = None
    lower_rank: int | None = None
    certified: bool = True
    reason: str = ""


def nabla_direct(S: ProjectiveSystem, n: int) -> NablaResult:
    """The Kobayashi rank straight from the definition."""
    S.check(n)
    ring = S.ring
    R, R1, P = ring.array(S.relations[n]), ring.array(S.relations[n - 1]), ring.array(S.transitions[n])
    m1 = S.generators(n - 1)
    lower_rank = S.rank(n - 1)
    # cokernel
    r_c, len_c, vals_c = _invariants(ring, _hcat(ring, R1, P))
    if r_c < m1:
        return NablaResult(n, False, None, lower_rank=lower_rank, reason="cokernel is infinite")
    # kernel
    L = _kernel_lattice(ring, P, R1)
    r_L, len_L, vals_L = _invariants(ring, L)
    r_R, len_R, vals_R = _invariants(ring, R)
    if r_L != r_R:
        return NablaResult(n, False, None, coker_length=len_c, lower_rank=lower_rank, reason="kernel is infinite")
    len_k = len_R - len_L
    pivots = vals_c + vals_L + vals_R
    certified = all(ring.e * v < ring.precision // 2 for v in pivots)
    return NablaResult(n, True, len_k - len_c + lower_rank, len_k, len_c, lower_rank, certified)


# the quotients O[X]/(F, omega_n)


def _omega_tail(k: int, p: int) -> list[int]:
    """Coefficients c_j with X^(p^k) = -sum_j c_j X^j modulo omega_k."""
    from math import comb

    q = p**k
    return [0] + [comb(q, j) for j in range(1, q)]


def _shift_reduce(ring: DvrRing, col: np.ndarray, tail: list[int]) -> np.ndarray:
    q = len(tail)
    out = ring.zeros((q,))
    out[1:] = col[:-1]
    top = col[-1]
    if np.any(top):
        for j, c in enumerate(tail):
            if c:
                out[j] = out[j] - top * c
    return ring.array(out)


def multiplication_matrix(G: IwasawaPoly, k: int, ring: DvrRing) -> np.ndarray:
    """Matrix of multiplication by G on O[X]/omega_k in the basis X^i."""
    p = ring.p
    q = p**k
    G = G.over(ring) if G.ring is None else G
    red = G.mod_omega(k, p)
    col = ring.zeros((q,))
    coeffs = ring.array(red.coeffs) if len(red.coeffs) else ring.zeros((0,))
    col[: min(q, len(coeffs))] = coeffs[:q]
    tail = _omega_tail(k, p)
    out = ring.zeros((q, q))
    for i in range(q):
        out[:, i] = col
        if i + 1 < q:
            col = _shift_reduce(ring, col, tail)
    return out


def _projection_matrix(k: int, ring: DvrRing) -> np.ndarray:
    """O[X]/omega_k -> O[X]/omega_{k-1} in the monomial bases."""
    p = ring.p
    q, q1 = p**k, p ** (k - 1)
    tail = _omega_tail(k - 1, p)
    out = ring.zeros((q1, q))
    col = ring.zeros((q1,))
    col[0] = ring.scalar(1)
    for i in range(q):
        out[:, i] = col
        col = _shift_reduce(ring, col, tail)
    return out


def char_series_system(F: IwasawaPoly, levels, ring: DvrRing) -> ProjectiveSystem:
    """N_k = O[X]/(F, omega_k) at the given levels with the natural projections."""
    levels = sorted(set(levels))
    rel = {k: multiplication_matrix(F, k, ring) for k in levels}
    trans = {k: _projection_matrix(k, ring) for k in levels if k >= 1 and k - 1 in rel}
    return ProjectiveSystem(ring, rel, trans)


def direct_sum(A: ProjectiveSystem, B: ProjectiveSystem) -> ProjectiveSystem:
    ring = A.ring

    def block(x, y):
        out = ring.zeros((x.shape[0] + y.shape[0], x.shape[1] + y.shape[1]))
        out[: x.shape[0], : x.shape[1]] = x
        out[x.shape[0]:, x.shape[1]:] = y
        return out

    rel = {k: block(A.relations[k], B.relations[k]) for k in A.relations if k in B.relations}
    trans = {k: block(A.transitions[k], B.transitions[k]) for k in A.transitions if k in B.transitions}
    return ProjectiveSystem(ring, rel, trans)


def _as_ring_poly(F: IwasawaPoly, ring: DvrRing | int | None, precision: int) -> tuple[IwasawaPoly, DvrRing]:
    if isinstance(ring, int):
        ring = DvrRing(ring, precision=precision)
    if ring is None:
        if F.ring is None:
            raise InputError("a ring or prime is required for exact polynomials")
        ring = F.ring
    return (F.over(ring) if F.ring is None else F), ring


def nabla_char_series(F: IwasawaPoly, n: int, ring: DvrRing | int | None = None, precision: int = 48) -> NablaResult:
    """e * ord_{eps_n} F(eps_n)."""
    G, ring = _as_ring_poly(F, ring, precision)
    value = evaluate_at_eps(G, n, level=CycLevel(ring.p, n, ring))
    if value.is_zero():
        return NablaResult(n, False, None, reason="F(eps_n) is indistinguishable from zero")
    try:
        v = ring.e * eps_valuation(value)
    except PrecisionExhausted as exc:
        return NablaResult(n, False, None, certified=False, reason=str(exc))
    if v.denominator != 1:
        raise ArithmeticError(f"e * ord_eps(F(eps_{n})) = {v} is not an integer")
    return NablaResult(n, True, int(v))


def nabla_oracle(F: IwasawaPoly, n: int, ring: DvrRing | int | None = None, precision: int = 48) -> NablaResult:
    """The definition applied to O[X]/(F, omega_n) -> O[X]/(F, omega_{n-1})."""
    if n < 1:
        raise InputError("n must be at least 1", "n")
    G, ring = _as_ring_poly(F, ring, precision)
    return nabla_direct(char_series_system(G, [n - 1, n], ring), n)


@dataclass
class AsymptoticRow:
    n: int
    analytic: int | None
    predicted: Fraction
    agree: bool


@dataclass
class AsymptoticTable:
    mu: Fraction
    lam: int
    e: int
    rows: list[AsymptoticRow]
    threshold: int | None

    def to_json(self) -> list[dict]:
        return [
            {"n": r.n, "analytic": r.analytic, "predicted": str(r.predicted), "agree": r.agree}
            for r in self.rows
        ]


def nabla_asymptotic(
    F: IwasawaPoly, nmin: int, nmax: int, ring: DvrRing | int | None = None, precision: int = 48
) -> AsymptoticTable:
    """Compare e ord_{eps_n} F(eps_n) with e lambda + phi(p^n) mu over a range of n.

    The threshold is the first n from which every later row agrees, and
    it is only declared once two consecutive rows agree.
    """
    G, ring = _as_ring_poly(F, ring, precision)
    mu, lam = mu_lambda(G)
    # mu_lambda counts lambda in coefficient positions, mu in p-units
    p, e = ring.p, ring.e
    rows = []
    for n in range(nmin, nmax + 1):
        res = nabla_char_series(G, n, ring)
        pred = e * lam + (p**n - p ** (n - 1)) * e * mu
        rows.append(AsymptoticRow(n, res.value, pred, res.defined and res.value == pred))
    threshold = None
    for i in range(len(rows) - 1):
        if all(r.agree for r in rows[i:]):
            threshold = rows[i].n
            break
    return AsymptoticTable(mu, lam, e, rows, threshold)


# additivity along short exact sequences


def _lattice_contains(ring, big: np.ndarray, small: np.ndarray) -> bool:
    if small.shape[1] == 0:
        return True
    joined = _hcat(ring, big, small) if big.shape[1] else ring.array(small)
    return _invariants(ring, big)[:2] == _invariants(ring, joined)[:2]


def _check_exact(Sp: ProjectiveSystem, S: ProjectiveSystem, Spp: ProjectiveSystem, i: np.ndarray, s: np.ndarray, n: int):
    ring = S.ring
    Rp, R, Rpp = Sp.relations[n], S.relations[n], Spp.relations[n]
    m, mpp = S.generators(n), Spp.generators(n)
    i, s = ring.array(i), ring.array(s)
    if i.shape[:2] != (m, Sp.generators(n)) or s.shape[:2] != (mpp, m):
        raise InputError(f"maps at level {n} have the wrong shape", "maps")
    # well defined: relations go to relations
    if not _lattice_contains(ring, R, ring.matmul(i, Rp)) or not _lattice_contains(ring, Rpp, ring.matmul(s, R)):
        raise NotExact(f"maps at level {n} do not respect the relations")
    # s o i = 0
    if not _lattice_contains(ring, Rpp, ring.matmul(s, i)):
        raise NotExact(f"s o i is nonzero at level {n}")
    # i injective: preimage of span R is span R'
    L = _kernel_lattice(ring, i, R)
    if _invariants(ring, L)[:2] != _invariants(ring, Rp)[:2] or not _lattice_contains(ring, L, Rp):
        raise NotExact(f"i is not injective at level {n}")
    # s surjective
    r, length, _ = _invariants(ring, _hcat(ring, Rpp, s) if Rpp.shape[1] else s)
    if r < mpp or length:
        raise NotExact(f"s is not surjective at level {n}")
    # M / i(M') has the invariants of M''
    quot = _invariants(ring, _hcat(ring, R, i) if R.shape[1] else i)
    rank_q = m - quot[0]
    target = _invariants(ring, Rpp)
    if rank_q != mpp - target[0] or sorted(v for v in quot[2] if v) != sorted(v for v in target[2] if v):
        raise NotExact(f"the sequence is not exact in the middle at level {n}")


@dataclass
class AdditivityReport:
    rows: list[tuple[int, int | None, int | None, int | None, bool]]

    @property
    def passed(self) -> bool:
        return all(r[4] for r in self.rows)


def nabla_additivity_check(
    Sp: ProjectiveSystem,
    S: ProjectiveSystem,
    Spp: ProjectiveSystem,
    inj: dict[int, np.ndarray],
    surj: dict[int, np.ndarray],
    levels,
) -> AdditivityReport:
    """nabla M_n = nabla M'_n + nabla M''_n along level-wise exact sequences."""
    rows = []
    for n in levels:
        for k in (n - 1, n):
            _check_exact(Sp, S, Spp, inj[k], surj[k], k)
        a, b, c = nabla_direct(Sp, n), nabla_direct(S, n), nabla_direct(Spp, n)
        ok = a.defined and b.defined and c.defined and b.value == a.value + c.value
        rows.append((n, a.value, b.value, c.value, ok))
    return AdditivityReport(rows)
