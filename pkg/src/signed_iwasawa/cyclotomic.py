"""The cyclotomic tower Q_p = L_0 ⊂ L_1 ⊂ ... with L_n = Q_p(mu_{p^n}).

Level-n elements are polynomials of degree < phi(p^n) in eps_n = zeta - 1,
with coefficients in a base :class:`~signed_iwasawa.dvr.DvrRing`, reduced
modulo the Eisenstein polynomial Phi_n(1 + X).

Subfields of a fixed ambient level N are never given their own
representation.  A :class:`TowerField` is just the subgroup of (Z/p^N)^x
fixing it, and membership is a Galois-invariance test.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Any, Sequence

import numpy as np

from . import _intpoly
from .dvr import DvrRing, INF, smith_normal_form
from .errors import InputError, NotInField, PrecisionExhausted

__all__ = [
    "CycLevel",
    "CycElement",
    "TowerField",
    "cyclotomic_eisenstein",
    "pi_sequence",
    "galois_apply",
    "trace",
    "eps_valuation",
    "embed",
    "totient",
]


def totient(p: int, n: int) -> int:
    """phi(p^n), with the convention phi(1) = 1 for the degree of L_0."""
    return 1 if n == 0 else (p - 1) * p ** (n - 1)


@lru_cache(maxsize=None)
def cyclotomic_eisenstein(p: int, n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n(1 + X) (for n = 0 this is X)."""
    if n == 0:
        return (0, 1)
    q = p ** (n - 1)
    out = [0] * ((p - 1) * q + 1)
    for k in range(p):
        for i in range(k * q + 1):
            out[i] += comb(k * q, i)
    return tuple(out)


class CycLevel:
    """The ring O[eps_n] = O[X]/(Phi_n(1+X)) at a fixed level n."""

    def __init__(self, p: int, n: int, base: DvrRing | None = None):
        if n < 0:
            raise InputError("level must be nonnegative", "n")
        self.base = base if base is not None else DvrRing(p, precision=20)
        if self.base.p != p:
            raise InputError("base ring has a different residue characteristic", "p")
        self.p, self.n = p, n
        self.phi = totient(p, n)
        self.modpoly = list(cyclotomic_eisenstein(p, n))
        self._to_zeta = None
        self._to_eps = None

    def __repr__(self):
        return f"CycLevel(p={self.p}, n={self.n}, base={self.base!r})"

    def __eq__(self, other):
        return isinstance(other, CycLevel) and (self.p, self.n, self.base) == (
            other.p,
            other.n,
            other.base,
        )

    def __hash__(self):
        return hash((self.p, self.n, self.base))

    @property
    def modulus(self) -> int:
        return self.base.modulus

    # conversions between the eps-basis and the zeta-basis

    def _basis_changes(self):
        if self._to_zeta is None:
            m, phi = self.modulus, self.phi
            # machine integers are safe when a full dot product fits
            dtype = np.int64 if (m - 1) ** 2 * phi < 2**62 else object
            if self.n == 0:
                to_zeta = np.array([[1]], dtype=object)
                to_eps = np.array([[1]], dtype=object)
            else:
                # (Z - 1)^i = sum_j C(i, j) (-1)^(i-j) Z^j and Z^j = sum_i C(j, i) X^i
                to_zeta = np.array(
                    [[comb(i, j) * (-1) ** (i - j) % m for i in range(phi)] for j in range(phi)],
                    dtype=object,
                )
                to_eps = np.array(
                    [[comb(j, i) % m for j in range(phi)] for i in range(phi)], dtype=object
                )
            self._to_zeta, self._to_eps = to_zeta.astype(dtype), to_eps.astype(dtype)
        return self._to_zeta, self._to_eps

    def to_zeta(self, coeffs: np.ndarray) -> np.ndarray:
        to_zeta, _ = self._basis_changes()
        return to_zeta.dot(np.asarray(coeffs).astype(to_zeta.dtype)) % self.modulus

    def from_zeta(self, coeffs: np.ndarray) -> np.ndarray:
        _, to_eps = self._basis_changes()
        return self.base.array(to_eps.dot(np.asarray(coeffs).astype(to_eps.dtype) % self.modulus))

    def reduce_zeta(self, coeffs: np.ndarray) -> np.ndarray:
        """Reduce a zeta-basis vector of length p^n modulo Phi_{p^n}(Z)."""
        if self.n == 0:
            return np.asarray(coeffs, dtype=object)[:1].sum(axis=0, keepdims=True) % self.modulus
        q, phi = self.p ** (self.n - 1), self.phi
        h = np.array(coeffs)
        top = h[phi:].copy()
        h = h[:phi]
        # Z^((p-1)q + r) = -sum_{k<p-1} Z^(kq + r)
        for k in range(self.p - 1):
            h[k * q:(k + 1) * q] -= top
        return h % self.modulus

    # elements

    def element(self, coeffs: Any) -> "CycElement":
        """Element from eps-basis coefficients (ints or base-ring arrays)."""
        arr = np.asarray(coeffs, dtype=object)
        if arr.ndim == 1:
            arr = np.stack([self.base.scalar(int(c) if not isinstance(c, Fraction) else c) for c in arr]) if len(arr) else self.base.zeros((0,))
        if arr.shape[0] > self.phi:
            return self.from_poly(arr)
        out = self.base.zeros((self.phi,))
        out[: arr.shape[0]] = self.base.array(arr)
        return CycElement(self, out)

    def from_poly(self, coeffs: Any) -> "CycElement":
        """Evaluate a polynomial with base-ring coefficients at eps_n."""
        arr = np.asarray(coeffs, dtype=object)
        if arr.ndim == 1:
            arr = np.stack([self.base.scalar(c) for c in arr])
        arr = self.base.array(arr)
        comps = []
        for s in range(self.base.d):
            _, rem = _intpoly.divmod_monic([int(c) for c in arr[:, s]], self.modpoly, self.modulus)
            comps.append(rem)
        return CycElement(self, self.base.array(np.array(comps, dtype=object).T))

    def scalar(self, c: Any) -> "CycElement":
        out = self.base.zeros((self.phi,))
        out[0] = self.base._coerce(c)
        return CycElement(self, out)

    def zero(self) -> "CycElement":
        return CycElement(self, self.base.zeros((self.phi,)))

    def one(self) -> "CycElement":
        return self.scalar(1)

    def eps(self) -> "CycElement":
        """eps_n = zeta_{p^n} - 1 (zero at level 0)."""
        if self.n == 0:
            return self.zero()
        return self.element([0, 1])

    def zeta(self) -> "CycElement":
        return self.eps() + self.one()

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        base, m = self.base, self.modulus
        d = base.d
        if d == 1:
            prod = _intpoly.mul_mod([int(c) for c in a[:, 0]], [int(c) for c in b[:, 0]], m)
            _, rem = _intpoly.divmod_monic(prod, self.modpoly, m)
            return base.array(np.array(rem, dtype=object).reshape(-1, 1))
        acc = np.zeros((2 * self.phi - 1, d), dtype=object)
        for s in range(d):
            for t in range(d):
                conv = _intpoly.mul_mod([int(c) for c in a[:, s]], [int(c) for c in b[:, t]], m)
                if not conv:
                    continue
                conv = np.array(conv, dtype=object)
                acc[: len(conv)] += conv[:, None] * base.T[s, t][None, :]
        comps = []
        for s in range(d):
            _, rem = _intpoly.divmod_monic([int(c) for c in acc[:, s]], self.modpoly, m)
            comps.append(rem)
        return base.array(np.array(comps, dtype=object).T)

    def galois_image(self, a: int, coeffs: np.ndarray) -> np.ndarray:
        """eps-basis coefficients of zeta -> zeta^a applied to ``coeffs``."""
        if self.n == 0:
            return coeffs
        pn = self.p**self.n
        g = self.to_zeta(coeffs)
        h = np.zeros((pn,) + g.shape[1:], dtype=g.dtype)
        h[(a * np.arange(self.phi)) % pn] = g
        return self.from_zeta(self.reduce_zeta(h))


class CycElement:
    """An element of O[eps_n] held as eps-basis coefficients."""

    __slots__ = ("level", "coeffs")

    def __init__(self, level: CycLevel, coeffs: np.ndarray):
        self.level = level
        self.coeffs = coeffs

    @property
    def n(self) -> int:
        return self.level.n

    def _other(self, other) -> "CycElement":
        if isinstance(other, CycElement):
            if other.level != self.level:
                raise InputError("elements live at different levels; embed first")
            return other
        return self.level.scalar(other)

    def __add__(self, other):
        o = self._other(other)
        return CycElement(self.level, self.level.base.array(self.coeffs + o.coeffs))

    __radd__ = __add__

    def __neg__(self):
        return CycElement(self.level, self.level.base.array(-self.coeffs))

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = self.level.base.scalar(other)
            return CycElement(self.level, self.level.base.mul(self.coeffs, c[None, :]))
        o = self._other(other)
        return CycElement(self.level, self.level.mul(self.coeffs, o.coeffs))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = self.level.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        try:
            o = self._other(other)
        except InputError:
            return NotImplemented
        return not np.any(self.level.base.array(self.coeffs - o.coeffs))

    def __hash__(self):
        return hash((self.level, tuple(int(c) for c in self.coeffs.ravel())))

    def is_zero(self) -> bool:
        return not np.any(self.coeffs % self.level.modulus)

    def galois(self, a: int) -> "CycElement":
        return galois_apply(a, self)

    def __repr__(self):
        return f"CycElement(level={self.n}, coeffs={[list(map(int, r)) for r in self.coeffs]})"


def _as_level(level_or_n: Any, p: int | None = None, base: DvrRing | None = None) -> CycLevel:
    if isinstance(level_or_n, CycLevel):
        return level_or_n
    if p is None:
        raise InputError("p is required to build a level")
    return CycLevel(p, int(level_or_n), base)


def embed(x: CycElement, level: CycLevel | int) -> CycElement:
    """Image of ``x`` under L_m -> L_n, with eps_m = (1 + eps_n)^(p^(n-m)) - 1."""
    src = x.level
    dst = level if isinstance(level, CycLevel) else CycLevel(src.p, level, src.base)
    if dst.n < src.n:
        raise InputError("can only embed into a higher level")
    if dst.base != src.base:
        raise InputError("levels use different base rings")
    if dst.n == src.n:
        return x
    g = src.to_zeta(x.coeffs)
    step = src.p ** (dst.n - src.n)
    h = np.zeros((dst.phi,) + g.shape[1:], dtype=object)
    for j in range(g.shape[0]):
        h[j * step] += g[j]
    return CycElement(dst, dst.from_zeta(h))


def pi_sequence(n: int, level: CycLevel | None = None, p: int | None = None) -> CycElement:
    """e_n = zeta_{p^n} - 1, placed in ``level`` (default: level n itself).

    The sequence is compatible: (1 + e_n)^p - 1 = e_{n-1}.
    """
    if n < 0:
        raise InputError("n must be nonnegative", "n")
    if level is None:
        if p is None:
            raise InputError("p or a level is required")
        level = CycLevel(p, n)
    if n > level.n:
        raise InputError("ambient level is below n")
    own = CycLevel(level.p, n, level.base)
    return embed(own.eps(), level)


def galois_apply(a: int, x: CycElement) -> CycElement:
    """The automorphism zeta -> zeta^a."""
    p = x.level.p
    if a % p == 0:
        raise InputError(f"Galois index {a} is divisible by p", "a")
    return CycElement(x.level, x.level.galois_image(a % max(p ** x.level.n, 1), x.coeffs))


@dataclass(frozen=True)
class TowerField:
    """A subfield of L_N described by its fixing subgroup in (Z/p^N)^x.

    ``kind`` is "L" for L_m = Q_p(mu_{p^m}) and "k" for the degree-p^m
    layer k_m inside L_{m+1}.
    """

    kind: str
    m: int
    p: int
    N: int
    subgroup: frozenset = field(compare=False, repr=False)

    @staticmethod
    def L(m: int, p: int, N: int) -> "TowerField":
        if not 0 <= m <= N:
            raise InputError("L_m needs 0 <= m <= N", "m")
        pN, pm = p**N, p**m
        H = frozenset(a for a in range(1, pN) if a % p and a % pm == 1 % pm)
        return TowerField("L", m, p, N, H)

    @staticmethod
    def k(m: int, p: int, N: int) -> "TowerField":
        if not 0 <= m < N:
            raise InputError("k_m needs 0 <= m < N", "m")
        pN, q = p**N, p ** (m + 1)
        H = frozenset(a for a in range(1, pN) if a % p and pow(a, p - 1, q) == 1)
        return TowerField("k", m, p, N, H)

    @property
    def degree(self) -> int:
        return totient(self.p, self.N) // len(self.subgroup)

    def generators(self) -> list[int]:
        """A small generating set of the fixing subgroup."""
        pN = self.p**self.N
        gens: list[int] = []
        span = {1 % pN}
        for a in sorted(self.subgroup, key=lambda a: (a != (1 + self.p) % pN, a)):
            if a in span:
                continue
            gens.append(a)
            frontier = list(span)
            while frontier:
                nxt = []
                for s in frontier:
                    t = s * a % pN
                    if t not in span:
                        span.add(t)
                        nxt.append(t)
                    for g in gens:
                        t = s * g % pN
                        if t not in span:
                            span.add(t)
                            nxt.append(t)
                frontier = nxt
        return gens

    def contains(self, x: CycElement) -> bool:
        return all(galois_apply(a, x) == x for a in self.generators())

    def __str__(self):
        return f"{self.kind}_{self.m}"


def coset_representatives(big: frozenset, small: frozenset, pN: int) -> list[int]:
    """Representatives of big/small, smallest element of each coset."""
    reps, seen = [], set()
    for a in sorted(big):
        if a in seen:
            continue
        reps.append(a)
        seen.update(a * h % pN for h in small)
    return reps


def trace(x: CycElement, frm: TowerField, to: TowerField, check: bool = True) -> CycElement:
    """Tr_{frm/to}(x) as a Galois sum over coset representatives."""
    if x.level.n != frm.N or to.N != frm.N:
        raise InputError("fields must share the ambient level of x")
    if not frm.subgroup <= to.subgroup:
        raise InputError(f"{to} is not contained in {frm}")
    if check and not frm.contains(x):
        raise NotInField(f"element is not in {frm}")
    pN = x.level.p ** x.level.n
    acc = x.level.zero()
    for a in coset_representatives(to.subgroup, frm.subgroup, pN):
        acc = acc + galois_apply(a, x)
    if check and not to.contains(acc):
        raise NotInField(f"trace is not in {to}")
    return acc


def _eps_terms(x: CycElement) -> list[Fraction | Any]:
    base = x.level.base
    vals = base.val_pi(x.coeffs)
    phi = x.level.phi
    out = []
    for i, v in enumerate(vals):
        v = int(v)
        out.append(INF if v >= base.precision else Fraction(phi * v, base.e) + i)
    return out


def eps_valuation(x: CycElement, n: int | None = None) -> Fraction:
    """ord_{eps_n}(x) = phi(p^n) * ord_p(x), with ord_p(p) = 1.

    ``n`` defaults to the level of ``x``.  The value is read from the
    eps-basis when one term strictly dominates, which always happens over
    an unramified base.  Otherwise it falls back on the norm down to the
    base ring, computed as the valuation of a determinant.
    """
    level = x.level
    target = level.n if n is None else n
    terms = _eps_terms(x)
    finite = [t for t in terms if t is not INF]
    if not finite:
        raise PrecisionExhausted("element is indistinguishable from zero")
    best = min(finite)
    phi = level.phi
    horizon = phi * Fraction(level.base.precision, level.base.e)
    if finite.count(best) == 1 and best < horizon:
        value = best
    else:
        value = _norm_valuation(x)
    return value * totient(level.p, target) / phi


def _norm_valuation(x: CycElement) -> Fraction:
    level, base = x.level, x.level.base
    phi = level.phi
    cols = []
    basis = np.zeros((phi, phi), dtype=object)
    for k in range(phi):
        basis[k, k] = 1
        e_k = level.element(basis[k])
        cols.append((x * e_k).coeffs)
    mat = np.stack(cols, axis=1)
    snf = smith_normal_form(mat, base, transforms=False, nonsingular=True)
    return sum(snf.divisors.valuations, Fraction(0))
