"""Truncated elements of the Iwasawa algebra O[[X]].

An :class:`IwasawaPoly` either has exact integer coefficients (``ring`` is
None), in which case it embeds in O[[X]] for every O, or coefficients in a
:class:`~signed_iwasawa.dvr.DvrRing` at finite precision.  Products are cut
at the degree bound and the cut is recorded in ``truncated``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Any, Sequence

import numpy as np

from . import _intpoly
from .cyclotomic import CycElement, CycLevel, cyclotomic_eisenstein, totient
from .dvr import INF, DvrRing
from .errors import InputError, PrecisionExhausted

__all__ = [
    "IwasawaPoly",
    "CyclotomicFamily",
    "omega",
    "phi",
    "evaluate_at_eps",
    "mu_lambda",
    "norm_lift",
]


def poly_mul_ring(ring: DvrRing, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of polynomials with coefficient arrays of shape (len, d)."""
    m, d = ring.modulus, ring.d
    if len(a) == 0 or len(b) == 0:
        return ring.zeros((0,))
    if d == 1:
        prod = _intpoly.mul_mod([int(c) for c in a[:, 0]], [int(c) for c in b[:, 0]], m)
        out = ring.zeros((len(a) + len(b) - 1,))
        out[: len(prod), 0] = ring.array(np.array(prod, dtype=object))
        return out
    acc = np.zeros((len(a) + len(b) - 1, d), dtype=object)
    for s in range(d):
        for t in range(d):
            conv = _intpoly.mul_mod([int(c) for c in a[:, s]], [int(c) for c in b[:, t]], m)
            if conv:
                conv = np.array(conv, dtype=object)
                acc[: len(conv)] += conv[:, None] * ring.T[s, t][None, :]
    return ring.array(acc)


class IwasawaPoly:
    """A polynomial standing for an element of O[[X]] truncated at a degree bound.

    Parameters
    ----------
    coeffs : lowest degree first; ints/Fractions for exact mode, or an
        array of shape (len, d) / list of DvrElements when ``ring`` is set.
    ring : coefficient ring, or None for exact integers.
    degree_bound : products are truncated to degree < bound (None: no bound).
    truncated : set when some product dropped terms.
    """

    __slots__ = ("coeffs", "ring", "degree_bound", "truncated")

    def __init__(
        self,
        coeffs: Any,
        ring: DvrRing | None = None,
        degree_bound: int | None = None,
        truncated: bool = False,
    ):
        self.ring = ring
        self.degree_bound = degree_bound
        self.truncated = truncated
        if ring is None:
            c = _intpoly.trim(int(x) for x in coeffs)
        else:
            arr = np.asarray(coeffs, dtype=object)
            if arr.ndim == 1:
                arr = np.stack([ring._coerce(x) for x in arr]) if len(arr) else ring.zeros((0,))
            c = ring.array(arr)
            nz = np.nonzero(np.any(c != 0, axis=1))[0]
            c = c[: nz[-1] + 1] if len(nz) else c[:0]
        if degree_bound is not None and len(c) > degree_bound:
            raise InputError(f"degree {len(c) - 1} exceeds the degree bound {degree_bound}")
        self.coeffs = c

    # construction

    @classmethod
    def monomial(cls, k: int, ring: DvrRing | None = None, degree_bound: int | None = None):
        return cls([0] * k + [1], ring, degree_bound)

    def over(self, ring: DvrRing) -> "IwasawaPoly":
        """Reduce an exact polynomial into ``ring``."""
        if self.ring is not None:
            if self.ring != ring:
                raise InputError("polynomial already lives over a different ring")
            return self
        arr = ring.zeros((len(self.coeffs),))
        arr[:, 0] = ring.array(np.array(self.coeffs, dtype=object)) if self.coeffs else arr[:, 0]
        return IwasawaPoly(arr, ring, self.degree_bound, self.truncated)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    def _coerce(self, other) -> "IwasawaPoly":
        if isinstance(other, IwasawaPoly):
            a, b = self, other
            if a.ring is None and b.ring is not None:
                a = a.over(b.ring)
            elif b.ring is None and a.ring is not None:
                b = b.over(a.ring)
            elif a.ring != b.ring:
                raise InputError("coefficient rings differ")
            return b
        return IwasawaPoly([other], None).over(self.ring) if self.ring else IwasawaPoly([other])

    def _lift(self, other) -> "IwasawaPoly":
        if self.ring is None and isinstance(other, IwasawaPoly) and other.ring is not None:
            return self.over(other.ring)
        return self

    def _bound(self, other: "IwasawaPoly") -> int | None:
        bounds = [b for b in (self.degree_bound, other.degree_bound) if b is not None]
        return min(bounds) if bounds else None

    def _make(self, coeffs, other, truncated=False) -> "IwasawaPoly":
        bound = self._bound(other)
        flag = truncated or self.truncated or other.truncated
        ring = self.ring
        if bound is not None and len(coeffs) > bound:
            tail = coeffs[bound:]
            dropped = any(tail) if ring is None else bool(np.any(np.asarray(tail) != 0))
            coeffs = coeffs[:bound]
            flag = flag or dropped
        return IwasawaPoly(coeffs, ring, bound, flag)

    def __add__(self, other):
        s = self._lift(other)
        o = s._coerce(other)
        if s.ring is None:
            return s._make(_intpoly.add(s.coeffs, o.coeffs), o)
        n = max(len(s.coeffs), len(o.coeffs))
        acc = s.ring.zeros((n,))
        acc[: len(s.coeffs)] += s.coeffs
        acc[: len(o.coeffs)] += o.coeffs
        return s._make(s.ring.array(acc), o)

    __radd__ = __add__

    def __neg__(self):
        if self.ring is None:
            return IwasawaPoly([-c for c in self.coeffs], None, self.degree_bound, self.truncated)
        return IwasawaPoly(-self.coeffs, self.ring, self.degree_bound, self.truncated)

    def __sub__(self, other):
        return self + (-self._coerce(other) if not isinstance(other, IwasawaPoly) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        s = self._lift(other)
        o = s._coerce(other)
        if s.ring is None:
            return s._make(_intpoly.mul(s.coeffs, o.coeffs), o)
        return s._make(poly_mul_ring(s.ring, s.coeffs, o.coeffs), o)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, IwasawaPoly):
            other = self._coerce(other)
        diff = self - other
        return diff.is_zero()

    def __hash__(self):
        if self.ring is None:
            return hash(tuple(self.coeffs))
        return hash(tuple(int(c) for c in self.coeffs.ravel()))

    def coefficient(self, k: int):
        if k >= len(self.coeffs):
            return 0 if self.ring is None else self.ring.element(0)
        if self.ring is None:
            return self.coeffs[k]
        return self.ring.element(self.coeffs[k])

    def divmod_monic(self, m: "IwasawaPoly") -> tuple["IwasawaPoly", "IwasawaPoly"]:
        """Division by a monic polynomial with integer coefficients."""
        if m.ring is not None:
            raise InputError("divisor must have exact integer coefficients")
        if self.ring is None:
            q, r = _intpoly.divmod_monic(self.coeffs, m.coeffs)
            return IwasawaPoly(q), IwasawaPoly(r, None, self.degree_bound, self.truncated)
        qs, rs = [], []
        for s in range(self.ring.d):
            q, r = _intpoly.divmod_monic([int(c) for c in self.coeffs[:, s]], m.coeffs, self.ring.modulus)
            qs.append(q)
            rs.append(r)
        q = np.array(qs, dtype=object).T if qs and qs[0] else self.ring.zeros((0,))
        r = np.array(rs, dtype=object).T if rs and rs[0] else self.ring.zeros((0,))
        return (
            IwasawaPoly(q, self.ring),
            IwasawaPoly(r, self.ring, self.degree_bound, self.truncated),
        )

    def mod_omega(self, n: int, p: int) -> "IwasawaPoly":
        return self.divmod_monic(omega(n, p))[1]

    def __repr__(self):
        if self.ring is None:
            return f"IwasawaPoly({self.coeffs})"
        return f"IwasawaPoly({[list(map(int, r)) for r in self.coeffs]}, ring={self.ring!r})"


@lru_cache(maxsize=None)
def _omega_coeffs(n: int, p: int) -> tuple[int, ...]:
    q = p**n
    return tuple([0] + [comb(q, i) for i in range(1, q + 1)])


def omega(n: int, p: int, degree_bound: int | None = None) -> IwasawaPoly:
    """omega_n = (1 + X)^(p^n) - 1."""
    if n < 0:
        raise InputError("n must be nonnegative", "n")
    if degree_bound is not None and p**n >= degree_bound:
        raise InputError(f"omega_{n} does not fit under degree bound {degree_bound}")
    return IwasawaPoly(_omega_coeffs(n, p), None, degree_bound)


def phi(n: int, p: int, degree_bound: int | None = None) -> IwasawaPoly:
    """Phi_n = omega_n / omega_{n-1} (Phi_0 = X)."""
    if n < 0:
        raise InputError("n must be nonnegative", "n")
    coeffs = cyclotomic_eisenstein(p, n)
    if degree_bound is not None and len(coeffs) > degree_bound:
        raise InputError(f"Phi_{n} does not fit under degree bound {degree_bound}")
    return IwasawaPoly(coeffs, None, degree_bound)


class CyclotomicFamily:
    """Accessors for omega_n and Phi_n at a fixed prime."""

    def __init__(self, p: int, degree_bound: int | None = None):
        self.p = p
        self.degree_bound = degree_bound

    def omega(self, n: int) -> IwasawaPoly:
        return omega(n, self.p, self.degree_bound)

    def phi(self, n: int) -> IwasawaPoly:
        return phi(n, self.p, self.degree_bound)


def evaluate_at_eps(
    F: IwasawaPoly, n: int, p: int | None = None, level: CycLevel | None = None, precision: int = 20
) -> CycElement:
    """F(eps_n) in O[eps_n]."""
    if n < 1:
        raise InputError("evaluation needs n >= 1", "n")
    if level is None:
        ring = F.ring
        if ring is None:
            if p is None:
                raise InputError("p is required for exact polynomials")
            ring = DvrRing(p, precision=precision)
        level = CycLevel(ring.p, n, ring)
    if level.n != n:
        raise InputError("level does not match n")
    G = F.over(level.base) if F.ring is None else F
    if G.is_zero():
        return level.zero()
    return level.from_poly(G.coeffs)


def mu_lambda(F: IwasawaPoly, ring: DvrRing | int | None = None) -> tuple[Fraction, int]:
    """Iwasawa invariants from the coefficient valuations.

    mu is the least p-normalized coefficient valuation and lambda the
    first index attaining it.  Exact polynomials need ``ring`` (a ring or
    just the prime p).
    """
    if F.ring is None:
        if not F.coeffs:
            raise PrecisionExhausted("zero series has no mu/lambda")
        if ring is None:
            raise InputError("a ring or prime is required for exact polynomials")
        if isinstance(ring, int):
            ring = DvrRing(ring, precision=max(20, max(abs(c) for c in F.coeffs).bit_length()))
        F = F.over(ring)
    vals = F.ring.val_pi(F.coeffs) if len(F.coeffs) else np.array([], dtype=int)
    known = [int(v) for v in vals]
    finite = [v for v in known if v < F.ring.precision]
    if not finite:
        raise PrecisionExhausted("series is indistinguishable from zero")
    best = min(finite)
    if F.truncated and best > 0:
        raise PrecisionExhausted("precision insufficient to certify mu: tail was truncated")
    return Fraction(best, F.ring.e), known.index(best)


def norm_lift(F: IwasawaPoly, n: int, p: int) -> IwasawaPoly:
    """xi_{n-1}: Lambda/omega_{n-1} -> Lambda/omega_n, F -> Phi_n * F."""
    if n < 1:
        raise InputError("norm_lift needs n >= 1", "n")
    reduced = F.mod_omega(n - 1, p)
    return (phi(n, p) * reduced).mod_omega(n, p)
