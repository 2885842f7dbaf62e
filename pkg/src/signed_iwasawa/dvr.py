"""Finite-precision arithmetic in rings of integers of p-adic fields.

A ring is presented as a two-step tower: the unramified ring W = Z_p[t]/(u)
with u monic of degree f and irreducible mod p, and then O = W[pi]/(E)
with E Eisenstein of degree e over W.  Elements are coefficient vectors in
the basis ``t^j pi^i`` (index ``i*f + j``) with entries in Z/p^K.

Valuations are normalized so that ord(p) = 1; internally they are kept as
integers counted in units of ord(pi) = 1/e.

Vectorized routines accept arrays of shape ``(..., d)`` with ``d = e*f``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Any, Iterable, Sequence

import numpy as np
import sympy

from .errors import InputError, NotFinite, PrecisionExhausted

__all__ = [
    "INF",
    "DvrRing",
    "DvrElement",
    "ElementaryDivisors",
    "SmithForm",
    "make_ring",
    "valuation",
    "smith_normal_form",
    "finite_module_length",
]


@total_ordering
class _Infinity:
    """Valuation of an element that is zero at the working precision."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __hash__(self):
        return hash("signed_iwasawa.INF")

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"


INF = _Infinity()


def _vp_int(x: int, p: int, cap: int) -> int:
    if x == 0:
        return cap
    v = 0
    while x % p == 0 and v < cap:
        x //= p
        v += 1
    return v


def _solve_mod_p(mat: list[list[int]], rhs: list[int], p: int) -> list[int]:
    """Solve a square linear system over F_p by Gaussian elimination."""
    n = len(mat)
    a = [[mat[i][j] % p for j in range(n)] + [rhs[i] % p] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            raise ZeroDivisionError("matrix is singular mod p")
        a[col], a[piv] = a[piv], a[col]
        inv = pow(a[col][col], -1, p)
        a[col] = [x * inv % p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                c = a[r][col]
                a[r] = [(x - c * y) % p for x, y in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def _poly_mulmod(a: Sequence[int], b: Sequence[int], m: Sequence[int]) -> list[int]:
    """Product of integer polynomials reduced modulo the monic ``m``."""
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    deg = len(m) - 1
    for k in range(len(out) - 1, deg - 1, -1):
        c = out[k]
        if c:
            for i in range(deg):
                out[k - deg + i] -= c * m[i]
            out[k] = 0
    out = out[:deg] + [0] * max(0, deg - len(out))
    return out


def _first_irreducible(p: int, f: int) -> list[int]:
    x = sympy.symbols("x")
    for n in range(p**f):
        low = [(n // p**i) % p for i in range(f)]
        if sympy.Poly(list(reversed(low + [1])), x, modulus=p).is_irreducible:
            return low + [1]
    raise InputError(f"no irreducible polynomial of degree {f} mod {p}")


class DvrRing:
    """The ring of integers O of a finite extension of Q_p, mod pi^N.

    Parameters
    ----------
    p : odd prime
    e, f : ramification index and residue degree
    unramified : monic integer polynomial of degree f, lowest term first,
        irreducible mod p.  Defaults to the first such polynomial found.
    eisenstein : monic polynomial of degree e over W, lowest term first;
        each coefficient is an int or a list of f ints (a W-element).
        Defaults to ``X - p``.
    precision : N, so that elements are known modulo pi^N.

    One guard p-adic digit is carried on top of N so that division by
    non-integral powers of pi never eats into the certified digits.
    """

    def __init__(
        self,
        p: int,
        e: int = 1,
        f: int = 1,
        unramified: Sequence[int] | None = None,
        eisenstein: Sequence[Any] | None = None,
        precision: int = 20,
    ):
        if not isinstance(p, int) or p == 2 or not sympy.isprime(p):
            raise InputError(f"p must be an odd prime, got {p!r}", "p")
        if e < 1 or f < 1:
            raise InputError("e and f must be positive", "e")
        if precision < 1:
            raise InputError("precision must be at least 1", "precision")
        self.p, self.e, self.f, self.d = p, e, f, e * f
        self.precision = precision
        self.K = -(-precision // e) + 1
        self.modulus = p**self.K

        if unramified is None:
            unramified = [0, 1] if f == 1 else _first_irreducible(p, f)
        unramified = [int(c) for c in unramified]
        if len(unramified) != f + 1 or unramified[-1] != 1:
            raise InputError("unramified polynomial must be monic of degree f", "unramified")
        x = sympy.symbols("x")
        if f > 1 and not sympy.Poly(list(reversed(unramified)), x, modulus=p).is_irreducible:
            raise InputError("unramified polynomial is reducible mod p", "unramified")
        self.unramified = tuple(unramified)

        if eisenstein is None:
            eisenstein = [-p] + [0] * (e - 1) + [1] if e == 1 else None
            if eisenstein is None:
                raise InputError("an Eisenstein polynomial is required when e > 1", "eisenstein")
        eis = [self._as_w(c) for c in eisenstein]
        if len(eis) != e + 1 or eis[-1] != [1] + [0] * (f - 1):
            raise InputError("Eisenstein polynomial must be monic of degree e", "eisenstein")
        for c in eis[:-1]:
            if any(x % p for x in c):
                raise InputError("non-leading Eisenstein coefficients must be divisible by p", "eisenstein")
        if all((x // p) % p == 0 for x in eis[0]):
            raise InputError("Eisenstein constant term must have valuation exactly 1", "eisenstein")
        self.eisenstein = tuple(tuple(c) for c in eis)

        self.T = self._structure_tensor()
        big = self.d * self.d * (self.modulus - 1) ** 2
        self.dtype = np.int64 if big < 2**62 else object
        self._T = self.T.astype(self.dtype)
        self.zero_val = e * self.K
        # pi^e = p * w with w a unit; cache w^{-1} for division by pi
        w = [0] * self.d
        for i in range(e):
            for j in range(f):
                w[i * f + j] = -eis[i][j] // p
        self._w_inv = self.unit_inverse(self.array(w))

    # construction helpers

    def _as_w(self, c: Any) -> list[int]:
        if isinstance(c, (int, np.integer)):
            return [int(c)] + [0] * (self.f - 1)
        c = [int(x) for x in c]
        if len(c) > self.f:
            raise InputError("W-coefficient longer than f", "eisenstein")
        return c + [0] * (self.f - len(c))

    def _structure_tensor(self) -> np.ndarray:
        e, f, d = self.e, self.f, self.d
        T = np.zeros((d, d, d), dtype=object)
        for a in range(d):
            i1, j1 = divmod(a, f)
            for b in range(d):
                i2, j2 = divmod(b, f)
                tpoly = [0] * (j1 + j2) + [1]
                w = (tpoly + [0] * f)[:f] if j1 + j2 < f else _poly_mulmod(tpoly, [1], self.unramified)
                # element w * pi^(i1+i2), then reduce pi-degree
                coeffs = [[0] * f for _ in range(2 * e)]
                coeffs[i1 + i2] = list(w)
                for s in range(2 * e - 1, e - 1, -1):
                    ws = coeffs[s]
                    if any(ws):
                        for i in range(e):
                            prod = _poly_mulmod(ws, self.eisenstein[i], self.unramified) if f > 1 else [ws[0] * self.eisenstein[i][0]]
                            for j in range(f):
                                coeffs[s - e + i][j] -= prod[j]
                        coeffs[s] = [0] * f
                for i in range(e):
                    for j in range(f):
                        T[a, b, i * f + j] = coeffs[i][j]
        return T % self.modulus

    def __repr__(self):
        return f"DvrRing(p={self.p}, e={self.e}, f={self.f}, precision={self.precision})"

    def __eq__(self, other):
        return isinstance(other, DvrRing) and (
            self.p, self.e, self.f, self.unramified, self.eisenstein, self.precision
        ) == (other.p, other.e, other.f, other.unramified, other.eisenstein, other.precision)

    def __hash__(self):
        return hash((self.p, self.e, self.f, self.unramified, self.eisenstein, self.precision))

    # array-level arithmetic

    def array(self, values: Any) -> np.ndarray:
        return (np.asarray(values, dtype=object) % self.modulus).astype(self.dtype)

    def zeros(self, shape: tuple[int, ...] = ()) -> np.ndarray:
        return np.zeros(tuple(shape) + (self.d,), dtype=self.dtype)

    def scalar(self, c: int | Fraction) -> np.ndarray:
        """Embed an integer or p-integral rational."""
        out = self.zeros()
        if isinstance(c, Fraction):
            if c.denominator % self.p == 0:
                raise InputError(f"{c} is not p-integral")
            out[0] = c.numerator * pow(c.denominator, -1, self.modulus) % self.modulus
        else:
            out[0] = int(c) % self.modulus
        return out

    def identity(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i, 0] = 1
        return out

    def pi(self) -> np.ndarray:
        out = self.zeros()
        if self.e == 1:
            out[0] = self.p
        else:
            out[self.f] = 1
        return out

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.d == 1:
            return (a * b) % self.modulus
        outer = (a[..., :, None] * b[..., None, :]) % self.modulus
        return np.tensordot(outer, self._T, axes=([-2, -1], [0, 1])) % self.modulus

    def matmul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        prod = self.mul(A[:, :, None, :], B[None, :, :, :])
        return prod.sum(axis=1) % self.modulus

    def mul_matrix(self, a: np.ndarray) -> list[list[int]]:
        """Integer matrix of multiplication by ``a`` on the basis."""
        cols = [self.mul(a, self.array(np.eye(self.d, dtype=int)[k])) for k in range(self.d)]
        return [[int(cols[k][r]) for k in range(self.d)] for r in range(self.d)]

    def val_pi(self, a: np.ndarray) -> np.ndarray:
        """Valuations in units of 1/e; ``zero_val`` marks zero at precision."""
        a = np.asarray(a)
        p, e, f, K = self.p, self.e, self.f, self.K
        v = np.zeros(a.shape, dtype=np.int64)
        q = 1
        for _ in range(K):
            q *= p
            v += (a % q == 0)
        vw = v.reshape(a.shape[:-1] + (e, f)).min(axis=-1)
        out = (vw * e + np.arange(e)).min(axis=-1)
        return np.minimum(out, self.zero_val)

    def unit_inverse(self, a: np.ndarray) -> np.ndarray:
        a = self.array(a)
        if self.d == 1:
            if int(a[0]) % self.p == 0:
                raise ZeroDivisionError("not a unit")
            return self.array([pow(int(a[0]), -1, self.modulus)])
        rhs = [1] + [0] * (self.d - 1)
        x = self.array(_solve_mod_p(self.mul_matrix(a), rhs, self.p))
        two = self.scalar(2)
        prec = 1
        while prec < self.K:
            x = self.mul(x, (two - self.mul(a, x)) % self.modulus)
            prec *= 2
        return x

    def shift_down(self, a: np.ndarray, v: int) -> np.ndarray:
        """Divide by pi^v, assuming every entry is divisible by it."""
        if v == 0:
            return a
        q, b = divmod(v, self.e)
        if b == 0:
            num = self.mul(a, self._w_inv_power(q))
            return num // self.p**q
        # a / pi^v = a * pi^(e-b) * w^-(q+1) / p^(q+1)
        factor = self.mul(self._pi_power(self.e - b), self._w_inv_power(q + 1))
        return self.mul(a, factor) // self.p ** (q + 1)

    def _pi_power(self, k: int) -> np.ndarray:
        out = self.scalar(1)
        for _ in range(k):
            out = self.mul(out, self.pi())
        return out

    def _w_inv_power(self, k: int) -> np.ndarray:
        out = self.scalar(1)
        if self.e == 1:
            # pi = p, so w = 1 and the shift is a plain p-power division
            return out
        for _ in range(k):
            out = self.mul(out, self._w_inv)
        return out

    def div_exact(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """``a / b`` for a single nonzero ``b`` dividing every entry of ``a``."""
        vb = int(self.val_pi(b))
        if vb >= self.zero_val:
            raise ZeroDivisionError("division by zero at working precision")
        unit = self.shift_down(b, vb)
        return self.mul(self.shift_down(a, vb), self.unit_inverse(unit))

    def element(self, value: Any) -> "DvrElement":
        return DvrElement(self, self._coerce(value))

    def _coerce(self, value: Any) -> np.ndarray:
        if isinstance(value, DvrElement):
            return value.coeffs
        if isinstance(value, (int, np.integer, Fraction)):
            return self.scalar(value if isinstance(value, Fraction) else int(value))
        arr = np.asarray(value, dtype=object)
        if arr.shape == (self.d,):
            return self.array(arr)
        raise InputError(f"cannot coerce {value!r} into {self}")

    def matrix(self, rows: Iterable[Iterable[Any]]) -> np.ndarray:
        rows = [list(r) for r in rows]
        m, n = len(rows), len(rows[0]) if rows else 0
        out = self.zeros((m, n))
        for i, r in enumerate(rows):
            if len(r) != n:
                raise InputError("ragged matrix")
            for j, x in enumerate(r):
                out[i, j] = self._coerce(x)
        return out

    @property
    def gen(self) -> "DvrElement":
        return DvrElement(self, self.pi())

    @property
    def one(self) -> "DvrElement":
        return DvrElement(self, self.scalar(1))


class DvrElement:
    """An element of a :class:`DvrRing` known modulo pi^prec."""

    __slots__ = ("ring", "coeffs", "prec")

    def __init__(self, ring: DvrRing, coeffs: np.ndarray, prec: int | None = None):
        self.ring = ring
        self.coeffs = ring.array(coeffs)
        self.prec = ring.precision if prec is None else min(prec, ring.precision)

    def _other(self, other):
        if isinstance(other, DvrElement):
            return other
        return DvrElement(self.ring, self.ring._coerce(other))

    def _vpi(self) -> int:
        return min(int(self.ring.val_pi(self.coeffs)), self.prec)

    def __add__(self, other):
        o = self._other(other)
        return DvrElement(self.ring, self.coeffs + o.coeffs, min(self.prec, o.prec))

    __radd__ = __add__

    def __neg__(self):
        return DvrElement(self.ring, -self.coeffs, self.prec)

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        o = self._other(other)
        prec = min(self.prec + o._vpi(), o.prec + self._vpi())
        return DvrElement(self.ring, self.ring.mul(self.coeffs, o.coeffs), prec)

    __rmul__ = __mul__

    def __eq__(self, other):
        try:
            o = self._other(other)
        except InputError:
            return NotImplemented
        return (self - o).valuation() is INF

    def __hash__(self):
        return hash(tuple(int(c) for c in self.coeffs))

    def valuation(self):
        v = self._vpi()
        return INF if v >= self.prec else Fraction(v, self.ring.e)

    def is_unit(self) -> bool:
        return self._vpi() == 0

    def inverse(self) -> "DvrElement":
        if not self.is_unit():
            raise ZeroDivisionError("only units are invertible in O")
        return DvrElement(self.ring, self.ring.unit_inverse(self.coeffs), self.prec)

    def __truediv__(self, other):
        o = self._other(other)
        vb = o._vpi()
        if vb >= o.prec:
            raise ZeroDivisionError("division by zero at working precision")
        if self._vpi() < vb:
            raise ArithmeticError("quotient is not integral")
        q = self.ring.div_exact(self.coeffs, o.coeffs)
        return DvrElement(self.ring, q, min(self.prec, o.prec) - vb)

    def __repr__(self):
        return f"DvrElement({[int(c) for c in self.coeffs]}, prec={self.prec})"


def make_ring(p: int, e: int = 1, f: int = 1, defining: Any = None, precision: int = 20) -> DvrRing:
    """Build a ring from ``(p, e, f)`` and optional defining data.

    ``defining`` may be None, an Eisenstein polynomial (when e > 1), an
    unramified polynomial (when f > 1 and e = 1), or a dict with keys
    ``"unramified"`` and ``"eisenstein"``.
    """
    unram = eis = None
    if isinstance(defining, dict):
        unram, eis = defining.get("unramified"), defining.get("eisenstein")
    elif defining is not None:
        if e > 1:
            eis = defining
        else:
            unram = defining
    return DvrRing(p, e, f, unramified=unram, eisenstein=eis, precision=precision)


def valuation(x: DvrElement):
    """p-normalized valuation of ``x`` as a Fraction, or INF."""
    return x.valuation()


@dataclass(frozen=True)
class ElementaryDivisors:
    """Valuations of the nonzero diagonal entries of a Smith form.

    ``rank_deficiency`` is the rank of the free part of the cokernel.
    """

    valuations: tuple[Fraction, ...]
    rank_deficiency: int
    p: int
    e: int
    f: int

    @property
    def length(self) -> int:
        """Length over O of the torsion part of the cokernel."""
        return int(self.e * sum(self.valuations, Fraction(0)))

    def cardinality(self) -> int:
        return self.p ** (self.f * self.length)


@dataclass(frozen=True)
class SmithForm:
    """Smith form ``U @ M @ V = diag`` with certificates."""

    divisors: ElementaryDivisors
    diagonal: np.ndarray
    U: np.ndarray | None
    V: np.ndarray | None
    rank: int
    precision: int


def smith_normal_form(
    M: Any,
    ring: DvrRing | None = None,
    transforms: bool = True,
    nonsingular: bool = False,
) -> SmithForm:
    """Smith normal form over O by minimum-valuation pivoting.

    ``M`` is an array of shape ``(m, n, d)`` or a nested list of entries.
    Pivots whose valuation reaches the ring precision are treated as zero;
    with ``nonsingular=True`` that situation raises PrecisionExhausted.
    """
    if ring is None:
        if isinstance(M, (list, tuple)) and M and isinstance(M[0][0], DvrElement):
            ring = M[0][0].ring
        else:
            raise InputError("a ring is required for raw matrices")
    A = M.copy() if isinstance(M, np.ndarray) else ring.matrix(M)
    A = ring.array(A)
    m, n = A.shape[0], A.shape[1]
    U = ring.identity(m) if transforms else None
    V = ring.identity(n) if transforms else None
    cap = ring.precision
    pivots: list[int] = []
    for k in range(min(m, n)):
        vals = ring.val_pi(A[k:, k:])
        i, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
        v = int(vals[i, j])
        if v >= cap:
            break
        i, j = i + k, j + k
        if i != k:
            A[[k, i]] = A[[i, k]]
            if transforms:
                U[[k, i]] = U[[i, k]]
        if j != k:
            A[:, [k, j]] = A[:, [j, k]]
            if transforms:
                V[:, [k, j]] = V[:, [j, k]]
        piv = A[k, k].copy()
        if k + 1 < m:
            q = ring.div_exact(A[k + 1:, k], piv)
            A[k + 1:, k:] = (A[k + 1:, k:] - ring.mul(q[:, None, :], A[k, k:][None, :, :])) % ring.modulus
            if transforms:
                U[k + 1:] = (U[k + 1:] - ring.mul(q[:, None, :], U[k][None, :, :])) % ring.modulus
        if k + 1 < n:
            q = ring.div_exact(A[k, k + 1:], piv)
            A[k, k + 1:] = 0
            if transforms:
                V[:, k + 1:] = (V[:, k + 1:] - ring.mul(V[:, k][:, None, :], q[None, :, :])) % ring.modulus
        pivots.append(v)
    r = len(pivots)
    if nonsingular and r < min(m, n):
        raise PrecisionExhausted(
            f"pivot {r} is indistinguishable from zero at precision pi^{cap}"
        )
    divisors = ElementaryDivisors(
        tuple(Fraction(v, ring.e) for v in pivots), m - r, ring.p, ring.e, ring.f
    )
    diag = np.array([A[k, k] for k in range(r)]).reshape(r, ring.d)
    return SmithForm(divisors, diag, U, V, r, cap)


def finite_module_length(M: Any, ring: DvrRing | None = None) -> int:
    """Length over O of the cokernel of ``M`` (columns are relations)."""
    snf = smith_normal_form(M, ring, transforms=False)
    if snf.divisors.rank_deficiency:
        raise NotFinite(
            f"cokernel has free rank {snf.divisors.rank_deficiency} at working precision"
        )
    return snf.divisors.length
