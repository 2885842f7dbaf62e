"""Logarithms of the local points c_n, d_n and their trace relations.

Everything happens on logarithm values.  With c_0 = eps and
c_n = eps [+] e_n u_1, additivity of ell and f^(k)(e_n) = e_{n-k} give

    ell(c_n) = ell(eps) + sum_{k<n} (x_k u_1) e_{n-k},

a g-vector of elements of L_n.  The points d_n are traces of c_{n+1}
down to the subfield k_n of L_{n+1}, which are computed as Galois sums
inside a fixed ambient level N.

Rational values with p-power denominators are stored scaled by p^S so
that they live in a ring of integers mod p^K.  Reported valuations undo
the scaling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .cyclotomic import CycElement, CycLevel, TowerField, eps_valuation, pi_sequence, totient, trace
from .dvr import INF, DvrRing
from .errors import InputError, PrecisionExhausted
from .formal_group import EulerData, _eye, _inv, vp, xk_sequence

__all__ = [
    "EllValue",
    "QRow",
    "QSystemReport",
    "LocalPointSystem",
    "epsilon_log",
    "ell_of_c",
    "ell_of_d",
    "verify_q_system",
]

Vector = tuple  # of Fractions


def _matvec(m: np.ndarray, v) -> tuple:
    return tuple(sum((Fraction(m[i, j]) * v[j] for j in range(len(v))), Fraction(0)) for i in range(m.shape[0]))


def epsilon_log(E: EulerData) -> Vector:
    """ell(eps) = (1 + p - C_p)^-1 (p u_1), as exact rationals."""
    p, g = E.p, E.g
    m = (1 + p) * _eye(g) - E.C_p
    return _matvec(_inv(m), [Fraction(p * u) for u in E.u1])


@dataclass
class EllValue:
    """A g-vector ell-value.

    ``constant`` and ``terms`` hold the separated form
    constant + sum_m terms[m] e_m when it is known.  ``flat`` holds the
    coordinates as elements of the ambient level, multiplied by
    p^``scale``.
    """

    constant: Vector | None = None
    terms: dict[int, Vector] = field(default_factory=dict)
    flat: list[CycElement] | None = None
    scale: int = 0

    def expand(self, level: CycLevel, scale: int = 0) -> list[CycElement]:
        """Flatten the separated form into ``level``, multiplied by p^scale."""
        if self.constant is None:
            raise InputError("value has no separated form")
        p, ring = level.p, level.base
        factor = Fraction(p**scale)
        out = []
        for i in range(len(self.constant)):
            acc = level.scalar(ring.scalar(self.constant[i] * factor))
            for m, vec in self.terms.items():
                if vec[i]:
                    acc = acc + pi_sequence(m, level) * level.scalar(ring.scalar(vec[i] * factor))
            out.append(acc)
        return out


def ell_of_c(E: EulerData, n: int) -> EllValue:
    """ell(c_n) = ell(eps) + sum_{k=0}^{n-1} (x_k u_1) e_{n-k}."""
    if n < 0:
        raise InputError("n must be nonnegative", "n")
    xs = xk_sequence(E.C_p, max(n - 1, 0), E.p)
    u = [Fraction(c) for c in E.u1]
    terms = {}
    for k in range(n):
        vec = _matvec(xs[k], u)
        if any(vec):
            terms[n - k] = vec
    return EllValue(epsilon_log(E), terms)


def _fraction_vector_valuation(v: Vector, p: int):
    vals = [vp(c, p) for c in v if c]
    return min(vals) if vals else INF


@dataclass
class QRow:
    condition: str
    n: int
    residual_valuation: Any  # Fraction, int or INF
    passed: bool
    note: str = ""

    def to_json(self) -> dict:
        r = self.residual_valuation
        return {
            "condition": self.condition,
            "n": self.n,
            "residual_valuation": "inf" if r is INF else str(r),
            "pass": self.passed,
        }


@dataclass
class QSystemReport:
    rows: list[QRow]
    precision: int
    p: int
    g: int
    nmax: int

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list[QRow]:
        return [r for r in self.rows if not r.passed]

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "g": self.g,
            "nmax": self.nmax,
            "verified_precision": self.precision,
            "rows": [r.to_json() for r in self.rows],
            "pass": self.passed,
        }


class LocalPointSystem:
    """ell(c_n), ell(d_n) inside the ambient level N = nmax + 2."""

    def __init__(self, E: EulerData, nmax: int, precision: int = 6):
        if nmax < 1:
            raise InputError("nmax must be at least 1", "nmax")
        if precision < 1:
            raise InputError("precision must be positive", "precision")
        self.E, self.p, self.g = E, E.p, E.g
        self.nmax = nmax
        self.N = nmax + 2
        self.precision = precision
        xs = xk_sequence(E.C_p, self.N, self.p)
        self.scale = max(xs.denominator_exponent(k) for k in range(self.N + 1))
        self.ring = DvrRing(self.p, precision=self.scale + precision)
        self.level = CycLevel(self.p, self.N, self.ring)
        self._c: dict[int, list[CycElement]] = {}
        self._d: dict[int, list[CycElement]] = {}

    # fields and values

    def L(self, m: int) -> TowerField:
        return TowerField.L(m, self.p, self.N)

    def k(self, m: int) -> TowerField:
        return TowerField.k(m, self.p, self.N)

    def c(self, n: int) -> list[CycElement]:
        if n not in self._c:
            self._c[n] = ell_of_c(self.E, n).expand(self.level, self.scale)
        return self._c[n]

    def d(self, n: int) -> list[CycElement]:
        if n + 1 > self.N:
            raise InputError(f"d_{n} needs level {n + 1} > ambient level {self.N}", "n")
        if n not in self._d:
            self._d[n] = [trace(x, self.L(n + 1), self.k(n)) for x in self.c(n + 1)]
        return self._d[n]

    def tr(self, vec: list[CycElement], frm: TowerField, to: TowerField) -> list[CycElement]:
        return [trace(x, frm, to) for x in vec]

    # linear algebra on scaled vectors

    def apply(self, m: np.ndarray, vec: list[CycElement]) -> list[CycElement]:
        """Multiply by a p-integral rational matrix."""
        ring, level = self.ring, self.level
        out = []
        for i in range(m.shape[0]):
            acc = level.zero()
            for j in range(m.shape[1]):
                c = Fraction(m[i, j])
                if c:
                    acc = acc + vec[j] * level.scalar(ring.scalar(c))
            out.append(acc)
        return out

    def sub(self, a: list[CycElement], b: list[CycElement]) -> list[CycElement]:
        return [x - y for x, y in zip(a, b)]

    def valuation(self, vec: list[CycElement]):
        """p-adic valuation of an unscaled vector (INF when zero at precision)."""
        vals = []
        phi = totient(self.p, self.N)
        for x in vec:
            if x.is_zero():
                continue
            try:
                vals.append(eps_valuation(x) / phi - self.scale)
            except PrecisionExhausted:
                continue
        return min(vals) if vals else INF

    def _row(self, condition: str, n: int, lhs, rhs) -> QRow:
        r = self.valuation(self.sub(lhs, rhs))
        return QRow(condition, n, r, r is INF or r >= self.precision)

    # the checks

    def verify(self) -> QSystemReport:
        E, p, g = self.E, self.p, self.g
        C = E.C_p
        rows = []
        # intermediate identities on the c_n
        rows.append(
            self._row("trace-c", 1, self.tr(self.c(1), self.L(1), self.L(0)), self.apply(C - 2 * _eye(g), self.c(0)))
        )
        for n in range(2, self.N + 1):
            lhs = self.tr(self.c(n), self.L(n), self.L(n - 1))
            rhs = self.sub(self.apply(C, self.c(n - 1)), self.c(n - 2))
            rows.append(self._row("trace-c", n, lhs, rhs))
        # (i): d_0 = (C_p - 2) eps is not in p times the points over Q_p
        d0 = _matvec(C - 2 * _eye(g), epsilon_log(E))
        lattice = 1  # ell maps the points over Q_p onto p Z_p^g
        v0 = _fraction_vector_valuation(d0, p)
        rows.append(QRow("(i)", 0, v0, v0 is not INF and v0 < lattice + 1))
        # (ii)
        corr = C - _inv(C - 2 * _eye(g)) * (p - 1)
        rows.append(self._row("(ii)", 1, self.tr(self.d(1), self.k(1), self.k(0)), self.apply(corr, self.d(0))))
        # (iii)
        for n in range(1, self.nmax + 1):
            lhs = self.tr(self.d(n + 1), self.k(n + 1), self.k(n))
            rhs = self.sub(self.apply(C, self.d(n)), self.d(n - 1))
            rows.append(self._row("(iii)", n, lhs, rhs))
        return QSystemReport(rows, self.precision, p, g, self.nmax)


def ell_of_d(E: EulerData, n: int, precision: int = 6, system: LocalPointSystem | None = None) -> EllValue:
    """ell(d_n) = Tr_{L_{n+1}/k_n} ell(c_{n+1}), in the flattened form."""
    sys_ = system if system is not None else LocalPointSystem(E, max(n, 1), precision)
    return EllValue(flat=sys_.d(n), scale=sys_.scale)


def verify_q_system(E: EulerData, nmax: int = 2, precision: int = 6) -> QSystemReport:
    """Check the trace relations for c_n and conditions (i)-(iii) for d_n."""
    return LocalPointSystem(E, nmax, precision).verify()
