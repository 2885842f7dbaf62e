"""Honda theory for g-dimensional formal groups of GL2-type.

Matrices are g x g numpy object arrays of ints or Fractions.  A logarithm
in separated form is an array ``coeffs`` of shape (D + 1, g, g): the i-th
coordinate is sum_n sum_j coeffs[n, i, j] * x_j^n.

Two logarithms are built from the same Euler data:

* log_A(x) = sum_n (C_n / n) x^n from the Dirichlet coefficients, and
* l(x) = sum_k x_k f^(k)(x) with f(X) = (1 + X)^p - 1 and the matrices
  x_k solving p x_k - C_p x_{k-1} + x_{k-2} = 0.

The second sum is infinite.  Its truncation after K terms is correct
coefficientwise modulo p^c where c is reported as ``certified``: when
C_p = 0 mod p the k-th term at degree j has valuation at least
ceil(k/2) - v_p(j).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Any, Mapping

import numpy as np
import sympy

from .errors import InputError, PrecisionExhausted

__all__ = [
    "EulerData",
    "MatrixSeq",
    "SeparatedSeries",
    "MultiSeries",
    "HondaType",
    "HondaReport",
    "GroupLaw",
    "dirichlet_coeffs",
    "log_A",
    "xk_sequence",
    "lubin_tate_f",
    "lubin_tate_iterate",
    "ell_series",
    "honda_check",
    "group_law",
    "check_associativity",
    "compositional_inverse",
    "strong_isomorphism",
    "vp",
]


def vp(x: Fraction | int, p: int):
    """p-adic valuation of a rational; None for zero."""
    x = Fraction(x)
    if x == 0:
        return None
    v, num, den = 0, x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def _mat(rows: Any, g: int | None = None, field_name: str = "matrix") -> np.ndarray:
    try:
        arr = np.array([[Fraction(x) for x in r] for r in rows], dtype=object)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{field_name} must be an integer matrix", field_name) from exc
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or (g is not None and arr.shape[0] != g):
        raise InputError(f"{field_name} must be a {g}x{g} matrix", field_name)
    return arr


def _eye(g: int) -> np.ndarray:
    out = np.empty((g, g), dtype=object)
    for i in range(g):
        for j in range(g):
            out[i, j] = Fraction(int(i == j))
    return out


def _zeros(g: int) -> np.ndarray:
    return _eye(g) * 0


def _inv(m: np.ndarray) -> np.ndarray:
    inv = sympy.Matrix(m.tolist()).inv()
    return np.array([[Fraction(int(sympy.fraction(x)[0]), int(sympy.fraction(x)[1])) for x in row] for row in inv.tolist()], dtype=object)


def _is_nilpotent_mod_p(m: np.ndarray, p: int) -> bool:
    g = m.shape[0]
    red = np.array([[int(x) % p for x in r] for r in m], dtype=object)
    power = red.copy()
    for _ in range(g - 1):
        power = power.dot(red) % p
    return not np.any(power % p)


@dataclass
class EulerData:
    """Euler factors I - C_q q^-s + E_q q^(1-2s) at finitely many primes.

    ``factors`` maps q to (C_q, E_q).  E_q is the matrix the JSON format
    calls "Cq2"; when omitted it defaults to I, or to 0 for primes listed
    in ``bad_primes``.  The distinguished prime p must be present.
    """

    g: int
    p: int
    factors: dict[int, tuple[np.ndarray, np.ndarray]]
    bad_primes: frozenset = frozenset()
    u1: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.p == 2 or not sympy.isprime(self.p):
            raise InputError("p must be an odd prime", "p")
        if self.p not in self.factors:
            raise InputError("the distinguished prime p needs explicit Euler data", "euler_factors")
        mats = [m for pair in self.factors.values() for m in pair]
        for a in mats:
            for b in mats:
                if np.any(a.dot(b) - b.dot(a)):
                    raise InputError("Euler data matrices must commute", "euler_factors")
        if not _is_nilpotent_mod_p(self.C_p, self.p):
            raise InputError("C_p must be nilpotent mod p (supersingular at p)", "euler_factors")
        if self.u1 is None:
            self.u1 = (1,) * self.g
        if len(self.u1) != self.g:
            raise InputError("u1 must have length g", "u1")

    @property
    def C_p(self) -> np.ndarray:
        return self.factors[self.p][0]

    @property
    def E_p(self) -> np.ndarray:
        return self.factors[self.p][1]

    @classmethod
    def from_json(cls, doc: Mapping[str, Any] | str) -> "EulerData":
        if isinstance(doc, str):
            try:
                doc = json.loads(doc)
            except json.JSONDecodeError as exc:
                raise InputError(f"malformed JSON: {exc}") from exc
        if not isinstance(doc, Mapping):
            raise InputError("config must be a JSON object")
        for key in ("g", "p", "euler_factors"):
            if key not in doc:
                raise InputError(f"missing field '{key}'", key)
        g, p = doc["g"], doc["p"]
        if not isinstance(g, int) or g < 1:
            raise InputError("g must be a positive integer", "g")
        if not isinstance(p, int):
            raise InputError("p must be an integer", "p")
        bad = frozenset(int(q) for q in doc.get("bad_primes", []))
        factors = {}
        entries = doc["euler_factors"]
        if not isinstance(entries, list):
            raise InputError("euler_factors must be a list", "euler_factors")
        for k, entry in enumerate(entries):
            if not isinstance(entry, Mapping) or "q" not in entry or "Cq" not in entry:
                raise InputError(f"euler_factors[{k}] needs 'q' and 'Cq'", f"euler_factors[{k}]")
            q = int(entry["q"])
            cq = _mat(entry["Cq"], g, f"euler_factors[{k}].Cq")
            if "Cq2" in entry:
                eq = _mat(entry["Cq2"], g, f"euler_factors[{k}].Cq2")
            else:
                eq = _zeros(g) if q in bad else _eye(g)
            factors[q] = (cq, eq)
        u1 = tuple(int(x) for x in doc["u1"]) if "u1" in doc else None
        return cls(g, p, factors, bad, u1)


def dirichlet_coeffs(E: EulerData, N: int) -> dict[int, np.ndarray]:
    """C_n for 1 <= n <= N from the Euler product."""
    g = E.g
    prime_powers: dict[int, list[np.ndarray]] = {}
    out = {1: _eye(g)}
    for n in range(2, N + 1):
        fac = sympy.factorint(n)
        acc = _eye(g)
        for q, k in fac.items():
            if q not in E.factors:
                raise InputError(f"missing Euler factor for q = {q}", "euler_factors")
            seq = prime_powers.setdefault(q, [_eye(g), E.factors[q][0]])
            cq, eq = E.factors[q]
            while len(seq) <= k:
                j = len(seq) - 1
                seq.append(cq.dot(seq[j]) - q * eq.dot(seq[j - 1]))
            acc = acc.dot(seq[k])
        out[n] = acc
    return out


@dataclass
class SeparatedSeries:
    """A g-vector of power series, each a sum of one-variable series.

    ``certified`` is the p-adic precision to which the coefficients are
    exact (None: exact rationals).
    """

    coeffs: np.ndarray  # (D + 1, g, g) of Fractions
    p: int
    certified: int | None = None

    @property
    def g(self) -> int:
        return self.coeffs.shape[1]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def linear(self) -> np.ndarray:
        return self.coeffs[1]

    def to_multi(self, nvars: int | None = None, offset: int = 0, D: int | None = None) -> list["MultiSeries"]:
        """The g coordinates as multivariate series in variables offset..offset+g-1."""
        g = self.g
        nvars = nvars or g
        D = self.degree if D is None else min(D, self.degree)
        out = []
        for i in range(g):
            terms = {}
            for n in range(1, D + 1):
                for j in range(g):
                    c = self.coeffs[n, i, j]
                    if c:
                        e = [0] * nvars
                        e[offset + j] = n
                        terms[tuple(e)] = Fraction(c)
            out.append(MultiSeries(terms, nvars, D))
        return out


def log_A(E: EulerData, D: int) -> SeparatedSeries:
    """sum_{n <= D} (C_n / n) x^n."""
    if D < 1:
        raise InputError("degree must be at least 1", "degree")
    C = dirichlet_coeffs(E, D)
    coeffs = np.empty((D + 1, E.g, E.g), dtype=object)
    coeffs[0] = _zeros(E.g)
    for n in range(1, D + 1):
        coeffs[n] = C[n] / n
    return SeparatedSeries(coeffs, E.p)


@dataclass
class MatrixSeq:
    """x_0, ..., x_K for p x_k - C_p x_{k-1} + x_{k-2} = 0, x_{-1} = 0, x_0 = I."""

    p: int
    C_p: np.ndarray
    terms: list[np.ndarray]

    def __getitem__(self, k: int) -> np.ndarray:
        return self.terms[k]

    def __len__(self):
        return len(self.terms)

    def residual(self, k: int) -> np.ndarray:
        prev2 = self.terms[k - 2] if k >= 2 else _zeros(self.C_p.shape[0])
        return self.p * self.terms[k] - self.C_p.dot(self.terms[k - 1]) + prev2

    def denominator_exponent(self, k: int) -> int:
        """Least t with p^t x_k integral."""
        vals = [vp(x, self.p) for x in self.terms[k].ravel()]
        return max([0] + [-v for v in vals if v is not None])


def xk_sequence(C_p: Any, K: int, p: int) -> MatrixSeq:
    C = _mat(C_p) if not isinstance(C_p, np.ndarray) else C_p
    g = C.shape[0]
    terms = [_eye(g)]
    prev = _zeros(g)
    for _ in range(K):
        nxt = (C.dot(terms[-1]) - prev) / p
        prev = terms[-1]
        terms.append(nxt)
    return MatrixSeq(p, C, terms)


def lubin_tate_f(p: int) -> list[int]:
    """f(X) = pX + sum_{i=2}^p C(p, i) X^i = (1 + X)^p - 1."""
    return [0, p] + [comb(p, i) for i in range(2, p + 1)]


def lubin_tate_iterate(p: int, k: int) -> list[int]:
    """f^(k) = f o ... o f, which equals (1 + X)^(p^k) - 1."""
    if k == 0:
        return [0, 1]
    q = p**k
    return [0] + [comb(q, i) for i in range(1, q + 1)]


def _certified_precision(K: int, D: int, p: int) -> int:
    logD = 0
    while p ** (logD + 1) <= D:
        logD += 1
    return -(-(K + 1) // 2) - logD


def ell_series(E: EulerData, K: int | None = None, D: int = 27, target: int = 4) -> SeparatedSeries:
    """sum_{k <= K} x_k f^(k)(x) truncated at degree D.

    With K omitted, the smallest K certifying ``target`` p-adic digits is
    used.  Raises PrecisionExhausted when K is too small to certify even
    one digit, or when C_p is not divisible by p (the tail estimate needs
    it).
    """
    p, g = E.p, E.g
    if any(int(x) % p for x in E.C_p.ravel()):
        raise PrecisionExhausted("tail of the l-series is only certified when C_p = 0 mod p")
    if K is None:
        K = 0
        while _certified_precision(K, D, p) < target:
            K += 1
    cert = _certified_precision(K, D, p)
    if cert < 1:
        raise PrecisionExhausted(f"K = {K} is too small to certify degree {D}")
    xs = xk_sequence(E.C_p, K, p)
    coeffs = np.empty((D + 1, g, g), dtype=object)
    for j in range(D + 1):
        coeffs[j] = _zeros(g)
    for k in range(K + 1):
        q = p**k
        for j in range(1, min(q, D) + 1):
            coeffs[j] = coeffs[j] + xs[k] * comb(q, j)
    return SeparatedSeries(coeffs, p, cert)


@dataclass(frozen=True)
class HondaType:
    """u(T) = p I + B_1 T + B_2 T^2, acting by T: x -> x^p."""

    p: int
    B1: np.ndarray
    B2: np.ndarray

    @classmethod
    def from_euler(cls, E: EulerData, lubin_tate: bool = False) -> "HondaType":
        """p - C_p T + E_p T^2, or p - C_p T + T^2 for the l-series."""
        B2 = _eye(E.g) if lubin_tate else E.E_p
        return cls(E.p, -E.C_p, B2)

    def apply(self, L: SeparatedSeries, D: int | None = None) -> np.ndarray:
        p = self.p
        D = L.degree if D is None else D
        if D > L.degree:
            raise InputError("series is not known to the requested degree")
        out = np.empty((D + 1,) + L.coeffs.shape[1:], dtype=object)
        for m in range(D + 1):
            acc = p * L.coeffs[m]
            if m % p == 0 and m:
                acc = acc + self.B1.dot(L.coeffs[m // p])
            if m % (p * p) == 0 and m:
                acc = acc + self.B2.dot(L.coeffs[m // (p * p)])
            out[m] = acc
        return out


@dataclass
class HondaReport:
    passed: bool
    worst_margin: int | None
    offending: tuple[int, int, int] | None
    degree: int
    certified: int | None

    def describe(self) -> str:
        if self.passed:
            return f"u*L = 0 mod p through degree {self.degree} (margin {self.worst_margin})"
        n, i, j = self.offending
        return f"u*L fails at x_{j + 1}^{n} in coordinate {i + 1}"


def honda_check(L: SeparatedSeries, u: HondaType, D: int | None = None) -> HondaReport:
    """Check that every coefficient of u*L through degree D lies in p Z_p."""
    D = L.degree if D is None else D
    if L.certified is not None and L.certified < 1:
        raise PrecisionExhausted("series coefficients are not certified mod p")
    vals = u.apply(L, D)
    worst = None
    for m in range(1, D + 1):
        for i in range(L.g):
            for j in range(L.g):
                v = vp(vals[m, i, j], u.p)
                if v is None:
                    continue
                if L.certified is not None:
                    v = min(v, L.certified)
                margin = v - 1
                if margin < 0:
                    return HondaReport(False, margin, (m, i, j), D, L.certified)
                worst = margin if worst is None else min(worst, margin)
    return HondaReport(True, worst, None, D, L.certified)


class MultiSeries:
    """Truncated multivariate power series with Fraction coefficients."""

    __slots__ = ("terms", "nvars", "D")

    def __init__(self, terms: Mapping[tuple, Fraction], nvars: int, D: int):
        self.nvars, self.D = nvars, D
        self.terms = {e: c for e, c in terms.items() if c and sum(e) <= D}

    @classmethod
    def variable(cls, k: int, nvars: int, D: int) -> "MultiSeries":
        e = [0] * nvars
        e[k] = 1
        return cls({tuple(e): Fraction(1)}, nvars, D)

    @classmethod
    def constant(cls, c, nvars: int, D: int) -> "MultiSeries":
        return cls({(0,) * nvars: Fraction(c)}, nvars, D)

    def __add__(self, other: "MultiSeries") -> "MultiSeries":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return MultiSeries(out, self.nvars, min(self.D, other.D))

    def __sub__(self, other: "MultiSeries") -> "MultiSeries":
        return self + other.scale(-1)

    def scale(self, c) -> "MultiSeries":
        return MultiSeries({e: c * v for e, v in self.terms.items()}, self.nvars, self.D)

    def __mul__(self, other: "MultiSeries") -> "MultiSeries":
        D = min(self.D, other.D)
        out: dict[tuple, Fraction] = {}
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            for e2, c2 in other.terms.items():
                if d1 + sum(e2) > D:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiSeries(out, self.nvars, D)

    def homogeneous(self, m: int) -> "MultiSeries":
        return MultiSeries({e: c for e, c in self.terms.items() if sum(e) == m}, self.nvars, self.D)

    def truncate(self, D: int) -> "MultiSeries":
        return MultiSeries(self.terms, self.nvars, D)

    def permute(self, perm: list[int]) -> "MultiSeries":
        """Rename variable i to perm[i]."""
        out = {}
        for e, c in self.terms.items():
            new = [0] * self.nvars
            for i, k in enumerate(e):
                new[perm[i]] += k
            out[tuple(new)] = c
        return MultiSeries(out, self.nvars, self.D)

    def substitute(self, values: list["MultiSeries"]) -> "MultiSeries":
        """Compose with series having no constant term."""
        nv, D = values[0].nvars, min(v.D for v in values)
        cache: dict[tuple[int, int], MultiSeries] = {}

        def power(i: int, k: int) -> MultiSeries:
            if k == 0:
                return MultiSeries.constant(1, nv, D)
            if (i, k) not in cache:
                cache[(i, k)] = power(i, k - 1) * values[i]
            return cache[(i, k)]

        out = MultiSeries({}, nv, D)
        for e, c in self.terms.items():
            term = MultiSeries.constant(c, nv, D)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            out = out + term
        return out

    def __eq__(self, other):
        return isinstance(other, MultiSeries) and self.terms == other.terms

    def denominators_prime_to(self, p: int) -> bool:
        return all(Fraction(c).denominator % p for c in self.terms.values())

    def __repr__(self):
        return f"MultiSeries({len(self.terms)} terms, nvars={self.nvars}, D={self.D})"


def _apply_separated(L: SeparatedSeries, F: list[MultiSeries], D: int) -> list[MultiSeries]:
    """L evaluated on the g-vector of series F, truncated at degree D."""
    g = L.g
    nv = F[0].nvars
    out = [MultiSeries({}, nv, D) for _ in range(g)]
    for j in range(g):
        power = MultiSeries.constant(1, nv, D)
        for n in range(1, min(D, L.degree) + 1):
            power = power * F[j].truncate(D)
            for i in range(g):
                c = L.coeffs[n, i, j]
                if c:
                    out[i] = out[i] + power.scale(c)
    return out


@dataclass
class GroupLaw:
    """F(x, y) = L^{-1}(L(x) + L(y)) with its verification results."""

    coords: list[MultiSeries]
    g: int
    p: int
    D: int
    integral: bool
    commutative: bool
    associative: bool | None
    homomorphism: bool


def _widen(s: MultiSeries, D: int) -> MultiSeries:
    # a homogeneous correction is exact, so it is valid to any degree
    return MultiSeries(s.terms, s.nvars, D)


def _solve_group_law(L: SeparatedSeries, D: int) -> list[MultiSeries]:
    g = L.g
    nv = 2 * g
    lin = L.linear()
    try:
        lin_inv = _inv(lin)
    except Exception as exc:  # sympy raises a generic error for singular matrices
        raise InputError("logarithm has a non-invertible linear part") from exc
    target = [a + b for a, b in zip(L.to_multi(nv, 0, D), L.to_multi(nv, g, D))]
    F = [MultiSeries.variable(i, nv, D) + MultiSeries.variable(g + i, nv, D) for i in range(g)]
    for m in range(2, D + 1):
        current = [f.truncate(m) for f in F]
        image = _apply_separated(L, current, m)
        resid = [(target[i] - image[i]).homogeneous(m) for i in range(g)]
        for i in range(g):
            corr = MultiSeries({}, nv, D)
            for j in range(g):
                if lin_inv[i, j]:
                    corr = corr + _widen(resid[j].scale(lin_inv[i, j]), D)
            F[i] = F[i] + corr
    return F


def group_law(L: SeparatedSeries, D: int, assoc_degree: int | None = 6, max_g: int = 2, max_degree: int = 12) -> GroupLaw:
    """Formal group law of the logarithm L through total degree D."""
    g, p = L.g, L.p
    if g > max_g or D > max_degree:
        raise InputError(f"group laws are capped at g <= {max_g}, D <= {max_degree}", "degree")
    if D > L.degree:
        raise InputError("logarithm is not known to degree D", "degree")
    F = _solve_group_law(L, D)
    integral = all(f.denominators_prime_to(p) for f in F)
    swap = list(range(g, 2 * g)) + list(range(g))
    commutative = all(f.permute(swap) == f for f in F)
    lhs = _apply_separated(L, F, D)
    rhs = [a + b for a, b in zip(L.to_multi(2 * g, 0, D), L.to_multi(2 * g, g, D))]
    homomorphism = all(a == b for a, b in zip(lhs, rhs))
    associative = None
    if assoc_degree:
        associative = check_associativity(F, g, min(assoc_degree, D))
    return GroupLaw(F, g, p, D, integral, commutative, associative, homomorphism)


def check_associativity(F: list[MultiSeries], g: int, D: int) -> bool:
    """F(F(x, y), z) = F(x, F(y, z)) in 3g variables through degree D."""
    nv = 3 * g
    x = [MultiSeries.variable(i, nv, D) for i in range(g)]
    y = [MultiSeries.variable(g + i, nv, D) for i in range(g)]
    z = [MultiSeries.variable(2 * g + i, nv, D) for i in range(g)]
    Ft = [f.truncate(D) for f in F]
    xy = [f.substitute(x + y) for f in Ft]
    yz = [f.substitute(y + z) for f in Ft]
    left = [f.substitute(xy + z) for f in Ft]
    right = [f.substitute(x + yz) for f in Ft]
    return all(a == b for a, b in zip(left, right))


def compositional_inverse(L: SeparatedSeries, D: int) -> list[MultiSeries]:
    """L^{-1} as g multivariate series in g variables through degree D."""
    g = L.g
    lin_inv = _inv(L.linear())
    y = [MultiSeries.variable(i, g, D) for i in range(g)]
    G = [MultiSeries({}, g, D) for _ in range(g)]
    for i in range(g):
        for j in range(g):
            if lin_inv[i, j]:
                G[i] = G[i] + y[j].scale(lin_inv[i, j])
    for m in range(2, D + 1):
        image = _apply_separated(L, [h.truncate(m) for h in G], m)
        resid = [(y[i] - image[i]).homogeneous(m) for i in range(g)]
        for i in range(g):
            for j in range(g):
                if lin_inv[i, j]:
                    G[i] = G[i] + _widen(resid[j].scale(lin_inv[i, j]), D)
    return G


def strong_isomorphism(L_from: SeparatedSeries, L_to: SeparatedSeries, D: int) -> list[MultiSeries]:
    """L_to^{-1} o L_from through degree D."""
    inv = compositional_inverse(L_to, D)
    return [h.substitute(L_from.to_multi(L_from.g, 0, D)) for h in inv]
