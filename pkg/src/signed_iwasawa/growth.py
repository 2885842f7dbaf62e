"""Growth of the v-part of Sha along the cyclotomic tower.

For a sign vector s with a_sharp sharps and a_flat flats,

    nabla X_v(n) = F_v(s, n) + e_v lambda + phi(p^n) mu
    e_n - e_{n-1} = nabla X_v(n) - r_inf.

mu, lambda and r_inf are inputs: they are not computable from the local
data.  Everything is exact; a non-integral total means the inputs are
inconsistent.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

from .cyclotomic import totient
from .dvr import INF
from .errors import InputError

__all__ = [
    "GrowthParams",
    "GrowthRow",
    "GrowthReport",
    "f_v",
    "f_v_zero_trace",
    "nabla_x",
    "sha_delta",
    "emit_growth_table",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ["n", "parity", "a_sharp", "a_flat", "F_v", "nabla_X", "delta_e", "cumulative_e"]

_SIGN_NAMES = {"sharp": "sharp", "#": "sharp", "♯": "sharp", "flat": "flat", "b": "flat", "♭": "flat"}


def _fmt(x) -> str:
    if x is INF:
        return "inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _tail(p: int, lo_exp: int, count: int, step: int = 2) -> Fraction:
    """sum_{k=1}^{count} p^-(step k - lo_exp)."""
    return sum((Fraction(1, p ** (step * k - lo_exp)) for k in range(1, count + 1)), Fraction(0))


def f_v_zero_trace(n: int, p: int) -> Fraction:
    """The a_p = 0 value for one prime: phi(p^n) sum_{k=1}^{floor(n/2)} p^-(2k-1)."""
    if n < 1:
        raise InputError("n must be at least 1", "n")
    return totient(p, n) * _tail(p, 1, n // 2)


def f_v(a_sharp: int, a_flat: int, n: int, p: int, r_p) -> Fraction:
    """F_v(s, n) from the sign counts.  ``r_p`` may be INF (a_p = 0)."""
    if n < 1:
        raise InputError("n must be at least 1", "n")
    if a_sharp < 0 or a_flat < 0:
        raise InputError("sign counts must be nonnegative", "signs")
    if r_p is INF:
        return (a_sharp + a_flat) * f_v_zero_trace(n, p)
    r = Fraction(r_p)
    phi = totient(p, n)
    if n % 2:
        h = (n - 1) // 2
        return phi * (a_sharp * (r + _tail(p, 0, h)) + a_flat * _tail(p, 1, h))
    h = n // 2
    return phi * (a_sharp * _tail(p, 1, h) + a_flat * (r + _tail(p, 0, h - 1)))


def _parse_rational(value: Any, name: str, allow_inf: bool = False):
    if allow_inf and isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "∞"):
        return INF
    if isinstance(value, bool):
        raise InputError(f"{name} must be a rational number", name)
    try:
        return Fraction(value) if not isinstance(value, float) else Fraction(str(value))
    except (ValueError, TypeError, ZeroDivisionError):
        raise InputError(f"{name} must be a rational number, got {value!r}", name) from None


def _parse_int(doc: Mapping, name: str, minimum: int | None = None, default=None) -> int:
    if name not in doc:
        if default is not None:
            return default
        raise InputError(f"missing field '{name}'", name)
    v = doc[name]
    if isinstance(v, bool) or not isinstance(v, int):
        raise InputError(f"{name} must be an integer", name)
    if minimum is not None and v < minimum:
        raise InputError(f"{name} must be at least {minimum}", name)
    return v


def _parse_signs(entry: Any, d: int, parity: str) -> tuple[int, int]:
    name = f"signs.{parity}"
    if isinstance(entry, Mapping):
        try:
            a, b = int(entry["a_sharp"]), int(entry["a_flat"])
        except (KeyError, TypeError, ValueError):
            raise InputError(f"{name} needs integer a_sharp and a_flat", name) from None
    elif isinstance(entry, list):
        kinds = []
        for s in entry:
            if not isinstance(s, str) or s not in _SIGN_NAMES:
                raise InputError(f"{name} entries must be 'sharp' or 'flat', got {s!r}", name)
            kinds.append(_SIGN_NAMES[s])
        a, b = kinds.count("sharp"), kinds.count("flat")
    else:
        raise InputError(f"{name} must be a list of signs or a count object", name)
    if a < 0 or b < 0 or a + b != d:
        raise InputError(f"{name} must assign a sign to each of the d = {d} primes", name)
    return a, b


@dataclass
class GrowthParams:
    p: int
    d: int
    r_p: Any  # Fraction or INF
    e_v: int
    f_v: int
    signs: dict[str, tuple[int, int]]  # parity -> (a_sharp, a_flat)
    mu: Fraction
    lam: int
    r_inf: int
    n_min: int
    n_max: int
    e_baseline: int | None = None

    def __post_init__(self):
        import sympy

        if self.p == 2 or not sympy.isprime(self.p):
            raise InputError("p must be an odd prime", "p")
        if self.r_p is not INF and self.r_p < Fraction(1, self.e_v):
            raise InputError("r_p must be at least 1/e_v (a_p is a non-unit)", "r_p")
        if self.mu < 0:
            raise InputError("mu must be nonnegative", "mu")
        if self.n_max < self.n_min:
            raise InputError("n_max must be at least n_min", "n_max")

    def counts(self, n: int) -> tuple[int, int]:
        return self.signs["odd" if n % 2 else "even"]

    @classmethod
    def from_json(cls, doc: Mapping[str, Any] | str) -> "GrowthParams":
        if isinstance(doc, str):
            try:
                doc = json.loads(doc)
            except json.JSONDecodeError as exc:
                raise InputError(f"malformed JSON: {exc}") from exc
        if not isinstance(doc, Mapping):
            raise InputError("config must be a JSON object")
        p = _parse_int(doc, "p")
        d = _parse_int(doc, "d", 1)
        e_v = _parse_int(doc, "e_v", 1, default=1)
        f_v_ = _parse_int(doc, "f_v", 1, default=1)
        if "r_p" not in doc:
            raise InputError("missing field 'r_p'", "r_p")
        r_p = _parse_rational(doc["r_p"], "r_p", allow_inf=True)
        signs = doc.get("signs")
        if not isinstance(signs, Mapping) or "odd" not in signs or "even" not in signs:
            raise InputError("signs needs 'odd' and 'even' entries", "signs")
        rule = {k: _parse_signs(signs[k], d, k) for k in ("odd", "even")}
        mu = _parse_rational(doc.get("mu", "0"), "mu")
        lam = _parse_int(doc, "lambda", 0, default=0)
        r_inf = _parse_int(doc, "r_inf", 0, default=0)
        n_min = _parse_int(doc, "n_min", 1, default=1)
        n_max = _parse_int(doc, "n_max", 1)
        base = doc.get("e_baseline")
        if base is not None and (isinstance(base, bool) or not isinstance(base, int)):
            raise InputError("e_baseline must be an integer", "e_baseline")
        return cls(p, d, r_p, e_v, f_v_, rule, mu, lam, r_inf, n_min, n_max, base)


def nabla_x(params: GrowthParams, n: int) -> int:
    """F_v(s, n) + e_v lambda + phi(p^n) mu, which must be an integer."""
    a, b = params.counts(n)
    total = f_v(a, b, n, params.p, params.r_p) + params.e_v * params.lam + totient(params.p, n) * params.mu
    if total.denominator != 1:
        raise ArithmeticError(f"non-integral total {total} at n = {n}: inconsistent inputs")
    return int(total)


def sha_delta(params: GrowthParams, n: int) -> int:
    """e_n - e_{n-1}."""
    return nabla_x(params, n) - params.r_inf


@dataclass
class GrowthRow:
    n: int
    parity: str
    a_sharp: int
    a_flat: int
    F_v: Fraction
    nabla_X: int
    delta_e: int
    cumulative_e: int | None


@dataclass
class GrowthReport:
    params: GrowthParams
    rows: list[GrowthRow]
    warnings: list[str] = field(default_factory=list)

    @property
    def integral(self) -> bool:
        return all(r.F_v.denominator == 1 for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(
                [r.n, r.parity, r.a_sharp, r.a_flat, _fmt(r.F_v), r.nabla_X, r.delta_e,
                 "" if r.cumulative_e is None else r.cumulative_e]
            )
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "rows": [
                {
                    "n": r.n,
                    "parity": r.parity,
                    "a_sharp": r.a_sharp,
                    "a_flat": r.a_flat,
                    "F_v": _fmt(r.F_v),
                    "nabla_X": r.nabla_X,
                    "delta_e": r.delta_e,
                    "cumulative_e": r.cumulative_e,
                }
                for r in self.rows
            ],
            "integral": self.integral,
            "warnings": self.warnings,
            "note": "the growth formula holds for n large enough",
        }


def emit_growth_table(params: GrowthParams) -> GrowthReport:
    """One row per n in [n_min, n_max]; e_baseline is taken as e_{n_min - 1}."""
    rows = []
    warnings = []
    cum = params.e_baseline
    for n in range(params.n_min, params.n_max + 1):
        a, b = params.counts(n)
        fv = f_v(a, b, n, params.p, params.r_p)
        nx = nabla_x(params, n)
        delta = nx - params.r_inf
        if cum is not None:
            cum += delta
            if cum < 0:
                warnings.append(f"n={n}: cumulative e_n = {cum} is negative")
        rows.append(GrowthRow(n, "odd" if n % 2 else "even", a, b, fv, nx, delta, cum))
    if rows and all(r.delta_e < 0 for r in rows):
        warnings.append("every delta is negative: r_inf exceeds nabla X_v throughout")
    return GrowthReport(params, rows, warnings)
