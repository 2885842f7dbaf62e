"""Command-line front end.

Every subcommand reads a JSON config, prints a report (JSON, or CSV for
``growth``) and finishes with ``RESULT: PASS count=<checks>`` or
``RESULT: FAIL count=<failures>``.  Exit codes: 0 pass, 1 a check
failed, 2 bad input, 3 precision exhausted.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from .errors import InputError, NotExact, PrecisionExhausted

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_PRECISION = 0, 1, 2, 3


def _s(x) -> Any:
    """JSON-friendly form of exact values."""
    from .dvr import INF

    if x is INF:
        return "inf"
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return x


def _load_config(path: str | None) -> dict:
    if path is None:
        raise InputError("--config is required", "config")
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config: {exc}", "config") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", "config") from None
    if not isinstance(doc, dict):
        raise InputError("config must be a JSON object", "config")
    return doc


def _field_int(doc: dict, name: str, default=None, minimum: int | None = None) -> int:
    v = doc.get(name, default)
    if v is None:
        raise InputError(f"missing field '{name}'", name)
    if isinstance(v, bool) or not isinstance(v, int):
        raise InputError(f"{name} must be an integer", name)
    if minimum is not None and v < minimum:
        raise InputError(f"{name} must be at least {minimum}", name)
    return v


# subcommands: each returns (document, list of pass flags)


def cmd_honda_check(args, doc):
    from .formal_group import EulerData, HondaType, SeparatedSeries, ell_series, honda_check, log_A, xk_sequence
    import numpy as np

    E = EulerData.from_json(doc)
    D = args.degree or doc.get("degree") or E.p**3
    which = doc.get("series", ["log_A", "ell"])
    if isinstance(which, str):
        which = [which]
    rows, flags = [], []
    for name in which:
        if name == "log_A":
            L, u = log_A(E, D), HondaType.from_euler(E)
        elif name == "ell":
            L, u = ell_series(E, D=D, target=args.precision or 4), HondaType.from_euler(E, lubin_tate=True)
        elif name == "identity":
            # L(x) = x, which is not of Honda type
            coeffs = np.zeros((D + 1, E.g, E.g), dtype=object)
            coeffs[:] = Fraction(0)
            for i in range(E.g):
                coeffs[1, i, i] = Fraction(1)
            L, u = SeparatedSeries(coeffs, E.p), HondaType.from_euler(E)
        else:
            raise InputError(f"unknown series {name!r}", "series")
        rep = honda_check(L, u, D)
        rows.append({
            "check": f"honda:{name}",
            "degree": D,
            "pass": rep.passed,
            "worst_margin": rep.worst_margin,
            "certified_digits": rep.certified,
            "detail": rep.describe(),
        })
        flags.append(rep.passed)
    kmax = _field_int(doc, "denominator_k", 12, 0)
    xs = xk_sequence(E.C_p, kmax, E.p)
    ok = all(xs.denominator_exponent(k) <= k // 2 for k in range(kmax + 1))
    rows.append({
        "check": "denominator_bound",
        "degree": kmax,
        "pass": ok,
        "exponents": [xs.denominator_exponent(k) for k in range(kmax + 1)],
    })
    flags.append(ok)
    return {"p": E.p, "g": E.g, "rows": rows}, flags


def cmd_logarithm(args, doc):
    from .formal_group import EulerData, ell_series, group_law, log_A

    E = EulerData.from_json(doc)
    D = args.degree or doc.get("degree") or 9
    name = doc.get("series", "log_A")
    if name == "log_A":
        L = log_A(E, D)
    elif name == "ell":
        L = ell_series(E, D=D, target=args.precision or 4)
    else:
        raise InputError(f"unknown series {name!r}", "series")
    coeffs = [
        [[_s(Fraction(L.coeffs[m, i, j])) for j in range(E.g)] for i in range(E.g)]
        for m in range(1, D + 1)
    ]
    assoc = _field_int(doc, "assoc_degree", min(D, 6), 1)
    G = group_law(L, D, assoc_degree=assoc)
    checks = {
        "integral": G.integral,
        "commutative": G.commutative,
        "associative": G.associative,
        "homomorphism": G.homomorphism,
    }
    out = {"p": E.p, "g": E.g, "series": name, "degree": D, "coefficients": coeffs,
           "rows": [{"check": k, "pass": bool(v)} for k, v in checks.items()]}
    return out, [bool(v) for v in checks.values()]


def cmd_local_points(args, doc):
    from .formal_group import EulerData
    from .local_points import verify_q_system

    E = EulerData.from_json(doc)
    nmax = _field_int(doc, "nmax", 2, 1)
    rep = verify_q_system(E, nmax, args.precision or _field_int(doc, "precision", 6, 1))
    body = rep.to_json()
    return body, [r.passed for r in rep.rows]


def cmd_coleman(args, doc):
    from .coleman import FLAT, SHARP, h_valuation, verify_col_u_identity, verify_det, verify_recursion, verify_wronskian

    if doc is None:
        if args.p is None or args.ap is None or args.nmax is None:
            raise InputError("coleman needs --config or all of --p, --ap, --nmax", "p")
        doc = {"p": args.p, "a_p": args.ap, "nmax": args.nmax}
    p = _field_int(doc, "p")
    nmax = _field_int(doc, "nmax", None, 1)
    raw = doc.get("a_p")
    if raw is None:
        raise InputError("missing field 'a_p'", "a_p")
    if isinstance(raw, str) and raw.strip().lower() == "symbolic":
        a_p = None
    else:
        try:
            a_p = int(raw)
        except (TypeError, ValueError):
            raise InputError("a_p must be an integer or 'symbolic'", "a_p") from None
        if a_p % p:
            raise InputError("a_p must be divisible by p (supersingular)", "a_p")
    us = doc.get("u", [1, 2])
    rows, flags = [], []

    def add(row):
        rows.append(row)
        flags.append(row["pass"])

    for n in range(1, nmax + 1):
        for chk in (verify_det(n, a_p, p), verify_wronskian(n, a_p, p), verify_recursion(n, a_p, p)):
            add({"check": chk.name, "n": n, "pass": chk.passed})
        for u in us:
            chk = verify_col_u_identity(n, u, a_p, p)
            add({"check": f"{chk.name}:u={u}", "n": n, "pass": chk.passed})
    if a_p is not None and a_p != 0:
        prec = args.precision
        for n in range(1, nmax + 1):
            for sign in (SHARP, FLAT):
                c = h_valuation(n, sign, a_p, p, prec)
                add({
                    "check": f"valuation:{sign}",
                    "n": n,
                    "computed": _s(c.computed),
                    "closed_form": _s(c.closed_form),
                    "applicable": c.applicable,
                    "pass": c.equal or not c.applicable,
                })
    return {"p": p, "a_p": "symbolic" if a_p is None else a_p, "nmax": nmax, "rows": rows}, flags


def _kobayashi_ring(doc, precision):
    from .dvr import make_ring

    spec = doc.get("ring", {})
    if not isinstance(spec, dict):
        raise InputError("ring must be an object", "ring")
    p = _field_int(doc, "p")
    e = _field_int(spec, "e", 1, 1)
    f = _field_int(spec, "f", 1, 1)
    return make_ring(p, e, f, spec.get("defining"), precision=precision)


def _random_series(ring, rng: random.Random, lam_max: int, k_max: int):
    """A pseudo-random series with F(0) != 0, lambda <= lam_max and mu = k/e."""
    from .iwasawa import IwasawaPoly

    lam = rng.randint(0, lam_max)
    k = rng.randint(0, k_max)
    pi = ring.pi()
    coeffs = []
    for i in range(lam):
        a = ring.zeros()
        a[rng.randrange(ring.d)] = rng.randrange(1 if i == 0 else 0, 27)
        coeffs.append(ring.mul(pi, a))
    coeffs.append(ring.scalar(1))
    c = ring.scalar(rng.choice([1, 2, 4, 5, 7, 8]))
    for _ in range(k):
        c = ring.mul(c, pi)
    unit = IwasawaPoly([ring.scalar(rng.choice([1, 2])), ring.scalar(rng.randrange(9))], ring)
    return IwasawaPoly(coeffs, ring) * unit * IwasawaPoly([c], ring)


def cmd_kobayashi(args, doc):
    from .iwasawa import IwasawaPoly
    from .kobayashi import nabla_asymptotic, nabla_char_series, nabla_oracle

    ring = _kobayashi_ring(doc, args.precision or 48)
    n_min = _field_int(doc, "n_min", 1, 1)
    n_max = _field_int(doc, "n_max", 3, n_min)
    series = []
    for k, F in enumerate(doc.get("series", [])):
        if not isinstance(F, list) or not F:
            raise InputError(f"series[{k}] must be a nonempty coefficient list", f"series[{k}]")
        try:
            series.append(IwasawaPoly([ring._coerce(c) if not isinstance(c, list) else ring.array(c) for c in F], ring))
        except (TypeError, ValueError):
            raise InputError(f"series[{k}] has a bad coefficient", f"series[{k}]") from None
    count = _field_int(doc, "random", 0, 0)
    rng = random.Random(args.seed if args.seed is not None else _field_int(doc, "seed", 0))
    for _ in range(count):
        series.append(_random_series(ring, rng, _field_int(doc, "lambda_max", 3, 0), ring.e * _field_int(doc, "mu_max", 1, 0)))
    if not series:
        raise InputError("no series given", "series")
    rows, flags, tables = [], [], []
    for idx, F in enumerate(series):
        for n in range(n_min, n_max + 1):
            a, b = nabla_oracle(F, n, ring), nabla_char_series(F, n, ring)
            agree = (a.defined, a.value) == (b.defined, b.value)
            rows.append({"series": idx, "n": n, "nabla_direct": a.value, "nabla_analytic": b.value, "agree": agree})
            flags.append(agree)
        tab = nabla_asymptotic(F, n_min, n_max, ring)
        tables.append({"series": idx, "mu": _s(tab.mu), "lambda": tab.lam, "threshold": tab.threshold})
    return {"p": ring.p, "e": ring.e, "f": ring.f, "rows": rows, "asymptotic": tables}, flags


def cmd_growth(args, doc):
    from .growth import GrowthParams, emit_growth_table

    params = GrowthParams.from_json(doc)
    try:
        rep = emit_growth_table(params)
    except ArithmeticError as exc:
        raise InputError(str(exc), "mu") from None
    ok_int = all(r.F_v.denominator == 1 for r in rep.rows)
    tele = True
    if params.e_baseline is not None:
        prev = params.e_baseline
        for r in rep.rows:
            tele = tele and r.cumulative_e - prev == r.delta_e
            prev = r.cumulative_e
    flags = [ok_int, tele]
    if args.format == "csv":
        return rep.to_csv(), flags
    return rep.to_json(), flags


COMMANDS: dict[str, Callable] = {
    "honda-check": cmd_honda_check,
    "logarithm": cmd_logarithm,
    "local-points": cmd_local_points,
    "coleman": cmd_coleman,
    "kobayashi": cmd_kobayashi,
    "growth": cmd_growth,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file ('-' for stdin)")
    common.add_argument("--precision", type=int, default=None, help="working precision (p-adic digits)")
    common.add_argument("--degree", type=int, default=None, help="series truncation degree")
    common.add_argument("--seed", type=int, default=None, help="seed for generated inputs")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--out", help="write the report here instead of stdout")
    parser = argparse.ArgumentParser(prog="signed-iwasawa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "coleman":
            sp.add_argument("--p", type=int)
            sp.add_argument("--ap")
            sp.add_argument("--nmax", type=int)
    return parser


def _render(body: Any, fmt: str) -> str:
    if isinstance(body, str):
        return body
    return json.dumps(body, indent=2, default=_s) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    try:
        if args.command == "coleman" and args.config is None:
            doc = None
        else:
            doc = _load_config(args.config)
        if args.precision is not None and args.precision < 1:
            raise InputError("precision must be positive", "precision")
        if args.degree is not None and args.degree < 1:
            raise InputError("degree must be positive", "degree")
        body, flags = COMMANDS[args.command](args, doc)
    except InputError as exc:
        where = f" [{exc.field}]" if getattr(exc, "field", None) else ""
        print(f"error{where}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PrecisionExhausted as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except NotExact as exc:
        print(f"error [maps]: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = _render(body, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    failed = flags.count(False)
    if failed:
        print(f"RESULT: FAIL count={failed}")
        return EXIT_FAIL
    print(f"RESULT: PASS count={len(flags)}")
    return EXIT_PASS


if __name__ == "__main__":
    sys.exit(main())
