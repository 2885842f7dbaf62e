"""The nine acceptance criteria, each at its stated size and time budget.

Every test records one line in RESULTS; conftest.py prints them in the
terminal summary.
"""

import json
import random
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from _data import curve_config, rank_two_config
from signed_iwasawa.cli import _random_series, main
from signed_iwasawa.coleman import (
    FLAT,
    SHARP,
    h_valuation,
    verify_col_u_identity,
    verify_det,
    verify_wronskian,
)
from signed_iwasawa.dvr import DvrRing, make_ring
from signed_iwasawa.formal_group import (
    EulerData,
    HondaType,
    ell_series,
    group_law,
    honda_check,
    log_A,
    xk_sequence,
)
from signed_iwasawa.growth import GrowthParams, emit_growth_table, f_v_zero_trace, sha_delta
from signed_iwasawa.kobayashi import nabla_asymptotic, nabla_char_series, nabla_oracle
from signed_iwasawa.local_points import verify_q_system

RESULTS: dict[int, str] = {}
GOLDEN = Path(__file__).parent / "golden"


@contextmanager
def criterion(k, name, budget):
    start = time.perf_counter()
    ok, detail = False, ""
    try:
        yield
        ok = True
    except AssertionError as exc:
        detail = f" ({exc})" if str(exc) else ""
        raise
    finally:
        dt = time.perf_counter() - start
        within = dt < budget
        status = "PASS" if ok and within else "FAIL"
        line = f"criterion {k} {name}: {status} in {dt:.2f}s (budget {budget}s){detail}"
        RESULTS[k] = line
        print(line)
        if ok:
            assert within, line


def test_matrix_identities():
    with criterion(1, "det and Wronskian", 2):
        for p in (3, 5):
            for a_p in (0, p, 2 * p, None):
                for n in range(1, 7):
                    assert verify_det(n, a_p, p).passed, (p, a_p, n)
                    assert verify_wronskian(n, a_p, p).passed, (p, a_p, n)


def test_column_identity():
    with criterion(2, "column-vector identity", 1):
        for p in (3, 5):
            for a_p in (0, p, 2 * p, None):
                for n in range(1, 6):
                    for u in (1, 2):
                        assert verify_col_u_identity(n, u, a_p, p).passed, (p, a_p, n, u)


def test_valuation_formulas():
    with criterion(3, "valuation closed forms", 5):
        first = h_valuation(1, SHARP, 3, 3)
        assert first.computed == first.closed_form == 2
        for p in (3, 5):
            for r in (1, 2):
                for n in range(1, 6):
                    for sign in (SHARP, FLAT):
                        c = h_valuation(n, sign, p**r, p)
                        assert c.applicable and c.equal, (p, r, n, sign)


def test_honda_congruences():
    with criterion(4, "Honda congruences and denominators", 10):
        examples = [
            EulerData.from_json(curve_config(27)),
            EulerData.from_json(curve_config(27, a3=3)),
            EulerData.from_json(rank_two_config(27)),
        ]
        for E in examples:
            assert honda_check(log_A(E, 27), HondaType.from_euler(E), 27).passed
            assert honda_check(ell_series(E, D=27), HondaType.from_euler(E, lubin_tate=True), 27).passed
            xs = xk_sequence(E.C_p, 12, 3)
            for k in range(13):
                assert xs.denominator_exponent(k) <= k // 2, k


def test_group_law():
    with criterion(5, "group law", 30):
        E = EulerData.from_json(curve_config(27))
        for L in (ell_series(E, D=9), log_A(E, 9)):
            G = group_law(L, 9, assoc_degree=6)
            assert G.integral and G.commutative and G.associative and G.homomorphism


def test_local_point_relations():
    with criterion(6, "local-point Q-system", 60):
        for E in (
            EulerData.from_json(curve_config(9)),
            EulerData.from_json(curve_config(9, a3=3)),
            EulerData.from_json(rank_two_config(9)),
        ):
            rep = verify_q_system(E, nmax=2, precision=6)
            assert rep.passed, rep.failures()


def _oracle_sweep(ring, count, seed):
    rng = random.Random(seed)
    for i in range(count):
        F = _random_series(ring, rng, 3, ring.e)
        for n in (1, 2, 3):
            a, b = nabla_oracle(F, n, ring), nabla_char_series(F, n, ring)
            assert (a.defined, a.value) == (b.defined, b.value), (i, n)
        tab = nabla_asymptotic(F, 1, 6, ring)
        assert tab.threshold is not None, i
        assert all(r.agree for r in tab.rows if r.n >= tab.threshold)


def test_kobayashi_oracle():
    with criterion(7, "Kobayashi rank oracle", 120):
        _oracle_sweep(DvrRing(3, precision=48), 50, 2024)
        _oracle_sweep(make_ring(3, 2, 1, [-3, 0, 1], precision=96), 50, 2025)


def _growth(**doc):
    base = {"p": 3, "d": 1, "e_v": 1, "f_v": 1, "mu": "0", "lambda": 0, "r_inf": 0, "n_min": 1}
    base.update(doc)
    return GrowthParams.from_json(base)


def test_growth_formulas():
    with criterion(8, "growth formulas", 1):
        assert [f_v_zero_trace(n, 3) for n in (1, 2, 3, 4)] == [0, 2, 6, 20]
        # F_v = 2 (a_p = 0, n = 2), lambda 3, r_inf 1
        P = _growth(r_p="inf", signs={"odd": ["flat"], "even": ["sharp"]}, **{"lambda": 3}, r_inf=1, n_max=2)
        assert sha_delta(P, 2) == 4
        # one sharp and one flat at n = 3 with r_p = 1: 18 (1 + 1/9) + 18/3 = 26
        P = GrowthParams.from_json(json.loads((GOLDEN / "growth.json").read_text()))
        assert sha_delta(P, 3) == 26 + 2 - 1
        # p = 5, a flat at n = 2 with r_p = 1 and mu = 1: 20 + 20
        P = _growth(p=5, r_p="1", signs={"odd": ["sharp"], "even": ["flat"]}, mu="1", n_max=2)
        assert sha_delta(P, 2) == 40
        for P in (P, _growth(r_p="2", d=3, signs={"odd": ["sharp", "flat", "flat"], "even": ["flat"] * 3},
                             **{"lambda": 2}, n_max=12, e_baseline=0)):
            rep = emit_growth_table(P)
            assert rep.integral
            prev = rep.rows[0].cumulative_e
            for row in rep.rows[1:]:
                if prev is not None:
                    assert row.cumulative_e - prev == row.delta_e
                prev = row.cumulative_e


def test_cli_end_to_end(tmp_path):
    import contextlib
    import io
    import os

    with criterion(9, "CLI end to end", 10):
        cases = json.loads((GOLDEN / "cases.json").read_text())
        commands = set()
        for case in cases:
            buf = io.StringIO()
            cwd = os.getcwd()
            os.chdir(GOLDEN)
            try:
                with contextlib.redirect_stdout(buf):
                    code = main(case["argv"])
            finally:
                os.chdir(cwd)
            assert code == case["exit"], case["name"]
            assert buf.getvalue() == (GOLDEN / f"{case['name']}.out").read_text(), case["name"]
            commands.add(case["argv"][0])
        assert commands == {"honda-check", "logarithm", "local-points", "coleman", "kobayashi", "growth"}
        assert any(c["exit"] == 1 for c in cases)
        bad = tmp_path / "bad.json"
        bad.write_text('{"p": 3,')
        with contextlib.redirect_stderr(io.StringIO()):
            assert main(["growth", "--config", str(bad)]) == 2
