import json
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from signed_iwasawa.coleman import FLAT, SHARP, closed_form_valuation
from signed_iwasawa.dvr import INF
from signed_iwasawa.errors import InputError
from signed_iwasawa.growth import (
    CSV_COLUMNS,
    GrowthParams,
    emit_growth_table,
    f_v,
    f_v_zero_trace,
    nabla_x,
    sha_delta,
)

GOLDEN = Path(__file__).parent / "golden"


def _params(**kw):
    doc = json.loads((GOLDEN / "growth.json").read_text())
    doc.update(kw)
    return GrowthParams.from_json(doc)


def test_zero_trace_values():
    assert [f_v_zero_trace(n, 3) for n in (1, 2, 3, 4)] == [0, 2, 6, 20]
    # phi(p^n) (1/p + 1/p^3) at n = 4
    assert f_v_zero_trace(4, 5) == 500 * Fraction(26, 125)
    assert f_v(1, 0, 4, 3, INF) == f_v(0, 1, 4, 3, INF) == 20


def test_hand_values():
    # n = 3, r = 1: phi = 18, sharp 1 + 1/9, flat 1/3
    assert f_v(1, 1, 3, 3, 1) == 26
    assert f_v(0, 2, 2, 3, 1) == 12
    assert f_v(2, 0, 2, 3, 1) == 4


def test_example_config():
    P = _params()
    # n = 3 is odd: one sharp and one flat, lambda 1 with e_v 2, r_inf 1
    assert nabla_x(P, 3) == 26 + 2
    assert sha_delta(P, 3) == 27
    assert sha_delta(P, 1) == f_v(1, 1, 1, 3, 1) + 2 - 1 == 3


@settings(max_examples=60, deadline=None)
@given(
    p=st.sampled_from([3, 5, 7]),
    n=st.integers(1, 12),
    a=st.integers(0, 3),
    b=st.integers(0, 3),
    r=st.sampled_from([Fraction(1), Fraction(2), Fraction(1, 2), INF]),
)
def test_f_v_agrees_with_closed_forms(p, n, a, b, r):
    got = f_v(a, b, n, p, r)
    if r is INF:
        assert got == (a + b) * f_v_zero_trace(n, p)
        return
    expect = a * closed_form_valuation(n, SHARP, p, r) + b * closed_form_valuation(n, FLAT, p, r)
    assert got == expect
    if r.denominator == 1:
        assert got.denominator == 1


@pytest.mark.parametrize("p", [3, 5, 7])
def test_integral_for_integer_trace_valuations(p):
    for n in range(1, 13):
        for r in (1, 2, INF):
            for a in range(3):
                assert f_v(a, 2 - a, n, p, r).denominator == 1


def test_cumulative_telescopes():
    P = _params(n_max=9, e_baseline=5)
    rep = emit_growth_table(P)
    prev = 5
    for row in rep.rows:
        assert row.cumulative_e - prev == row.delta_e
        prev = row.cumulative_e
    assert rep.rows[-1].cumulative_e == 5 + sum(r.delta_e for r in rep.rows)
    assert rep.integral and not rep.warnings


def test_no_baseline_leaves_cumulative_empty():
    rep = emit_growth_table(_params(e_baseline=None))
    assert all(r.cumulative_e is None for r in rep.rows)
    assert rep.to_csv().splitlines()[1].endswith(",")


def test_csv_and_json_shapes():
    rep = emit_growth_table(_params())
    lines = rep.to_csv().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 7
    doc = rep.to_json()
    assert [r["n"] for r in doc["rows"]] == list(range(1, 7))


def test_negative_growth_warns():
    rep = emit_growth_table(_params(r_inf=10**6, n_max=3))
    assert any("negative" in w for w in rep.warnings)


def test_non_integral_total_is_reported():
    P = _params(mu="1/7")
    with pytest.raises(ArithmeticError):
        nabla_x(P, 1)


@pytest.mark.parametrize(
    "change,field",
    [
        ({"r_p": None}, "r_p"),
        ({"p": 9}, "p"),
        ({"signs": {"odd": ["sharp"], "even": ["flat", "flat"]}}, "signs.odd"),
        ({"signs": {"odd": ["sharp", "up"], "even": ["flat", "flat"]}}, "signs.odd"),
        ({"r_p": "1/3"}, "r_p"),
        ({"lambda": 1.5}, "lambda"),
    ],
)
def test_input_errors_name_the_field(change, field):
    doc = json.loads((GOLDEN / "growth.json").read_text())
    for k, v in change.items():
        if v is None:
            del doc[k]
        else:
            doc[k] = v
    with pytest.raises(InputError) as exc:
        GrowthParams.from_json(doc)
    assert exc.value.field == field


def test_count_objects_accepted():
    P = _params(signs={"odd": {"a_sharp": 1, "a_flat": 1}, "even": {"a_sharp": 0, "a_flat": 2}})
    assert P.counts(3) == (1, 1) and P.counts(4) == (0, 2)
