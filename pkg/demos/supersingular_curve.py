"""Walk through y^2 = x^3 - x at p = 3, where a_3 = 0.

Run from the repository root:  python demos/supersingular_curve.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from _data import curve_config  # noqa: E402

from signed_iwasawa.coleman import FLAT, SHARP, closed_form_valuation, h_matrix, verify_det  # noqa: E402
from signed_iwasawa.dvr import INF  # noqa: E402
from signed_iwasawa.formal_group import EulerData, HondaType, group_law, honda_check, log_A  # noqa: E402
from signed_iwasawa.growth import f_v_zero_trace  # noqa: E402
from signed_iwasawa.local_points import epsilon_log, verify_q_system  # noqa: E402


def main():
    E = EulerData.from_json(curve_config(27))
    print("C_3 =", [[str(x) for x in row] for row in E.C_p.tolist()])

    # the logarithm built from the Euler factors is of Honda type
    L = log_A(E, 27)
    rep = honda_check(L, HondaType.from_euler(E), 27)
    print("Honda congruence to degree 27:", "holds" if rep.passed else "fails")

    G = group_law(L, 7, assoc_degree=5)
    print("group law to degree 7: integral", G.integral, "associative", G.associative)

    # local points: ell(eps) and the trace relations up to level 2
    print("ell(eps) =", epsilon_log(E)[0])
    q = verify_q_system(E, nmax=2, precision=6)
    for row in q.rows:
        print(f"  {row.condition:8} n={row.n}  residual valuation {row.residual_valuation}")

    # the signed logarithm matrices and their valuations at eps_n
    H = h_matrix(2, 0, 3)
    print("H_2^sharp =", H.sharp.coeffs)
    print("det H_n = omega_n / X for n <= 4:", all(verify_det(n, 0, 3).passed for n in range(1, 5)))
    for n in range(1, 5):
        s, f = closed_form_valuation(n, SHARP, 3, INF), closed_form_valuation(n, FLAT, 3, INF)
        print(f"  n={n}: sharp {s}, flat {f}, growth contribution {f_v_zero_trace(n, 3)}")


if __name__ == "__main__":
    main()
