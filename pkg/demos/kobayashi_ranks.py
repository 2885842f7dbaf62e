"""Kobayashi ranks of O[X]/(F, omega_n): the definition against e ord F(eps_n).

Run from the repository root:  python demos/kobayashi_ranks.py
"""

from signed_iwasawa.dvr import DvrRing, make_ring
from signed_iwasawa.iwasawa import IwasawaPoly, phi
from signed_iwasawa.kobayashi import nabla_asymptotic, nabla_char_series, nabla_oracle


def show(label, F, ring, levels):
    cells = []
    for n in levels:
        a, b = nabla_oracle(F, n, ring), nabla_char_series(F, n, ring)
        cells.append(f"n={n}: {a.value if a.defined else '-'}/{b.value if b.defined else '-'}")
    print(f"{label:22}", "  ".join(cells))


def main():
    Z3 = DvrRing(3, precision=48)
    print("definition / analytic side over Z_3")
    show("X", IwasawaPoly([0, 1]), Z3, (1, 2, 3))
    show("3", IwasawaPoly([3]), Z3, (1, 2, 3))
    show("Phi_1", phi(1, 3), Z3, (1, 2, 3))
    show("3(X + 3)", IwasawaPoly([9, 3]), Z3, (1, 2, 3))

    # the linear term shows up only once n passes the cyclotomic factor
    F = phi(1, 3) * IwasawaPoly([-3, 1])
    tab = nabla_asymptotic(F, 1, 5, Z3)
    print("\nPhi_1 (X - 3): mu", tab.mu, "lambda", tab.lam, "threshold", tab.threshold)
    for r in tab.rows:
        print(f"  n={r.n}  value {r.analytic}  e lambda + phi mu = {r.predicted}")

    # over Z_3[sqrt 3] a factor of X is counted differently by the two sides
    R = make_ring(3, 2, 1, [-3, 0, 1], precision=96)
    X = IwasawaPoly([R.scalar(0), R.scalar(1)], R)
    print("\nover Z_3[sqrt 3]")
    show("X", X, R, (1, 2))
    show("X + sqrt 3", IwasawaPoly([R.pi(), R.scalar(1)], R), R, (1, 2))


if __name__ == "__main__":
    main()
