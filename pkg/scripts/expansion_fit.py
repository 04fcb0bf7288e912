"""Fit w(n)/n^alpha = c2 n^-2 + c3 n^-3 + ... for nu = n^alpha, p = 2.

Compares with (alpha-1)^2/4 and (alpha-1)^2 (alpha-2)/8 and reports the
discrete-vs-continuous witness for negative integer alpha.
"""
import argparse

from hardyline import analysis as an
from hardyline.errors import DomainError


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", default="-1,-2,-3,-0.5,-1.5,0.5,3")
    ap.add_argument("--extra", type=int, default=3)
    args = ap.parse_args()
    print("alpha,c2,c2_expected,c3,c3_expected,condition,witness_n")
    for tok in args.alphas.split(","):
        alpha = float(tok)
        if alpha == 1.0:
            continue
        fit = an.expansion_fit(alpha, 2.0, extra=args.extra)
        exp = an.expected_coefficients(alpha)
        try:
            wit = an.discrete_vs_continuous_gap(alpha).n_alpha
        except DomainError:
            wit = ""
        print(f"{alpha},{fit.coefficient(2):.10f},{exp[2]:.10f},{fit.coefficient(3):.10f},{exp[3]:.10f},"
              f"{fit.condition:.2e},{wit}")


if __name__ == "__main__":
    main()
