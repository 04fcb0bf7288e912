"""Sampled power-profile quotients against their continuum limits.

For each eps the continuum quotient of x^(g+eps)(1-x)^2 is computed by mpmath
quadrature; the sampled quotients at m = 10^2..10^mmax approach it from above.
The gap to the sharp constant is set by eps, not by m.
"""
import argparse

import mpmath

from hardyline.sharpness import PowerProfile, continuum_constant, sampled_test_quotient


def continuum_quotient(phi, alpha, p):
    g, c = phi.exponent, phi.cutoff
    with mpmath.workdps(30):
        f = lambda x: x ** g * (1 - x) ** c  # noqa: E731
        df = lambda x: g * x ** (g - 1) * (1 - x) ** c - c * x ** g * (1 - x) ** (c - 1)  # noqa: E731
        num = mpmath.quad(lambda x: abs(df(x)) ** p * x ** alpha, [0, 1])
        den = mpmath.quad(lambda x: abs(f(x)) ** p * x ** (alpha - p), [0, 1])
    return float(num / den)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=0.0)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--eps", default="0.2,0.1,0.05,0.02,0.01")
    ap.add_argument("--mmax", type=int, default=6)
    args = ap.parse_args()
    A = continuum_constant(args.alpha, args.p)
    print(f"# sharp constant {A:.12g}")
    print("eps,m,sampled,continuum")
    for tok in args.eps.split(","):
        phi = PowerProfile(args.alpha, args.p, float(tok))
        cont = continuum_quotient(phi, args.alpha, args.p)
        for k in range(2, args.mmax + 1):
            q = sampled_test_quotient(phi, 10 ** k, args.alpha, args.p)
            print(f"{tok},{10 ** k},{q:.8f},{cont:.8f}")


if __name__ == "__main__":
    main()
