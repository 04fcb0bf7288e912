"""Truncated Rayleigh minima for nu = n^alpha, mu = n^(alpha-p) as N doubles.

Prints N, value, value - A where A is the continuum constant, and the ratio of
successive gaps (a rough convergence rate).
"""
import argparse

from hardyline.sharpness import RayleighProblem, continuum_constant, minimize_rayleigh


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=0.0)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--kmax", type=int, default=14, help="largest N is 2^kmax")
    ap.add_argument("--method", default="auto", choices=("auto", "exact", "descent"))
    args = ap.parse_args()

    A = continuum_constant(args.alpha, args.p)
    print(f"# alpha={args.alpha} p={args.p} continuum constant {A:.12g}")
    print("N,value,gap,gap_ratio")
    prev = None
    for k in range(0, args.kmax + 1):
        N = 2 ** k
        res = minimize_rayleigh(RayleighProblem(args.p, N, alpha=args.alpha), method=args.method)
        gap = res.value - A
        ratio = "" if prev is None else f"{prev / gap:.4f}"
        print(f"{N},{res.value!r},{gap:.6e},{ratio}")
        prev = gap


if __name__ == "__main__":
    main()
