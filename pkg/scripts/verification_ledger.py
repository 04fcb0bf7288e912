"""Run every verification suite and print one summary line each.

Exit status is 1 if any suite reports a negative margin.
"""
import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from hardyline import analysis as an


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--nmax", type=int, default=10_000)
    args = ap.parse_args()
    ok = True
    ex = ProcessPoolExecutor(args.jobs) if args.jobs > 1 else None
    try:
        for name in an.SUITES:
            t0 = time.perf_counter()
            res = an.run_suite(name, executor=ex, nmax=args.nmax)
            ok &= res.passed
            print(f"{name:10s} {'ok' if res.passed else 'NEGATIVE':8s} min margin {res.min_margin: .3e} "
                  f"at {res.location}  [{len(res.points)} points, {time.perf_counter() - t0:.2f}s]")
    finally:
        if ex is not None:
            ex.shutdown()
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
