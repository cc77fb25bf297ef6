"""Compare the compiled and numpy word-basis kernels.

Usage: ``python3 benchmarks/bench_kernels.py [--level 10] [--repeat 3]``

Times word enumeration and letter-operator assembly for two Haar factors
under the weighted grading (the free group ball of the given radius) and
checks that both backends produce identical operators.
"""

import argparse
import time

import numpy as np

from fpl import kernels
from fpl.freeprod import HaarUnitary, Letter, build_free_rep


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench(backend, level, repeat):
    def work():
        rep = build_free_rep([HaarUnitary(), HaarUnitary()], level, "weighted", backend=backend)
        ops = [rep.letter_operator(Letter(f, m)) for f in (0, 1) for m in (1, -1)]
        return rep, ops

    return best_of(work, repeat)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--level", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["numpy"] + (["cython"] if kernels.BACKEND == "cython" else [])
    results = {b: bench(b, args.level, args.repeat) for b in backends}
    dim = results["numpy"][1][0].dim
    print(f"level {args.level}: {dim} words, best of {args.repeat}")
    for b, (t, _) in results.items():
        print(f"  {b:7s} {t:8.3f} s")
    if "cython" in results:
        a, c = results["numpy"][1][1], results["cython"][1][1]
        same = all((x != y).nnz == 0 for x, y in zip(a, c))
        speedup = results["numpy"][0] / results["cython"][0]
        print(f"  speedup {speedup:.1f}x, identical operators: {same}")
    else:
        print("  compiled kernels not built; only the numpy backend was timed")
    return 0


if __name__ == "__main__":
    np.seterr(all="raise")
    raise SystemExit(main())
