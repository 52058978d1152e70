#!/usr/bin/env python3
"""Benchmark the compiled convolution kernel against the pure-Python twin.

Two regimes matter:

* small rationals (synthetic piecewise functions, low truncations): the
  work is interpreter-bound and the compiled kernel wins;
* huge rationals (deep truncations of the notched construction): big-int
  gcd and multiply dominate inside CPython's own C code, so the two
  kernels converge.

Run:  python benchmarks/bench_conv.py
"""

import random
import time
from fractions import Fraction

from tailkit import kernel, notched
from tailkit.convolution import _linear_table


def _synthetic(segments: int, seed: int = 1):
    rng = random.Random(seed)
    breaks = sorted({Fraction(rng.randint(0, 10 * segments), 8)
                     for _ in range(segments)} | {Fraction(0)})
    c0 = [Fraction(rng.randint(0, 16), 4) for _ in range(len(breaks) - 1)]
    c1 = [Fraction(rng.randint(-8, 8), 4) for _ in range(len(breaks) - 1)]
    return breaks, c0, c1


def _time(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    impls = kernel.backends()
    if len(impls) < 2:
        print("compiled kernel not built; run: python setup.py build_ext --inplace")
    cases = []

    b, c0, c1 = _synthetic(40)
    cases.append(("synthetic 40 segments (small rationals)",
                  (b, c0, c1, b, c0, c1), Fraction(77, 3)))

    for n in (3, 4):
        nd = notched.build_density(n)
        tb, tc0, tc1 = _linear_table(nd.density())
        x = notched.knot_position("c", n)
        cases.append((f"notched N={n} normalized (huge rationals)",
                      (tb, tc0, tc1, tb, tc0, tc1), x))

    print(f"{'case':45s} {'backend':8s} {'conv_dense':>12s} {'conv_point':>12s}")
    for label, args, x in cases:
        reference = None
        for name, impl in sorted(impls.items()):
            dense_t, dense_v = _time(lambda: impl.conv_dense(*args))
            point_t, point_v = _time(
                lambda: impl.conv_point(*args, x, args[0][0], args[0][-1]))
            if reference is None:
                reference = (dense_v, point_v)
            else:
                assert reference == (dense_v, point_v), "kernels disagree"
            print(f"{label:45s} {name:8s} {dense_t * 1e3:10.1f} ms"
                  f" {point_t * 1e3:10.2f} ms")
    print("\nkernels produced identical exact results on every case")


if __name__ == "__main__":
    main()
