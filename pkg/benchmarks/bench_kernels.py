#!/usr/bin/env python3
"""Head-to-head timing of the compiled kernels vs the numpy fallback.

Runs the biquad cascade and the polyphase resampling core on
representative workloads and prints a table with the speedup of the
compiled extension. Exits non-zero if the extension is not built, so CI
can catch a silently missing compile step.

Usage:  python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import sys
import time

import numpy as np

from phaserepair import _fallback

try:
    from phaserepair import _kernels
except ImportError:
    _kernels = None


def _best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_sosfilt(rng, repeats):
    rows = []
    for n_sections, n in ((4, 16000), (5, 160000), (8, 160000)):
        # stable random biquads, poles well inside the unit circle
        sos = np.zeros((n_sections, 6))
        sos[:, 0:3] = rng.standard_normal((n_sections, 3))
        sos[:, 3] = 1.0
        r = 0.6 * rng.random(n_sections)
        th = np.pi * rng.random(n_sections)
        sos[:, 4] = -2 * r * np.cos(th)
        sos[:, 5] = r * r
        zi = np.zeros((n_sections, 2))
        x = rng.standard_normal(n)

        t_np = _best_of(lambda: _fallback.sosfilt(sos, x, zi), repeats)
        t_c = (_best_of(lambda: _kernels.sosfilt(sos, x, zi), repeats)
               if _kernels else None)
        rows.append((f"sosfilt {n_sections}x{n}", t_np, t_c))
    return rows


def bench_polyphase(rng, repeats):
    rows = []
    for up, down, n in ((2, 1, 16000), (7, 16, 160000), (160, 147, 48000)):
        half = 64 * max(up, down)
        m = np.arange(-half, half + 1)
        h = np.hanning(2 * half + 1) * np.sinc(m / max(up, down))
        x = rng.standard_normal(n)
        n_out = (n * up) // down

        t_np = _best_of(
            lambda: _fallback.polyphase_filter(h, up, down, x, n_out), repeats)
        t_c = (_best_of(
            lambda: _kernels.polyphase_filter(h, up, down, x, n_out), repeats)
            if _kernels else None)
        rows.append((f"polyphase {up}/{down} n={n}", t_np, t_c))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5,
                    help="timing repeats per case (best-of)")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    rows = bench_sosfilt(rng, args.repeats) + bench_polyphase(rng, args.repeats)

    print(f"{'case':<28} {'numpy':>10} {'compiled':>10} {'speedup':>8}")
    for name, t_np, t_c in rows:
        if t_c is None:
            print(f"{name:<28} {t_np * 1e3:>8.2f}ms {'n/a':>10} {'n/a':>8}")
        else:
            print(f"{name:<28} {t_np * 1e3:>8.2f}ms {t_c * 1e3:>8.2f}ms "
                  f"{t_np / t_c:>7.1f}x")

    if _kernels is None:
        print("\ncompiled extension not available", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
