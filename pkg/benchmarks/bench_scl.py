"""Benchmark: compiled list-search kernel vs the pure-numpy fallback.

Usage: python benchmarks/bench_scl.py [--quick]
"""

import argparse
import time

import numpy as np

from wzlab import polar
from wzlab.polar import _kernel_py

try:
    from wzlab.polar import _sclcore
except ImportError:
    _sclcore = None


def level_pass_inputs(n, n_free, paths, seed):
    rng = np.random.default_rng(seed)
    fixed = np.full(n, -1, dtype=np.int8)
    rel = polar.load_reliability(n)
    fixed[rel[n_free:]] = 0
    llrs = rng.normal(0, 2, (paths, n))
    pm = np.zeros(paths)
    return llrs, pm, fixed


def bench(fn, llrs, pm, fixed, list_size, reps):
    t0 = time.perf_counter()
    for _ in range(reps):
        fn(llrs, pm, fixed, list_size, 0)
    return (time.perf_counter() - t0) / reps


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="fewer repetitions")
    args = ap.parse_args()
    reps_c, reps_py = (50, 5) if args.quick else (300, 20)

    print(f"{'config':<34}{'compiled':>12}{'fallback':>12}{'speedup':>9}")
    for n, n_free, L in ((256, 180, 8), (256, 120, 8), (1024, 700, 8), (256, 180, 32)):
        llrs, pm, fixed = level_pass_inputs(n, n_free, 1, seed=1)
        t_py = bench(_kernel_py.scl_pass, llrs, pm, fixed, L, reps_py)
        if _sclcore is None:
            print(f"n={n} free={n_free} list={L:<12}{'-':>12}{t_py * 1e3:>10.2f}ms")
            continue
        t_c = bench(_sclcore.scl_pass, llrs, pm, fixed, L, reps_c)
        label = f"n={n} free={n_free} list={L}"
        print(
            f"{label:<34}{t_c * 1e3:>10.2f}ms{t_py * 1e3:>10.2f}ms{t_py / t_c:>8.1f}x"
        )

    # end-to-end: one pcqmod block encode+decode
    from wzlab.codecs import PcqmodCodec, run_trial
    from wzlab import presets

    codec = PcqmodCodec(presets.SOURCE2_PCQMOD)
    rng = np.random.default_rng(2)
    y = rng.normal(0, 1, 256)
    x = y + rng.normal(0, 1, 256)
    d = -5 + 10 * rng.random(256)
    reps = 20 if args.quick else 100
    t0 = time.perf_counter()
    for _ in range(reps):
        run_trial(codec, x, y, dither=d)
    per_block = (time.perf_counter() - t0) / reps
    kernel = polar.kernel_name()
    print(f"\npcqmod block encode+decode ({kernel} kernel): {per_block * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
