#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Runs each hot kernel on representative inputs and prints per-call timings
for both paths plus the speedup. The numba path is what the attack uses by
default; GREEDYFOOL_NO_NUMBA=1 selects the numpy path at import time.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from greedyfool import _kernels_numpy
from greedyfool.metrics import DEFAULT_PS_TABLE

try:
    from greedyfool import _kernels_numba
except ImportError:
    _kernels_numba = None


def _time(fn, repeats):
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=3000)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    image = rng.integers(0, 256, (32, 32, 3), dtype=np.uint8)
    adversarial = image.copy()
    for _ in range(8):
        adversarial[rng.integers(0, 32), rng.integers(0, 32)] = rng.integers(0, 256, 3)
    weights = rng.normal(0.0, 0.125, (10, 64))
    cum = DEFAULT_PS_TABLE.cumulative
    out = np.empty(9)

    cases = {
        "window_sd": lambda impl: impl.window_sd(image, 16, 16, 1),
        "window_max": lambda impl: impl.window_max(image, 0, 0, 2),
        "integ_loss_terms": lambda impl: impl.integ_loss_terms(
            image, 10, 12, 200, 40, 9, cum, 0.299, 0.587, 0.114, 1.0, out
        ),
        "image_pair_loss": lambda impl: impl.image_pair_loss(
            image, adversarial, cum, 0.299, 0.587, 0.114, 1.0
        ),
        "toy_forward": lambda impl: impl.toy_forward(image, weights),
    }

    print(f"{'kernel':<18} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for name, call in cases.items():
        numpy_t = _time(lambda: call(_kernels_numpy), args.repeats)
        if _kernels_numba is None:
            print(f"{name:<18} {numpy_t * 1e6:>10.2f}us {'n/a':>12} {'n/a':>9}")
            continue
        call(_kernels_numba)  # JIT warmup
        ref = call(_kernels_numpy)
        got = call(_kernels_numba)
        np.testing.assert_allclose(np.asarray(got), np.asarray(ref), rtol=1e-9, atol=1e-12)
        numba_t = _time(lambda: call(_kernels_numba), args.repeats)
        print(
            f"{name:<18} {numpy_t * 1e6:>10.2f}us {numba_t * 1e6:>10.2f}us "
            f"{numpy_t / numba_t:>8.1f}x"
        )


if __name__ == "__main__":
    main()
