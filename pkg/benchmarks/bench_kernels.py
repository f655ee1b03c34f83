"""Time the compiled kernels against the numpy fallback on realistic inputs.

    python benchmarks/bench_kernels.py [--repeat N]

Prints one line per kernel with the best-of-N time for each backend, the
speed-up and the largest output difference relative to the largest output.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from fisherinfo import _kernels_py

try:
    from fisherinfo import _kernels
except ImportError:  # extension not built
    _kernels = None


def _cases():
    rng = np.random.default_rng(7)
    # posterior moments: a 1025-point prior, targets on the same grid, sigma^2 = 0.25
    n = 1025
    h = 42.8 / (n - 1)
    x = -21.4 + h * np.arange(n)
    wf = np.exp(-0.5 * x * x) / np.sqrt(2 * np.pi) * h
    mean = 0.7 * x  # not the posterior mean (0.8 x), so the sum is far from zero
    wx = np.full(n, h)
    # Monte Carlo binning: one chunk of 2^20 samples over 64 x 64 bins
    m = 1 << 20
    nb = 64 * 64
    bins = rng.integers(0, nb, m).astype(np.int64)
    x1, x2 = rng.standard_normal(m), rng.standard_normal(m)
    y = x1 + x2 + 0.1 * rng.standard_normal(m)
    coef = np.ascontiguousarray(rng.standard_normal((nb, 3)))
    keep = np.ones(nb, dtype=bool)
    return {
        "gauss_moments": (x[0], h, wf, x, 0.25),
        "orthogonality_sum": (x[0], h, wf, x, wx, mean, 0.25),
        "binned_regression_stats": (bins, x1, x2, y, nb),
        "binned_residual_sums": (bins, x1, x2, y, coef, keep),
    }


def _reldiff(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-300))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _kernels is None:
        print("compiled extension not available; build with `pip install -e . --no-build-isolation`")
    print(f"{'kernel':<26}{'python [ms]':>12}{'cython [ms]':>13}{'speed-up':>10}{'rel. diff':>12}")
    for name, case in _cases().items():
        py = getattr(_kernels_py, name)
        t_py = min(timeit.repeat(lambda: py(*case), number=1, repeat=args.repeat)) * 1e3
        if _kernels is None:
            print(f"{name:<26}{t_py:>12.2f}{'-':>13}{'-':>10}{'-':>12}")
            continue
        cy = getattr(_kernels, name)
        t_cy = min(timeit.repeat(lambda: cy(*case), number=1, repeat=args.repeat)) * 1e3
        diff = _reldiff(py(*case), cy(*case))
        print(f"{name:<26}{t_py:>12.2f}{t_cy:>13.2f}{t_py / t_cy:>10.1f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
