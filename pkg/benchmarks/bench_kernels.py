"""Compare the compiled kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from qckmeans import _kernels


def cases(rng):
    amps = rng.standard_normal(1 << 14) + 1j * rng.standard_normal(1 << 14)
    amps /= np.linalg.norm(amps)
    factors = np.exp(1j * rng.uniform(0, 2 * np.pi, amps.size))
    n = 14
    Q = rng.standard_normal((n, n))
    Q = 0.5 * (Q + Q.T)
    c = rng.standard_normal(n)
    group_of = np.repeat(np.arange(2), 7).astype(np.int64)
    X = rng.standard_normal((20_000, 2))
    C = rng.standard_normal((10, 2))
    theta = np.pad(rng.uniform(0, 2 * np.pi, 200), (0, 56))
    h = 1 / np.sqrt(2)
    return {
        "apply_1q (14q)": lambda k: k.apply_1q(amps, 5, h, h, h, -h),
        "apply_xy (14q)": lambda k: k.apply_xy(amps, 2, 9, 0.3, 0.4),
        "apply_diag (14q)": lambda k: k.apply_diag(amps, factors),
        "controlled_phase_factors (9q)": lambda k: k.controlled_phase_factors(9, 8, 0, 8, theta),
        "qubo_energies (n=14)": lambda k: k.qubo_energies(Q, c, group_of, 2, 1.001),
        "nearest (N=20000, k=10)": lambda k: k.nearest(X, C),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if _kernels.compiled is None:
        print("compiled kernels not built; run: pip install -e . --no-build-isolation")
        return
    print(f"{'kernel':32s} {'numpy ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, fn in cases(np.random.default_rng(0)).items():
        t_py = min(timeit.repeat(lambda: fn(_kernels.pure), number=1, repeat=args.repeat)) * 1e3
        t_c = min(timeit.repeat(lambda: fn(_kernels.compiled), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:32s} {t_py:10.3f} {t_c:10.3f} {t_py / t_c:8.1f}x")


if __name__ == "__main__":
    main()
