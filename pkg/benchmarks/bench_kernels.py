"""Time the numpy and numba variants of each hot kernel on desk-scale inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

Numba timings exclude the first (compiling) call.
"""
import argparse
import timeit

import numpy as np

from transgauss import _kernels


def _inputs(rng):
    def pairs(m, d=4):
        p = rng.standard_normal((m, d))
        p /= np.linalg.norm(p, axis=1, keepdims=True)
        q = rng.standard_normal((m, d))
        q /= np.linalg.norm(q, axis=1, keepdims=True)
        v = rng.standard_normal((m, d))
        v -= np.sum(v * p, axis=1, keepdims=True) * p
        return p, q, v

    cen = rng.standard_normal((10_000, 4))
    cen /= np.linalg.norm(cen, axis=1, keepdims=True)
    smp = rng.standard_normal((4096, 4))
    smp /= np.linalg.norm(smp, axis=1, keepdims=True)
    return {
        "transport_closed": pairs(200_000),
        "transport_rk4": pairs(100) + (10_000,),
        "generalized_cross": (rng.standard_normal((100_000, 3, 4)),),
        "max_dot": (cen, smp),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    inputs = _inputs(rng)
    print(f"default backend: {_kernels.BACKEND}")
    print(f"{'kernel':<20}{'numpy [ms]':>14}{'numba [ms]':>14}{'speedup':>10}{'max |diff|':>14}")
    for name, (fn_np, fn_nb) in _kernels.KERNELS.items():
        a = inputs[name]
        ref, fast = fn_np(*a), fn_nb(*a)  # warm-up and compile
        t_np = min(timeit.repeat(lambda: fn_np(*a), number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(lambda: fn_nb(*a), number=1, repeat=args.repeat))
        diff = float(np.abs(np.asarray(ref) - np.asarray(fast)).max())
        print(f"{name:<20}{1e3 * t_np:>14.2f}{1e3 * t_nb:>14.2f}{t_np / t_nb:>10.1f}{diff:>14.2e}")


if __name__ == "__main__":
    main()
