"""Time the numba and numpy kernel paths on per-trial workloads.

    python benchmarks/bench_kernels.py [--sizes 1000 100000] [--repeat 5]

The balance kernel is what a Rayleigh Monte Carlo run calls once per trial
batch; the ARQ kernel turns uniform draws into attempt counts.
"""

import argparse
import math
import time

import numpy as np

from semlat import _kernels
from semlat.channel import gain_for_average_snr
from semlat.config import default_system
from semlat.optimizer import _kernel_args


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def balance_case(n, rng):
    sys = default_system()
    g = gain_for_average_snr(sys, 10 ** 1.5)
    g0 = g * rng.standard_exponential(n)
    g1 = g * rng.standard_exponential(n)
    return _kernel_args(sys, g0, g1, 1e-5)


def arq_case(n, rng):
    u = 1.0 - rng.random((n, 2))
    s = np.broadcast_to(rng.uniform(0.5, 1.0, (n, 1)), (n, 2))
    return u, s


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1_000, 32_768, 262_144])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        print("numba unavailable (or SEMLAT_DISABLE_NUMBA set); timing numpy path only")

    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<10}{'n':>10}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}{'max rel diff':>14}")
    for n in args.sizes:
        kw = balance_case(n, rng)
        u, s = arq_case(n, rng)
        cases = [
            ("balance", lambda: _kernels.balance_split_numpy(**kw),
             (lambda: _kernels.balance_split_numba(**kw)) if _kernels.HAVE_NUMBA else None),
            ("arq", lambda: _kernels.arq_attempts_numpy(u, s, 10_000)[0],
             (lambda: _kernels.arq_attempts_numba(u, s, 10_000)[0]) if _kernels.HAVE_NUMBA else None),
        ]
        for name, f_np, f_nb in cases:
            t_np, ref = best_of(f_np, args.repeat)
            if f_nb is None:
                print(f"{name:<10}{n:>10}{1e3 * t_np:>12.2f}{'-':>12}{'-':>10}{'-':>14}")
                continue
            f_nb()  # compile / load cache outside the timed runs
            t_nb, got = best_of(f_nb, args.repeat)
            diff = float(np.max(np.abs(got - ref) / np.maximum(np.abs(ref), 1e-300)))
            speed = t_np / t_nb if t_nb > 0 else math.inf
            print(f"{name:<10}{n:>10}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{speed:>9.1f}x{diff:>14.1e}")


if __name__ == "__main__":
    main()
