"""Time the numba loop kernels against the numpy kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--samples 32768]

Both flavours are imported side by side from ``bosetele.kernels.IMPLEMENTATIONS``,
so the env flag is irrelevant here. Compilation happens in a warm-up call
and is reported separately.
"""
import argparse
import time

import numpy as np

from bosetele.kernels import IMPLEMENTATIONS
from bosetele.metrics import haar_coefficients
from bosetele.resources import ResourceKind, ResourceSpec, build_resource

CASES = [(1, 10), (10, 100), (10, 1000), (50, 300)]  # (N, nu)


def _best(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--samples", type=int, default=32768)
    args = parser.parse_args()

    impls = sorted(IMPLEMENTATIONS)
    if "numba" not in impls:
        print("numba not available; timing the numpy kernels only")
    print(f"{'kernel':<22}{'N':>4}{'nu':>6}" + "".join(f"{name:>12}" for name in impls) + f"{'speedup':>10}")
    for n_in, nu in CASES:
        res = build_resource(ResourceSpec(ResourceKind.SU2_COHERENT, nu, xi=0.4, theta=0.3))
        rho, absrho = res.matrix, res.abs_matrix
        c = haar_coefficients(n_in + 1, 1, 0, args.samples)
        p, a = np.abs(c) ** 2, np.abs(c)
        jobs = {
            "band_sums": (rho, absrho, n_in),
            "fidelity_samples": (p, np.ascontiguousarray(rho.real), n_in),
            "entanglement_samples": (a, absrho, n_in),
        }
        for kernel, kargs in jobs.items():
            timings = {}
            for name in impls:
                fn = IMPLEMENTATIONS[name][kernel]
                t0 = time.perf_counter()
                fn(*kargs)  # warm-up, includes any compilation
                warm = time.perf_counter() - t0
                timings[name] = _best(fn, kargs, args.repeat)
                if name == "numba" and n_in == CASES[0][0] and nu == CASES[0][1]:
                    print(f"  (first numba call of {kernel}: {warm * 1e3:.1f} ms)")
            cells = "".join(f"{timings[name] * 1e3:>10.3f}ms" for name in impls)
            speed = timings["numpy"] / timings["numba"] if "numba" in timings else float("nan")
            print(f"{kernel:<22}{n_in:>4}{nu:>6}{cells}{speed:>9.2f}x")


if __name__ == "__main__":
    main()
