"""Benchmark: compiled stepping kernel vs the pure-Python twin.

Times the two hot loops on representative workloads and prints steps/s
and the speedup. Run with `python benchmarks/bench_kernels.py`.
"""

import time

import numpy as np

from chemoseek import NoiseParams
from chemoseek._backend import HAVE_COMPILED, get_impl
from chemoseek.engine import encode_growth
from chemoseek.growth import Haldane
from chemoseek.noise import kernel_code

GCODE = encode_growth(Haldane(1.0, 1.0, 0.1))
NCODE = kernel_code(NoiseParams(omega=0.2, a=0.05, seed=0))


def time_fn(fn, *args, min_time=0.5):
    fn(*args)  # warm up
    n, elapsed = 0, 0.0
    while elapsed < min_time:
        t0 = time.perf_counter()
        fn(*args)
        elapsed += time.perf_counter() - t0
        n += 1
    return elapsed / n


def bench_continuous(impl, n_steps):
    return impl.run_continuous(
        GCODE, 1.0, 1.0, 1.0, 1e-3, 0.0, 1.0, 0.01, 0.99,
        0.5, 0.5, 0.5, 0.5, 0.01, n_steps, 100, 10_000, NCODE, 0.0)


def bench_single(impl, n_steps):
    return impl.run_single_param(
        GCODE, 1.0, 1.0, 0.0, 1.0, 0.45, 0.5, 0.5, 0.01, n_steps, NCODE, 0.0)


def main():
    workloads = [
        ("continuous seeker", bench_continuous, 100_000),
        ("act-and-wait window", bench_single, 100_000),
    ]
    backends = ["python"] + (["compiled"] if HAVE_COMPILED else [])
    print(f"backends available: {', '.join(backends)}")
    for name, fn, n_steps in workloads:
        rates = {}
        for backend in backends:
            dt = time_fn(fn, get_impl(backend), n_steps)
            rates[backend] = n_steps / dt
            print(f"{name:22s} {backend:9s} {dt * 1e3:8.1f} ms "
                  f"({rates[backend] / 1e6:6.2f} Msteps/s)")
        if "compiled" in rates:
            print(f"{name:22s} speedup   {rates['compiled'] / rates['python']:8.1f}x")
    if HAVE_COMPILED:
        a = bench_continuous(get_impl("python"), 20_000)
        b = bench_continuous(get_impl("compiled"), 20_000)
        match = np.array_equal(a[0], b[0]) and a[1] == b[1]
        print(f"backend agreement on 20k steps: "
              f"{'bit-identical' if match else 'MISMATCH'}")


if __name__ == "__main__":
    main()
