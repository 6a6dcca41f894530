"""Time the compiled and numpy RLS kernels on identical workloads.

    python benchmarks/bench_rls.py [--repeat 3]
"""

import argparse
import time

import numpy as np

from koopctl import kernels
from koopctl.ident import RlsEstimator

# (label, regressor dim, outputs, samples)
CASES = [("linear 5 robots", 60, 30, 5000), ("bilinear 3 robots", 682, 18, 2000)]


def run(backend, d, q, n, repeat):
    rng = np.random.default_rng(0)
    Z, Y = rng.normal(size=(n, d)), rng.normal(size=(n, q))
    best, theta = np.inf, None
    for _ in range(repeat):
        est = RlsEstimator(d, q, backend=backend)
        t0 = time.perf_counter()
        est.fit(Z, Y)
        best = min(best, time.perf_counter() - t0)
        theta = est.theta
    return best, theta


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    if len(backends) == 1:
        print("compiled kernel not built; timing the numpy kernel only")
    for label, d, q, n in CASES:
        times, thetas = {}, {}
        for b in backends:
            times[b], thetas[b] = run(b, d, q, n, args.repeat)
        line = f"{label:18s} d={d:4d} n={n:5d}  " + "  ".join(
            f"{b}: {times[b] * 1e6 / n:8.1f} us/sample" for b in backends)
        if len(backends) == 2:
            diff = np.max(np.abs(thetas["python"] - thetas["cython"]))
            line += f"  speedup {times['python'] / times['cython']:.2f}x  max|dtheta| {diff:.1e}"
        print(line)


if __name__ == "__main__":
    main()
