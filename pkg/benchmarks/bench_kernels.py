"""Time the curvature / Jacobian kernels on both backends.

Usage::

    python benchmarks/bench_kernels.py [--sizes 4 8 16 32] [--repeat 20]

Meshes are regular triangulated tori from :func:`idealflow.complex.grid_torus`
with random radii.  The numba timing excludes the first (compiling) call.
"""

import argparse
import time

import numpy as np

from idealflow import _kernels
from idealflow.complex import grid_torus


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 16, 32])
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = ["numpy"] + (["numba"] if _kernels.NUMBA_AVAILABLE else [])
    rng = np.random.default_rng(args.seed)
    print(f"{'m':>4} {'N':>6} {'E':>6} {'geometry':>10} " + " ".join(f"{b:>12}" for b in backends)
          + ("   speedup" if len(backends) == 2 else ""))
    for m in args.sizes:
        cx, theta = grid_torus(m)
        n = cx.num_vertices
        r = np.exp(rng.uniform(np.log(0.1), np.log(10.0), n))
        for hyperbolic in (True, False):
            row = []
            for b in backends:
                call = lambda: _kernels.curvature_jacobian(n, cx.tail, cx.head, r, theta, hyperbolic, backend=b)
                call()  # warm-up (numba compile or cache load)
                row.append(best_of(call, args.repeat))
            line = f"{m:>4} {n:>6} {cx.num_edges:>6} {'hyperbolic' if hyperbolic else 'euclidean':>10} "
            line += " ".join(f"{t * 1e6:>10.1f}us" for t in row)
            if len(row) == 2:
                line += f"   {row[0] / row[1]:>6.1f}x"
            print(line)


if __name__ == "__main__":
    main()
