"""Compare the compiled distance kernels against the NumPy fallback.

Run after `pip install -e .`:

    python benchmarks/bench_kernels.py --size 200000 --dim 32

Reports per-call latency for the three kernels on workloads shaped like the
index hot paths: full-matrix scans (brute force / IVF centroid step), small
gathers (HNSW neighbor expansion), and k-means assignment sweeps.
"""

from __future__ import annotations

import argparse
import time

import numpy as np


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_bench(size: int, dim: int, seed: int = 11) -> dict:
    from clarq import kernels

    rng = np.random.default_rng(seed)
    mat = rng.normal(size=(size, dim))
    q = rng.normal(size=dim)
    gather_idx = rng.integers(0, size, 32).astype(np.int64)
    cents = rng.normal(size=(64, dim))
    pts = mat[: min(size, 50_000)]

    results: dict[str, dict[str, float]] = {}
    impls = ["numpy"] if not kernels._ckern else ["compiled", "numpy"]
    for impl in impls:
        kernels._USE_COMPILED = impl == "compiled"
        full = _time(lambda: kernels.sq_dists(q, mat), 5)
        gather = _time(lambda: [kernels.sq_dists_gather(q, mat, gather_idx)
                                for _ in range(1000)], 3) / 1000
        assign = _time(lambda: kernels.assign_nearest(pts, cents), 3)
        results[impl] = {"full_scan_s": full, "gather32_us": gather * 1e6,
                         "assign_s": assign}
    kernels._USE_COMPILED = kernels._ckern is not None
    return results


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=200_000)
    parser.add_argument("--dim", type=int, default=32)
    args = parser.parse_args()

    results = run_bench(args.size, args.dim)
    print(f"matrix: {args.size} x {args.dim}")
    header = f"{'kernel':<14}" + "".join(f"{impl:>14}" for impl in results)
    print(header)
    for metric, label in (("full_scan_s", "full scan (s)"),
                          ("gather32_us", "gather32 (us)"),
                          ("assign_s", "assign (s)")):
        row = f"{label:<14}"
        for impl in results:
            row += f"{results[impl][metric]:>14.6f}"
        print(row)
    if "compiled" in results:
        ratio = results["numpy"]["gather32_us"] / results["compiled"]["gather32_us"]
        print(f"\ngather32 speedup (compiled vs numpy): {ratio:.1f}x")


if __name__ == "__main__":
    main()
