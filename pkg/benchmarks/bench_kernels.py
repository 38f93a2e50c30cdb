"""Compare the compiled and numpy kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints the best wall time per kernel and backend, the speed-up, and whether
the two backends agree on the benchmark inputs.
"""

import argparse
import time

import numpy as np

from feprob import basis, kernels


def best_of(func, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        result = func()
        times.append(time.perf_counter() - start)
    return min(times), result


def cases():
    key = kernels.stream_key(2024)
    yield "mc_count 1e6 pairs", lambda be: be.mc_count(1.0, 0.6, key, 0, 1_000_000)
    yield "mc_count 1e7 pairs", lambda be: be.mc_count(1.0, 0.6, key, 0, 10_000_000)
    for n, k, npts in [(2, 4, 20_000), (3, 6, 10_000), (3, 8, 5_000)]:
        pts = basis.sample_simplex(n, npts, np.random.default_rng(0))
        idx = basis.index_array(n, k)
        yield f"tabulate n={n} k={k} {npts} pts", (lambda be, idx=idx, pts=pts, k=k: be.tabulate(idx, pts, k))


def same(a, b):
    if isinstance(a, tuple):
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    return a == b


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    names = kernels.available_backends()
    print(f"backends: {', '.join(names)} (default {kernels.BACKEND})")
    if "cython" not in names:
        print("compiled kernels not built; only the numpy timings are shown")
    header = f"{'case':<32}" + "".join(f"{n:>12}" for n in names) + f"{'speed-up':>10}{'equal':>8}"
    print(header)
    for label, run in cases():
        timings, results = [], []
        for name in names:
            t, r = best_of(lambda: run(kernels.get_backend(name)), args.repeat)
            timings.append(t)
            results.append(r)
        line = f"{label:<32}" + "".join(f"{t * 1e3:>10.1f}ms" for t in timings)
        if len(names) == 2:
            line += f"{timings[1] / timings[0]:>9.1f}x{str(same(*results)):>8}"
        print(line)


if __name__ == "__main__":
    main()
