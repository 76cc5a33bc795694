"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from fracpat import kernels
from fracpat.integral import QuadraticPattern, _t_nodes
from fracpat.measure import GridMeasure, mollify
from fracpat.sampled import natural_second_derivatives
from fracpat.setgen import percolation


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    rng = np.random.default_rng(0)
    w = rng.random(1 << 12)
    xi = np.linspace(-512.0, 512.0, 4001)
    yield "cell_sum", lambda k: k.cell_sum(w, 2.0 ** -12, xi)

    f = mollify(GridMeasure.lebesgue(8), 1 / 32, 10)
    v = np.ascontiguousarray(np.vstack([f.values] * 3))
    m = np.ascontiguousarray(natural_second_derivatives(v, f.step))
    pat = QuadraticPattern(1.0, 0.0, 5)
    xs = np.ascontiguousarray(np.linspace(0.0, 1.0, 2048))
    wx = np.full(xs.shape, 1.0 / xs.size)
    ts, wt = _t_nodes(pat, 1 / 256)
    yield "trilinear_sums", lambda k: k.trilinear_sums(v, m, f.x0, f.step, v, m, f.x0, f.step,
                                                       xs, wx, ts, wt, 1.0, 0.0)

    s = percolation(0.03, 12, 7)
    mask = np.ascontiguousarray(s.mask, dtype=np.uint8)
    kept = np.ascontiguousarray(s.indices(), dtype=np.int64)
    yield "pattern_scan", lambda k: k.pattern_scan(mask, kept, 1, 1 << 10, 3.0, -0.75,
                                                   2.0 ** -12, True, 1e-9)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    impls = kernels.backends()
    print(f"{'kernel':<16}" + "".join(f"{name:>12}" for name in impls) + f"{'speedup':>10}")
    for name, fn in cases():
        times = {b: _best(lambda: fn(mod), args.repeat) for b, mod in impls.items()}
        row = f"{name:<16}" + "".join(f"{times[b]:>11.4f}s" for b in impls)
        if "compiled" in times:
            row += f"{times['python'] / times['compiled']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
