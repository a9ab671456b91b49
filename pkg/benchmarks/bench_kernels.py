"""Numba vs numpy timings for the hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Both variants are called directly, so FRACWAVE_NUMBA does not matter here.
The first numba call (compilation, or cache load) is excluded from timing.
"""
import argparse
import timeit

import numpy as np

from fracwave import kernels as kn
from fracwave._accel import HAVE_NUMBA


def cases(rng):
    u = rng.uniform(-4.0, 4.0, 200_000)
    a, c = kn._agm_ladder(0.9)
    yield "jacobi dn (2e5 pts)", (lambda: kn._dn_numba(u, a, c)), (lambda: kn._dn_numpy(u, a, c))

    K = 512
    sym = np.arange(K + 1, dtype=float) ** 1.5
    ac = rng.normal(size=2 * K + 1) / (1 + np.arange(2 * K + 1)) ** 2
    asn = np.zeros(2 * K + 1)
    yield ("trig operator (K=512)", lambda: kn._trig_operator_loops(sym, ac, asn),
           lambda: kn._trig_operator_numpy(sym, ac, asn))

    b = rng.normal(size=1024) / (1 + np.arange(1024)) ** 2
    yield ("cosine convolution (K=1024)", lambda: kn._cosine_convolution_loops(b),
           lambda: kn._cosine_convolution_numpy(b))

    m = rng.normal(size=(400, 400))
    m = m + m.T
    yield ("tridiagonalize (400)", lambda: kn._tridiagonalize_loops(m.copy()),
           lambda: kn._tridiagonalize_numpy(m.copy()))

    d, e = kn._tridiagonalize_numpy(m.copy())
    yield ("implicit QL (400)", lambda: kn._tql_loops(d.copy(), e.copy(), 60),
           lambda: kn._tql_numpy(d.copy(), e.copy(), 60))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba not installed; both columns run the numpy path")
    rng = np.random.default_rng(0)
    print("%-30s %12s %12s %9s" % ("kernel", "numba [ms]", "numpy [ms]", "speedup"))
    for name, fast, slow in cases(rng):
        fast()  # compile / load cache
        tf = min(timeit.repeat(fast, number=1, repeat=args.repeat))
        ts = min(timeit.repeat(slow, number=1, repeat=max(1, args.repeat // 2)))
        print("%-30s %12.3f %12.3f %8.1fx" % (name, 1e3 * tf, 1e3 * ts, ts / tf))


if __name__ == "__main__":
    main()
