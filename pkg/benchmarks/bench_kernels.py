"""Compare the compiled kernel with the pure-Python fallback.

Run ``python benchmarks/bench_kernels.py [--repeat N]``.  Each row times the
same workload on both backends, checks that the results are identical and
prints the speedup.  If the extension was not built only the fallback runs.
"""

from __future__ import annotations

import argparse
import random
import timeit
from fractions import Fraction as F

from aplab import _kernels_py as py

try:
    from aplab import _kernels as cy
except ImportError:
    cy = None


def _pl_data(n, rng):
    xs, ys = [], []
    x = y = F(rng.randint(-50, 0))
    for _ in range(n):
        x += F(rng.randint(1, 40), rng.randint(1, 9))
        y += F(rng.randint(1, 40), rng.randint(1, 9))
        xs.append(x)
        ys.append(y)
    return xs, ys, F(1), F(2)


def workloads(rng):
    data = [_pl_data(200, rng) for _ in range(8)]
    pts = sorted(F(rng.randint(-20000, 20000), rng.randint(1, 97)) for _ in range(2000))
    weights = [F(1, 8)] * 8
    probs = [F(rng.randint(1, 999), 1000) for _ in range(20)]
    shifts = [(F(rng.randint(-500, 500), 7), F(rng.randint(-500, 500), 11)) for _ in range(200)]

    def pl_eval(k):
        tabs = [k.PLTable(*d) for d in data]
        return [t.eval_many(pts) for t in tabs]

    def mixture_cdf(k):
        m = k.Mixture(weights, [k.PLTable(*d) for d in data])
        return [m.cdf(x) for x in pts[::10]]

    def mixture_invert(k):
        m = k.Mixture(weights, [k.PLTable(*d) for d in data])
        return [m.invert(p, F(1, 2**40)) for p in probs]

    def flow_distance(k):
        t = k.PLTable(*data[0])
        return [k.flow_sup_distance(t, s, u, F(-20), F(20)) for s, u in shifts]

    def reference_cdf(k):
        return [k.ref_cdf_inv(k.ref_cdf(x)) for x in pts]

    return [
        ("PL table evaluation (8 x 2000 points)", pl_eval),
        ("mixture CDF (200 points, 8 maps)", mixture_cdf),
        ("mixture inversion (20 probabilities, tol 2^-40)", mixture_invert),
        ("flow sup distance (200 shift pairs)", flow_distance),
        ("reference CDF round trip (2000 points)", reference_cdf),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = random.Random(args.seed)
    print(f"{'workload':<50} {'python (s)':>11} {'cython (s)':>11} {'speedup':>8}")
    for name, fn in workloads(rng):
        t_py = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat))
        if cy is None:
            print(f"{name:<50} {t_py:>11.4f} {'n/a':>11} {'n/a':>8}")
            continue
        if fn(py) != fn(cy):
            raise SystemExit(f"backend mismatch in {name!r}")
        t_cy = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat))
        print(f"{name:<50} {t_py:>11.4f} {t_cy:>11.4f} {t_py / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
