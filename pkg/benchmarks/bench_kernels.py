"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--m 2000] [--repeat 20]

Inputs mirror one simulation replication: m p-values, a 41-level screening
grid and the 20-point alpha grid.
"""
import argparse
import math
import timeit

import numpy as np

from usfdr import _fallback

try:
    from usfdr import _kernels
except ImportError:
    _kernels = None


def cases(m, rng):
    t = np.abs(rng.standard_normal(m)) + np.r_[np.full(m // 20, 3.0), np.zeros(m - m // 20)]
    p = np.sort(_fallback.t_two_sided_sf(t, 198.0))
    screen = np.abs(rng.standard_normal(m))
    levels = np.arange(41) / 10 * math.sqrt(math.log(m))
    alphas = np.arange(1, 21) / 20
    return {
        "t_two_sided_sf": lambda k: k.t_two_sided_sf(t, 198.0),
        "family_scan": lambda k: k.family_scan(p, screen, levels, alphas),
        "bh_counts": lambda k: k.bh_counts(p, alphas),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    backends = {"fallback": _fallback}
    if _kernels is None:
        print("compiled extension not built; timing the fallback only")
    else:
        backends["compiled"] = _kernels
    rng = np.random.default_rng(0)
    print(f"m = {args.m}, best of {args.repeat}, milliseconds per call")
    print(f"{'kernel':<16}" + "".join(f"{name:>12}" for name in backends) + f"{'speedup':>10}")
    for name, fn in cases(args.m, rng).items():
        times = {}
        for label, mod in backends.items():
            fn(mod)  # warm up
            times[label] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) * 1e3
        row = f"{name:<16}" + "".join(f"{times[label]:>12.3f}" for label in backends)
        if "compiled" in times:
            row += f"{times['fallback'] / times['compiled']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
