"""Compare the compiled and pure-Python hot loops.

    python3 benchmarks/bench_core.py [--n 20000] [--grid 101] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from funcldp import _backend


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--grid", type=int, default=101)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    compiled = _backend.compiled_core()
    cores = {"python": _backend.python_core}
    if compiled is None:
        print("compiled extension not built; timing the Python fallback only")
    else:
        cores["compiled"] = compiled

    r = np.random.default_rng(0)
    curves = np.ascontiguousarray(r.normal(size=(args.n, args.grid)))
    x = np.zeros(args.grid)
    w = np.full(args.grid, 1.0 / args.grid)
    dist = np.ascontiguousarray(r.random(args.n))
    y = np.ascontiguousarray(r.normal(size=args.n))
    code = (0, 1.0, 0.5)

    cases = {
        "l2_distances": lambda c: c.l2_distances(curves, x, w),
        "sup_distances": lambda c: c.sup_distances(curves, x),
        "nw_sums": lambda c: c.nw_sums(dist, y, 0.5, *code),
        "weighted_sums": lambda c: c.weighted_sums(dist, y),
    }
    print(f"n={args.n} grid={args.grid} best of {args.repeat}")
    print(f"{'operation':<16}" + "".join(f"{name:>14}" for name in cores) + f"{'speedup':>10}")
    for label, fn in cases.items():
        times = {name: min(timeit.repeat(lambda: fn(c), number=1, repeat=args.repeat)) for name, c in cores.items()}
        row = f"{label:<16}" + "".join(f"{times[name] * 1e3:>12.3f}ms" for name in cores)
        if "compiled" in times:
            row += f"{times['python'] / times['compiled']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
