"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json]
"""

import argparse
import json
import sys
import timeit

import numpy as np

from vertexkit import _core
from vertexkit.fmatrix import _diag_sums, f00
from vertexkit.taylor import SumConfig, mode_pair, required_length


def cases(N, L):
    cfg = SumConfig(2048, "richardson1", 1e-4)
    a, b = mode_pair(3, max(L, required_length(cfg, N) + 2))
    de, do, _ = _diag_sums(N, a, b, cfg)
    shifts = np.arange(2.0, 2.0 * (N // 2) + 1, 2.0)
    checkpoints = np.array([1024, 2048], dtype=np.int64)
    return {
        f"taylor_recurrence L={L}": lambda k: k.taylor_recurrence(1 / 3, L),
        f"parity_partial_sums {shifts.size} shifts": lambda k: k.parity_partial_sums(
            a.coeffs, 1, shifts, 2, checkpoints
        ),
        f"f_closed_form N={N}": lambda k: k.f_closed_form(a.coeffs, b.coeffs, f00(), N, de, do),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=256)
    ap.add_argument("--L", type=int, default=200000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)

    backends = _core.backends()
    if "cython" not in backends:
        print("compiled extension not available; timing the fallback only", file=sys.stderr)
    rows = []
    for name, fn in cases(args.N, args.L).items():
        row = {"case": name}
        for label, mod in backends.items():
            fn(mod)  # warm-up
            row[label] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        if "cython" in row:
            row["speedup"] = row["python"] / row["cython"]
        rows.append(row)

    if args.json:
        print(json.dumps(rows, indent=1))
        return
    print(f"{'case':40s} {'python':>11s} {'cython':>11s} {'speedup':>8s}")
    for r in rows:
        cy = f"{r['cython'] * 1e3:9.3f}ms" if "cython" in r else f"{'n/a':>11s}"
        sp = f"{r['speedup']:7.1f}x" if "speedup" in r else ""
        print(f"{r['case']:40s} {r['python'] * 1e3:9.3f}ms {cy} {sp}")


if __name__ == "__main__":
    main()
