"""Compare the numba and numpy GF(q) kernels.

    python3 benchmarks/bench_kernels.py [--q 3] [--batch 20000] [--repeat 5] [--end-to-end]

Kernel timings run in one process through the ``use_numba`` switch.  With
``--end-to-end`` an exhaustive semistability check is also timed in two
subprocesses, one with ``STABLAB_DISABLE_NUMBA=1``.
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from stablab import _accel, _kernels
from stablab.fields import GF

E2E_SNIPPET = """
import time, numpy as np
from stablab.fields import GF
from stablab import _accel
from stablab.quiver import QuiverSpec, random_representation, semistability_check
rng = np.random.default_rng(0)
quiver = QuiverSpec(2, ((1, 1), (1, 1)))
semistability_check(random_representation(GF({q}), quiver, (1, 1, 1, 1), rng), (1, 2), "exhaustive")  # warm-up
reps = [random_representation(GF({q}), quiver, (2, 3, 2, 3), rng) for _ in range(5)]
t = time.perf_counter()
for rep in reps:
    semistability_check(rep, (1, 2), "exhaustive")
print(time.perf_counter() - t, _accel.USE_NUMBA)
"""


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def bench(q: int, batch: int, repeat: int) -> list[tuple[str, float, float]]:
    ops = GF(q)
    rng = np.random.default_rng(1)
    stack = rng.integers(0, q, size=(batch, 4, 6))
    M = rng.integers(0, q, size=(60, 80))
    A = rng.integers(0, q, size=(40, 50))
    B = rng.integers(0, q, size=(50, 30))
    cases = {
        "batch_rank": lambda nb: _kernels.batch_rank(stack, ops.tables, use_numba=nb),
        "rref": lambda nb: _kernels.rref(M, ops.tables, use_numba=nb),
        "matmul": lambda nb: _kernels.matmul(A, B, ops.tables, use_numba=nb),
    }
    rows = []
    for name, fn in cases.items():
        a, b = fn(True), fn(False)
        same = all(np.array_equal(x, y) for x, y in zip(a, b)) if isinstance(a, tuple) else np.array_equal(a, b)
        if not same:
            raise SystemExit(f"{name}: backends disagree")
        rows.append((name, best_of(lambda: fn(True), repeat), best_of(lambda: fn(False), repeat)))
    return rows


def end_to_end(q: int) -> tuple[float, float]:
    out = {}
    for flag in ("0", "1"):
        env = dict(os.environ, STABLAB_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", E2E_SNIPPET.format(q=q)], env=env, capture_output=True, text=True, check=True)
        out[flag] = float(res.stdout.split()[0])
    return out["0"], out["1"]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--q", type=int, default=3)
    ap.add_argument("--batch", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    print(f"GF({args.q}), batch={args.batch}")
    print(f"{'kernel':<12}{'numba s':>12}{'numpy s':>12}{'speedup':>10}")
    for name, tn, tp in bench(args.q, args.batch, args.repeat):
        print(f"{name:<12}{tn:>12.5f}{tp:>12.5f}{tp / tn:>10.1f}")
    if args.end_to_end:
        tn, tp = end_to_end(args.q)
        print(f"{'exhaustive':<12}{tn:>12.5f}{tp:>12.5f}{tp / tn:>10.1f}")


if __name__ == "__main__":
    main()
