#!/usr/bin/env python3
"""Benchmark: compiled kernels vs the pure-numpy fallback.

Times the hot operations behind the coverage studies (Beta-Binomial pmf
evaluation and the per-replication full-conformal mask) plus one
study-level measurement, and prints the speedups.

Run from the repo root:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from confbayes._kernels import _pk

try:
    from confbayes._kernels import _ck
except ImportError:
    _ck = None


def timeit(fn, *args, repeat=5, inner=200):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / inner)
    return best


def bench_kernels():
    rng = np.random.default_rng(0)
    ys = rng.integers(0, 21, 20)
    rows = []

    for label, args, inner in (
        ("bb_logpmf_all m=20", (20, 14.5, 6.5), 2000),
        ("bb_logpmf_all m=500", (500, 140.5, 360.5), 200),
    ):
        t_p = timeit(_pk.bb_logpmf_all, *args, inner=inner)
        t_c = timeit(_ck.bb_logpmf_all, *args, inner=inner) if _ck else float("nan")
        rows.append((label, t_p, t_c))

    for sid, name in ((0, "ppd"), (1, "bres"), (2, "qbres"), (3, "dbres")):
        args = (ys, 20, 0.5, 0.5, 2, sid, 0.1)
        t_p = timeit(_pk.bb_full_cp_mask, *args, inner=500)
        t_c = timeit(_ck.bb_full_cp_mask, *args, inner=500) if _ck else float("nan")
        rows.append((f"full_cp_mask {name}", t_p, t_c))

    xs = rng.normal(size=2001)
    t_p = timeit(_pk.t_logpdf, xs, 22.0, 0.3, 1.7, inner=500)
    t_c = timeit(_ck.t_logpdf, xs, 22.0, 0.3, 1.7, inner=500) if _ck else float("nan")
    rows.append(("t_logpdf x2001", t_p, t_c))

    print(f"{'operation':<24} {'pure':>12} {'compiled':>12} {'speedup':>9}")
    for label, t_p, t_c in rows:
        sp = t_p / t_c if t_c == t_c else float("nan")
        print(f"{label:<24} {t_p * 1e6:>10.1f}us {t_c * 1e6:>10.1f}us {sp:>8.1f}x")


def bench_study():
    import os
    import subprocess
    import sys

    code = (
        "import time, confbayes.sim as S;"
        "t0=time.time();"
        "S.run_study(S.StudyConfig(n_rep=200));"
        "print(f'{time.time()-t0:.2f}')"
    )
    print(f"\n{'200-replication study (10 methods)':<40}")
    for env_label, env_extra in (("compiled", {}), ("pure", {"CONFBAYES_PURE_PYTHON": "1"})):
        env = dict(os.environ, **env_extra)
        out = subprocess.run(
            [sys.executable, "-c", code], capture_output=True, text=True, env=env
        )
        print(f"  {env_label:<10} {out.stdout.strip()}s")


if __name__ == "__main__":
    if _ck is None:
        print("compiled backend not built; timing the fallback only")
    bench_kernels()
    bench_study()
