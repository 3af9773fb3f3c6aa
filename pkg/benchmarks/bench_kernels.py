"""Compare the compiled and pure-Python integrator kernels.

The backend is fixed at import time, so each one is timed in its own
subprocess (``POLYBALL_PURE_PYTHON=1`` selects the fallback).

    python3 benchmarks/bench_kernels.py [--repeat N] [--json]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, sys, timeit
import numpy as np
from polyball import BACKEND, atlas
from polyball.constitutive import Material
from polyball.static_ball import CenterData, integrate_static

repeat = int(sys.argv[1])
cases = {
    "fluid ball": Material(0.5, 2.0, 2.0),
    "type A ball": Material(0.25, 1.5, 1.2),
    "type B ball": Material(0.25, 0.8, -0.5),
}
out = {"backend": BACKEND, "times": {}, "R": {}}
for name, mat in cases.items():
    prof = integrate_static(CenterData(), mat)
    out["R"][name] = prof.R
    out["times"][name] = min(timeit.repeat(lambda: integrate_static(CenterData(), mat),
                                           number=1, repeat=repeat))
grid = atlas.static_grid(0.25, 12, 12)
out["times"]["12x12 scan"] = min(timeit.repeat(
    lambda: atlas.scan_static_region(0.25, grid, workers=1, gammastar=False),
    number=1, repeat=max(1, repeat // 3)))
print(json.dumps(out))
"""


def run_backend(pure: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env["POLYBALL_PURE_PYTHON"] = "1" if pure else "0"
    res = subprocess.run([sys.executable, "-c", WORKLOAD, str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true", help="print raw timings as JSON")
    args = ap.parse_args(argv)

    fast = run_backend(False, args.repeat)
    slow = run_backend(True, args.repeat)
    if args.json:
        print(json.dumps({"compiled": fast, "python": slow}, indent=2))
        return 0
    if fast["backend"] != "cython":
        print("compiled kernel not available; both runs used the Python fallback")
    print(f"{'workload':<14}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for key, t_fast in fast["times"].items():
        t_slow = slow["times"][key]
        print(f"{key:<14}{t_fast * 1e3:>10.2f}ms{t_slow * 1e3:>10.2f}ms{t_slow / t_fast:>9.1f}x")
    for key, r in fast["R"].items():
        other = slow["R"][key]
        if r is None or other is None:
            same = r is other
        else:
            same = abs(r - other) <= 1e-12 * abs(r)
        print(f"{key}: R agrees across backends: {same}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
