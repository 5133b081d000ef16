"""Time the compiled inner loops against their NumPy fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--sizes 4096 65536] [--repeat 20]

Prints one row per kernel and size, then an end-to-end steady-profile solve timed in two
subprocesses (with and without FPME_PURE_PYTHON=1).
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from fpme import _kernels_py

try:
    from fpme import _kernels
except ImportError:
    _kernels = None

END_TO_END = """
import time
from fractions import Fraction
from fpme import BACKEND
from fpme.line import LineGrid
from fpme.params import Params
from fpme.selfsim import solve_profile
start = time.perf_counter()
solve_profile(Params(1, Fraction(1, 2), 2), LineGrid(1024, 4.0))
print(BACKEND, time.perf_counter() - start)
"""


def cases(n: int, rng: np.random.Generator) -> dict:
    u = rng.random(n)
    au, w = rng.normal(size=(2, n))
    vel = rng.normal(size=n)
    rad = rng.random(n) * 10.0
    out = np.empty(n)
    return {
        "guarded_power": lambda k: k.guarded_power(u, 1 / 3, out),
        "euler_update": lambda k: k.euler_update(u, au, w, 1e-3, 0.1, out),
        "heun_combine": lambda k: k.heun_combine(u, au, out),
        "shell_sums": lambda k: k.shell_sums(u, rad, 0.01, 1000),
        "transport_rhs": lambda k: k.transport_rhs(u, vel, 0.01, out),
    }


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[4096, 65536])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the NumPy backend is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<15}{'n':>8}{'numpy [us]':>14}{'compiled [us]':>15}{'speedup':>9}")
    for n in args.sizes:
        for name, call in cases(n, rng).items():
            py = min(timeit.repeat(lambda: call(_kernels_py), number=1, repeat=args.repeat)) * 1e6
            if _kernels is None:
                print(f"{name:<15}{n:>8}{py:>14.1f}{'-':>15}{'-':>9}")
                continue
            cy = min(timeit.repeat(lambda: call(_kernels), number=1, repeat=args.repeat)) * 1e6
            print(f"{name:<15}{n:>8}{py:>14.1f}{cy:>15.1f}{py / cy:>9.2f}")
    if not args.skip_end_to_end:
        for pure in ("", "1"):
            env = dict(os.environ, FPME_PURE_PYTHON=pure)
            if not pure:
                env.pop("FPME_PURE_PYTHON")
            res = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True)
            if res.returncode:
                print(res.stderr, file=sys.stderr)
                return 1
            backend, secs = res.stdout.split()
            print(f"end-to-end profile solve ({backend}): {float(secs):.2f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
