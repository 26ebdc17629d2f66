"""Compare the compiled and numpy kernel backends.

Times each pointwise kernel on a 128x128 (and 256x256) field, then one full
Sobolev free-energy solve per backend.  Run from the repository root:

    python3 benchmarks/bench_kernels.py
"""
import argparse
import importlib
import os
import subprocess
import sys
import timeit

import numpy as np

from sobograd import _kernels_py


def kernel_timings(impl, n: int, repeat: int = 5):
    rng = np.random.default_rng(0)
    psi = rng.standard_normal(n * n) + 1j * rng.standard_normal(n * n)
    d = rng.standard_normal(n * n) + 1j * rng.standard_normal(n * n)
    V = rng.random(n * n)
    U = np.ascontiguousarray(np.stack([psi, d]))
    D = np.ascontiguousarray(np.stack([d, psi]))
    rho = (np.abs(U) ** 2).sum(0)
    alpha = (U.real * D.real + U.imag * D.imag).sum(0)
    beta = (np.abs(D) ** 2).sum(0)
    calls = {
        "gpe_nonlinear": lambda: impl.gpe_nonlinear(psi, V, 100.0),
        "line_moments": lambda: impl.line_moments(psi, d),
        "saturable_terms": lambda: impl.saturable_terms(U, 0.5),
        "saturable_line_delta": lambda: impl.saturable_line_delta(rho, alpha, beta, 0.1, 0.5),
        "error_residual": lambda: impl.error_residual(U, D, 0.5),
        "error_line_value": lambda: impl.error_line_value(U, D, U, D, 0.1, 0.5),
        "error_gradient_combine": lambda: impl.error_gradient_combine(U, D, U, 0.5),
    }
    out = {}
    for name, fn in calls.items():
        number = 20
        out[name] = min(timeit.repeat(fn, number=number, repeat=repeat)) / number * 1e6
    return out


SOLVE = """
import time
from sobograd.kernels import BACKEND
from sobograd.problems import solve_gpe_ground, solve_excited, FAMILIES, optics_grid
from sobograd.functionals import OpticsParams
from sobograd.descent import DescentConfig
from dataclasses import replace
t = time.perf_counter()
rep = solve_gpe_ground("A", "fes")
t1 = time.perf_counter() - t
t = time.perf_counter()
seed = replace(FAMILIES["vortex"], norms=(60.0, 60.0), width=2.0)
rep2 = solve_excited(OpticsParams(mu_u=0.5), seed, DescentConfig(max_iters=1500), grid=optics_grid(64, 32.0))
t2 = time.perf_counter() - t
print(f"{BACKEND}: case A FES {rep.iterations} it {t1:.2f} s; vortex excited 1500 it {t2:.2f} s")
"""


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="128,256")
    ap.add_argument("--skip-solve", action="store_true")
    args = ap.parse_args()
    try:
        compiled = importlib.import_module("sobograd._kernels")
    except ImportError:
        sys.exit("compiled extension not built; run `pip install -e . --no-build-isolation` first")
    for n in (int(v) for v in args.sizes.split(",")):
        fast, slow = kernel_timings(compiled, n), kernel_timings(_kernels_py, n)
        print(f"\n{n}x{n} field, microseconds per call")
        print(f"{'kernel':<24}{'cython':>10}{'numpy':>10}{'speedup':>9}")
        for name in fast:
            print(f"{name:<24}{fast[name]:>10.1f}{slow[name]:>10.1f}{slow[name] / fast[name]:>9.2f}")
    if not args.skip_solve:
        print("\nend-to-end solves")
        for flag in ("0", "1"):
            env = dict(os.environ, SOBOGRAD_PURE_PYTHON=flag)
            subprocess.run([sys.executable, "-c", SOLVE], env=env, check=True)


if __name__ == "__main__":
    main()
