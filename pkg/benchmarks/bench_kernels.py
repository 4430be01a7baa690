"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--sizes 16 32 64] [--repeat 3] [--json FILE]

Prints best-of-``repeat`` wall times per kernel and grid size, the speedup,
and the largest relative difference between the two backends.
"""

import argparse
import json
import time

import numpy as np

from hyperwave.kernels import available_backends
from hyperwave.spectral import build_generator, grid


def _cases(N, rng):
    M = build_generator(0, grid(N), True)
    u = 1e-2 * rng.standard_normal(2 * N)
    nsteps = 2000
    h = 0.5 * 2.0 / N**2
    Ff = rng.standard_normal((nsteps + 1, 2 * N))
    Fh = rng.standard_normal((nsteps, 2 * N))
    return {
        "rk4_linear": (M.matrix, u, h, nsteps, 10),
        "rk4_cubic": (M.matrix, M.constant_images, u, h, nsteps, 10, 3.0 * np.sqrt(2.0), 1.0, 10.0),
        "rk4_forced": (M.matrix, u, h, Ff, Fh),
    }


_SCALAR = {
    "hyp_series": [(0.5, 1.5, 2.5, 0.3 + 0.1j), (1.25, -0.75, 0.3, -0.55), (2.0, 3.5, 1.5, 0.59)],
    "taylor_step": [(0.5, 1.5, 2.5, 0.5, 1.2, 0.7, 0.2), (1.25, 2.25, 1.5, 0.7 + 0.1j, 2.0, 3.0, 0.1)],
}


def _first(x):
    return x[0] if isinstance(x, tuple) else x


def _time(f, args, repeat, inner=1):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        for _ in range(inner):
            out = f(*args)
        best = min(best, (time.perf_counter() - t) / inner)
    return best, out


def run(sizes, repeat):
    backends = available_backends()
    rng = np.random.default_rng(20240101)
    rows = []
    for N in sizes:
        for name, args in _cases(N, rng).items():
            res = {b: _time(getattr(m, name), args, repeat) for b, m in backends.items()}
            rows.append(_row(name, N, res))
    for name, arglist in _SCALAR.items():
        for k, args in enumerate(arglist):
            res = {b: _time(getattr(m, name), args, repeat, inner=200) for b, m in backends.items()}
            rows.append(_row(name, f"case{k}", res))
    return rows


def _row(name, size, res):
    row = {"kernel": name, "size": size}
    for b, (t, _) in res.items():
        row[f"t_{b}"] = t
    if "cython" in res:
        ref = np.asarray(_first(res["python"][1]))
        got = np.asarray(_first(res["cython"][1]))
        row["speedup"] = res["python"][0] / res["cython"][0]
        row["max_rel_diff"] = float(np.max(np.abs(got - ref)) / max(np.max(np.abs(ref)), 1e-300))
    return row


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[16, 32, 64])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", default=None, help="also write the rows to this file")
    a = ap.parse_args()
    rows = run(a.sizes, a.repeat)
    if "cython" not in available_backends():
        print("compiled backend not built; timing the pure-Python kernels only")
    print(f"{'kernel':<12} {'size':>6} {'python [s]':>12} {'cython [s]':>12} {'speedup':>9} {'max rel diff':>13}")
    for r in rows:
        print(f"{r['kernel']:<12} {str(r['size']):>6} {r['t_python']:>12.3e} {r.get('t_cython', float('nan')):>12.3e} "
              f"{r.get('speedup', float('nan')):>9.1f} {r.get('max_rel_diff', float('nan')):>13.1e}")
    if a.json:
        with open(a.json, "w") as fh:
            json.dump(rows, fh, indent=1)


if __name__ == "__main__":
    main()
