"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--json]

Each case runs both backends on the same inputs, checks that they agree,
and reports the best wall time over the repeats.
"""
from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from symlab import kernels
from symlab.classify import sphere_points
from symlab.operators import catalog


def _cases(seed: int):
    rng = np.random.default_rng(seed)
    real_pts = sphere_points(3, 4096, seed)
    cplx_pts = sphere_points(6, 4096, seed)
    for name, params in (("symgrad", {"n": 3}), ("deviatoric", {"n": 3}), ("Dk", {"n": 3, "k": 3})):
        op = catalog(name, params)
        args = (op.coeff_array, op.exponents, real_pts)
        yield f"sigma_min real {name} x{len(real_pts)}", "sigma_min_batch_real", args
        cargs = (op.coeff_array, op.exponents, cplx_pts[:, :3], cplx_pts[:, 3:])
        yield f"sigma_min complex {name} x{len(cplx_pts)}", "sigma_min_batch_complex", cargs
    x = rng.uniform(0.0, 1.0, 200_000)
    yield f"cantor x{x.size}", "cantor_function", (x,)


def run(repeat: int, seed: int) -> list[dict]:
    if kernels.compiled is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation` first")
    rows = []
    for label, fname, args in _cases(seed):
        fast = getattr(kernels.compiled, fname)
        slow = getattr(kernels.fallback, fname)
        diff = float(np.max(np.abs(np.asarray(fast(*args)) - np.asarray(slow(*args)))))
        t_fast = min(timeit.repeat(lambda: fast(*args), number=1, repeat=repeat))
        t_slow = min(timeit.repeat(lambda: slow(*args), number=1, repeat=repeat))
        rows.append({"case": label, "compiled_s": t_fast, "python_s": t_slow,
                     "speedup": t_slow / t_fast if t_fast > 0 else float("inf"), "max_abs_diff": diff})
    return rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--json", action="store_true", help="print JSON instead of a table")
    args = parser.parse_args(argv)
    rows = run(args.repeat, args.seed)
    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    width = max(len(r["case"]) for r in rows)
    print(f"{'case':<{width}}  {'compiled':>10}  {'python':>10}  {'speedup':>8}  {'max diff':>9}")
    for r in rows:
        print(f"{r['case']:<{width}}  {r['compiled_s']:>10.4f}  {r['python_s']:>10.4f}  "
              f"{r['speedup']:>7.1f}x  {r['max_abs_diff']:>9.1e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
