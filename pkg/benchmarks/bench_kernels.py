"""Compiled vs numpy kernels on random Gaussian inputs.

    python3 benchmarks/bench_kernels.py [--n 4 8 16] [--repeat 2000]

Prints one JSON line per (kernel, n) with microseconds per call for each
backend and the speed-up.  Outputs of both backends are compared first.
"""

import argparse
import json
import timeit

import numpy as np

from fgsim import kernels
from fgsim.gaussian_core import measure_probability, random_gaussian_state


def _cases(n, rng):
    a = random_gaussian_state(n, rng)
    b = random_gaussian_state(n, rng)
    gamma = np.asarray(a.cov, dtype=np.float64)
    p0 = measure_probability(a, 0)
    M = rng.normal(size=(2 * n, 2 * n)) + 1j * rng.normal(size=(2 * n, 2 * n))
    M = M - M.T
    na, nb = abs(a.amp), abs(b.amp)
    ov = (a.plus_space, b.plus_space, a.transition, b.transition,
          np.asarray(a.ref, dtype=np.int_), np.asarray(b.ref, dtype=np.int_),
          a.ref_amp / na, b.ref_amp / nb, 1e-12)
    bs = [random_gaussian_state(n, rng, bits=list(a.ref)) for _ in range(64)]
    row = (a.plus_space, a.transition, np.asarray(a.ref, dtype=np.int_), a.ref_amp / na,
           np.array([s.plus_space for s in bs]), np.array([s.transition for s in bs]),
           np.array([s.ref for s in bs], dtype=np.int_),
           np.array([s.ref_amp / abs(s.amp) for s in bs]), 1e-12)
    return {
        "pfaffian": (M,),
        "rotate_pair": (gamma, 0, 2 * n - 1, 0.37),
        "project_cov": (gamma, 0, 0 if p0 > 0.5 else 1, max(p0, 1 - p0)),
        "overlap_kernel": ov,
        "overlap_row_kernel(64 rows)": row,
    }


def _same(x, y):
    if isinstance(x, tuple):
        return all(_same(u, v) for u, v in zip(x, y))
    return np.allclose(x, y, rtol=1e-9, atol=1e-12)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, nargs="+", default=[4, 8, 16])
    ap.add_argument("--repeat", type=int, default=2000)
    args = ap.parse_args()
    found = kernels.backends()
    if "compiled" not in found:
        print(json.dumps({"error": "compiled extension not built"}))
        return
    rng = np.random.default_rng(7)
    for n in args.n:
        for name, inputs in _cases(n, rng).items():
            py = getattr(found["python"], name.split("(")[0])
            cy = getattr(found["compiled"], name.split("(")[0])
            if not _same(py(*inputs), cy(*inputs)):
                raise SystemExit(f"{name} differs between backends at n={n}")
            t_py = min(timeit.repeat(lambda: py(*inputs), number=args.repeat, repeat=3))
            t_cy = min(timeit.repeat(lambda: cy(*inputs), number=args.repeat, repeat=3))
            us_py, us_cy = 1e6 * t_py / args.repeat, 1e6 * t_cy / args.repeat
            print(json.dumps({"kernel": name, "n": n, "python_us": round(us_py, 3),
                              "compiled_us": round(us_cy, 3),
                              "speedup": round(us_py / us_cy, 2)}))


if __name__ == "__main__":
    main()
