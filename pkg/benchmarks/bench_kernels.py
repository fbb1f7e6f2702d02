"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 20000] [--repeat 5] [--end-to-end]

Per-kernel timings use identical inputs for both backends. ``--end-to-end``
also times one C2 distance evaluation in a subprocess per backend, switched
with HYPEXT_PURE.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from hypext import _kernels_py
from hypext.kernels import backends
from hypext.spheres import stencil_offsets

E2E = """
import time
from hypext.extension import extension_normalized_cut, join_to_sphereform
from hypext.kernels import BACKEND
from hypext.radial import make_hyperbolic
from hypext.spheres import SamplingSpec, c2_distance, round_metric
form = join_to_sphereform(extension_normalized_cut(make_hyperbolic(3), 2, 5.0))
t0 = time.perf_counter()
c2_distance(form, round_metric(5), SamplingSpec())
print(BACKEND, time.perf_counter() - t0)
"""


def make_inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    d = 4
    xi = rng.uniform(-0.5, 0.5, size=(n, d)) / np.sqrt(d)
    A = rng.normal(size=(n, d + 1, d + 1))
    G = A + A.transpose(0, 2, 1)
    k, m = 2, 5
    X = rng.normal(size=(n, m))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    H = rng.normal(size=(n, m - k, m - k))
    H = H + H.transpose(0, 2, 1)
    a = rng.uniform(0.5, 2.0, n)
    c = rng.uniform(0.5, 2.0, n)
    S = len(stencil_offsets(d))
    V = rng.normal(size=(max(1, n // 20), S, d, d))
    la = rng.uniform(-5.0, 60.0, n)
    lc = rng.uniform(0.0, 1.0, n)
    return {
        "chart_components": lambda mod: mod.chart_components(xi, 1, 1.0, G),
        "join_ambient": lambda mod: mod.join_ambient(X, k, a, c, H),
        "stencil_sup": lambda mod: mod.stencil_sup(V, 1e-3),
        "asinh_sinh_scaled": lambda mod: mod.asinh_sinh_scaled(la, lc),
    }


def bench(n, repeat):
    mods = backends()
    cases = make_inputs(n)
    print(f"{'kernel':<20}" + "".join(f"{name:>14}" for name in mods) + f"{'speedup':>10}")
    for name, fn in cases.items():
        times = {}
        for bname, mod in mods.items():
            fn(mod)
            times[bname] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=repeat))
        row = f"{name:<20}" + "".join(f"{times[b] * 1e3:>11.3f} ms" for b in mods)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:>9.2f}x"
        print(row)


def end_to_end():
    for pure in ("1", "0"):
        env = dict(os.environ, HYPEXT_PURE=pure)
        out = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True, text=True, check=True)
        backend, secs = out.stdout.split()
        print(f"c2_distance on S^4 ({backend}): {float(secs):.3f} s")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000, help="batch size per kernel call")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args(argv)
    if "cython" not in backends():
        print("compiled core not built; run `python3 setup.py build_ext --inplace`", file=sys.stderr)
    bench(args.n, args.repeat)
    if args.end_to_end:
        end_to_end()
    return 0


if __name__ == "__main__":
    sys.exit(main())
