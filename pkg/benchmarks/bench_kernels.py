"""Time the pure-Python and compiled homology kernels on the same complexes.

    python benchmarks/bench_kernels.py [--repeat 3] [--seed 0]
"""
import argparse
import time

import numpy as np

from lossbetti.topology import kernels
from lossbetti.topology.cubical import CubicalComplex, sublevel_complex
from lossbetti.topology.homology import betti_fast2d, betti_gf2


def _cases(seed):
    rng = np.random.default_rng(seed)
    ax = np.linspace(-1, 1, 200)
    u, v = np.meshgrid(ax, ax, indexing="ij")
    r = np.sqrt(u * u + v * v)
    yield "annulus 200x200", CubicalComplex.from_vertex_mask((r <= 0.8) & (r >= 0.4))
    yield "random 64x64", CubicalComplex.from_vertex_mask(rng.random((64, 64)) < 0.6)
    yield "random 200x200", CubicalComplex.from_vertex_mask(rng.random((200, 200)) < 0.6)
    yield "double well 200x200 @ c=1.5", sublevel_complex((u * u * 4 - 1) ** 2 + v * v, 1.5)
    yield "random 32x32x32", CubicalComplex.from_vertex_mask(rng.random((32, 32, 32)) < 0.6)


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; timing the Python kernels only")
    names = list(backends)
    print(f"{'case':32s} {'method':6s} " + " ".join(f"{n:>10s}" for n in names) + "   speedup")
    for label, cx in _cases(args.seed):
        methods = [("gf2", lambda mod: betti_gf2(cx, rank=mod.gf2_rank))]
        if cx.dim == 2:
            methods.append(("fast", lambda mod: betti_fast2d(cx, merge_count=mod.uf_merge_count)))
        for method, run in methods:
            timings, results = [], set()
            for name in names:
                t, bv = _best(lambda: run(backends[name]), args.repeat)
                timings.append(t)
                results.add(bv.b)
            if len(results) != 1:
                raise SystemExit(f"backends disagree on {label}: {results}")
            speed = f"{timings[0] / timings[-1]:8.1f}x" if len(names) > 1 else ""
            print(f"{label:32s} {method:6s} " + " ".join(f"{t * 1e3:8.1f}ms" for t in timings)
                  + f"  {speed}")


if __name__ == "__main__":
    main()
