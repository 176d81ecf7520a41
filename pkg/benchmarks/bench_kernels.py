"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0]

Each kernel runs on identical inputs under both backends; the table reports
the best wall time of ``--repeat`` runs and the speedup.  Results are also
checked for agreement so a fast-but-wrong build is caught here too.
"""

import argparse
import time

import numpy as np

from bdchain import ConstantBias, PaperHarmonic, ScaleEmbedding, _backend, oracle
from bdchain.montecarlo import SimConfig, estimate_local_time_bm, simulate_paths


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def cases(scale):
    m = int(20_000 * scale)
    yield (
        f"dp_sweep  PaperHarmonic k=2 m={m}",
        lambda b: oracle.sweep(PaperHarmonic(), 2, m, track_visits=True, backend=b).expectation[-1],
        lambda a, b: abs(a - b) <= 1e-10 * abs(a),
    )
    paths = int(20_000 * scale)
    cfg = SimConfig(seed=1, paths=paths, horizon=2000)
    yield (
        f"chain_paths  ConstantBias(0.6) {paths} paths, horizon 2000",
        lambda b: simulate_paths(ConstantBias(0.6), 2, cfg, backend=b),
        lambda a, b: all(np.array_equal(x, y) for x, y in zip(a, b)),
    )
    emb = ScaleEmbedding(ConstantBias(0.5))
    bm_paths = int(1000 * scale)
    yield (
        f"bm_excursions  unit grid n=1 dt=1e-4 {bm_paths} paths",
        lambda b: estimate_local_time_bm(emb, 1, dt=1e-4, paths=bm_paths, seed=3, backend=b),
        lambda a, b: a == b,
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--scale", type=float, default=1.0, help="multiply problem sizes")
    args = parser.parse_args()
    try:
        _backend.get("compiled")
    except ImportError:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")

    print(f"{'kernel':<58} {'compiled':>10} {'python':>10} {'speedup':>8}  agree")
    for name, run, agree in cases(args.scale):
        t_c, out_c = best_of(lambda: run("compiled"), args.repeat)
        t_p, out_p = best_of(lambda: run("python"), args.repeat)
        print(f"{name:<58} {t_c:>9.3f}s {t_p:>9.3f}s {t_p / t_c:>7.1f}x  {agree(out_c, out_p)}")


if __name__ == "__main__":
    main()
