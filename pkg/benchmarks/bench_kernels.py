"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--scenarios 200]
"""

import argparse
import timeit

import numpy as np

from possprev import kernels
from possprev.ensemble import random_scenario
from possprev.models import ALL_MODELS, solve_optimal


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--scenarios", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = {"python": kernels.load("python")}
    try:
        backends["cython"] = kernels.load("cython")
    except ImportError:
        print("compiled kernels not built; timing the fallback only")

    rng = np.random.default_rng(args.seed)
    xs = rng.uniform(-2, 2, 128)
    ws = rng.dirichlet(np.ones(128))
    bisect_args = (0, 0.0, xs, ws, 10.0, 0, 0.5, 1.0, -0.69, 0.0, 7.9, 1e-13, 400)
    batch = [random_scenario(rng, name=f"bench-{i}") for i in range(args.scenarios)]

    rows = []
    for name, k in backends.items():
        t_sum = best_of(lambda: k.weighted_sum(0, 0.0, 1, 5.0, xs, ws), args.repeat, 2000)
        t_bis = best_of(lambda: k.bisect_effort(*bisect_args), args.repeat, 50)

        def solve_all():
            for s in batch:
                for m in ALL_MODELS:
                    solve_optimal(s, m, backend=k)

        solve_all()  # warm the per-scenario caches so only solving is timed
        t_batch = best_of(solve_all, args.repeat, 1)
        rows.append((name, t_sum, t_bis, t_batch))

    print(f"{'backend':<8} {'weighted_sum':>14} {'bisect (128 atoms)':>20} "
          f"{f'solve {len(batch)}x9':>14}")
    for name, t_sum, t_bis, t_batch in rows:
        print(f"{name:<8} {t_sum * 1e6:>11.2f} us {t_bis * 1e3:>17.3f} ms {t_batch:>12.3f} s")
    if len(rows) == 2:
        py, cy = rows
        print("speed-up " + "  ".join(f"{a / b:.1f}x" for a, b in zip(py[1:], cy[1:])))


if __name__ == "__main__":
    main()
