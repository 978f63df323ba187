"""Time the ghost-weight kernel on both backends.

Usage: python benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from couette_lab import kernels


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000, help="samples per call")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    eta = np.sign(rng.uniform(-1, 1, args.n)) * np.exp(rng.uniform(0, np.log(1e5), args.n))
    t = rng.uniform(0, 3, args.n) * np.abs(eta)
    nu, beta = 1e-4, 0.5

    ref = kernels.log_weight(t, eta, nu, beta, backend="python")
    best = {}
    for name in kernels.available_backends():
        out = kernels.log_weight(t, eta, nu, beta, backend=name)
        diff = max(float(np.max(np.abs(a - b))) for a, b in zip(out, ref))
        times = timeit.repeat(lambda: kernels.log_weight(t, eta, nu, beta, backend=name),
                              number=1, repeat=args.repeat)
        best[name] = min(times)
        print(f"{name:>9}: best {best[name] * 1e3:9.2f} ms for {args.n} samples "
              f"({args.n / best[name] / 1e6:6.2f} M/s), max |diff| vs python {diff:.2e}")
    if "compiled" in best:
        print(f"speedup compiled / python: {best['python'] / best['compiled']:.1f}x")
    else:
        print("compiled backend not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
