"""Compare the compiled and pure-Python kernels on representative workloads.

    python benchmarks/bench_kernels.py [--repeat 5] [--scale 1.0]
"""

import argparse
import string
import timeit

import numpy as np

from botdetect import kernels
from botdetect.light_features import UNIFORM_LIKELIHOOD


def workloads(scale: float, seed: int = 0):
    rng = np.random.default_rng(seed)
    chars = np.array(list(kernels.ALPHABET))
    n_names = int(200_000 * scale)
    names = ["".join(rng.choice(chars, size=rng.integers(4, 16))) for _ in range(n_names)]
    log_prob = np.log(rng.dirichlet(np.ones(kernels.N_ALPHA**2))).reshape(kernels.N_ALPHA, kernels.N_ALPHA)
    n = int(200_000 * scale)
    scores = np.round(rng.random(n), 3)
    positive = (rng.random(n) < 0.4).astype(np.uint8)
    samples = [rng.normal(size=int(50_000 * scale)), rng.normal(0.1, size=int(50_000 * scale))]
    return {
        f"bigram_counts ({n_names} names)": lambda b: kernels.bigram_counts(names, backend=b),
        f"name_likelihoods ({n_names} names)": lambda b: kernels.name_likelihoods(names, log_prob, UNIFORM_LIKELIHOOD, backend=b),
        f"midrank_auc (n={n})": lambda b: kernels.midrank_auc(scores, positive, backend=b),
        f"ad_midrank_sum (2 x {len(samples[0])})": lambda b: kernels.ad_midrank_sum(samples, backend=b),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0)
    args = ap.parse_args()
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)} (default: {kernels.BACKEND})")
    print(f"{'kernel':<40}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, fn in workloads(args.scale).items():
        best = {b: min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat)) for b in backends}
        line = f"{name:<40}" + "".join(f"{best[b] * 1e3:>10.1f}ms" for b in backends)
        if len(backends) > 1:
            line += f"{best['python'] / best['cython']:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
