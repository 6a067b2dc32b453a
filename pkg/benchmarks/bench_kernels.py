"""Timing comparison of the numba and numpy training kernels.

Usage:
    python benchmarks/bench_kernels.py [--rows 20000] [--features 400]
                                       [--latent 100] [--epochs 3]

Runs one warm-up epoch per backend (numba compiles there), then times
SGD epochs and batch prediction on identical dense and one-hot data,
printing a per-backend table and the speedup.
"""

import argparse
import time

import numpy as np
import scipy.sparse as sp

from collabrec.learners.backend import set_backend
from collabrec.learners import TrainConfig, fm_predict_batch, fm_train


def one_hot(rng, rows, features):
    cols = np.array([rng.choice(features, size=2, replace=False) for _ in range(rows)])
    data = np.ones(2 * rows)
    indices = cols.ravel()
    indptr = np.arange(0, 2 * rows + 1, 2)
    return sp.csr_matrix((data, indices, indptr), shape=(rows, features))


def time_backend(name, x_dense, x_sparse, y, cfg):
    set_backend(name)
    fm_train(x_dense[:200], y[:200], cfg)  # warm-up / compile
    timings = {}
    start = time.perf_counter()
    model = fm_train(x_dense, y, cfg)
    timings["dense train"] = time.perf_counter() - start
    start = time.perf_counter()
    fm_predict_batch(model, x_dense)
    timings["dense predict"] = time.perf_counter() - start
    start = time.perf_counter()
    model = fm_train(x_sparse, y, cfg)
    timings["sparse train"] = time.perf_counter() - start
    start = time.perf_counter()
    fm_predict_batch(model, x_sparse)
    timings["sparse predict"] = time.perf_counter() - start
    return timings


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=20_000)
    parser.add_argument("--features", type=int, default=400)
    parser.add_argument("--latent", type=int, default=100)
    parser.add_argument("--epochs", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    x_dense = rng.normal(size=(args.rows, args.features))
    x_sparse = one_hot(rng, args.rows, args.features)
    y = rng.normal(size=args.rows)
    cfg = TrainConfig(
        q=args.latent, epochs=args.epochs, learning_rate=1e-3, seed=args.seed
    )

    print(
        f"rows={args.rows} features={args.features} latent={args.latent}"
        f" epochs={args.epochs}"
    )
    results = {}
    for backend in ("numba", "numpy"):
        try:
            results[backend] = time_backend(backend, x_dense, x_sparse, y, cfg)
        except ValueError as err:
            print(f"{backend}: unavailable ({err})")
    set_backend(None)

    if len(results) == 2:
        print(f"{'kernel':<16}{'numba':>10}{'numpy':>12}{'speedup':>10}")
        for key in results["numba"]:
            fast = results["numba"][key]
            slow = results["numpy"][key]
            print(f"{key:<16}{fast:>9.3f}s{slow:>11.3f}s{slow / fast:>9.1f}x")
    else:
        for backend, timings in results.items():
            for key, value in timings.items():
                print(f"{backend} {key}: {value:.3f}s")


if __name__ == "__main__":
    main()
