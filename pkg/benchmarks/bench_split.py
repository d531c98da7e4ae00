#!/usr/bin/env python3
"""Benchmark the compiled split kernel against the numpy fallback.

Trains identical forests with each backend on synthetic embedding-style
data, verifies the resulting models are bit-identical, and reports timings.

Usage: python benchmarks/bench_split.py [--rows 2000] [--cols 300] [--trees 20]
"""

import argparse
import json
import time

import numpy as np

import rcckit.forest.backend as backend
from rcckit.forest import Dataset, train_forest
from rcckit.forest import _split_py
from rcckit.model_io import _tree_dict


def _make_data(rows: int, cols: int, seed: int) -> Dataset:
    rng = np.random.default_rng(seed)
    half = rows // 2
    shift = np.zeros(cols)
    shift[: cols // 10] = 0.3
    features = np.vstack(
        [
            rng.standard_normal((half, cols)) + shift,
            rng.standard_normal((rows - half, cols)) - shift,
        ]
    )
    labels = np.concatenate([np.ones(half, dtype=np.int64), -np.ones(rows - half, dtype=np.int64)])
    return Dataset(features, labels)


def _run(impl, data: Dataset, trees: int, seed: int):
    saved = backend.best_split
    backend.best_split = impl.best_split
    try:
        start = time.perf_counter()
        forest = train_forest(data, trees, seed)
        elapsed = time.perf_counter() - start
    finally:
        backend.best_split = saved
    return forest, elapsed


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=2000)
    parser.add_argument("--cols", type=int, default=300)
    parser.add_argument("--trees", type=int, default=20)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    data = _make_data(args.rows, args.cols, args.seed)
    print(f"dataset: {args.rows} x {args.cols}, {args.trees} trees")

    forest_py, t_py = _run(_split_py, data, args.trees, args.seed)
    print(f"python backend: {t_py:8.3f} s")

    try:
        from rcckit.forest import _split_cy
    except ImportError:
        print("cython backend: not built (pip install -e . --no-build-isolation)")
        return

    forest_cy, t_cy = _run(_split_cy, data, args.trees, args.seed)
    print(f"cython backend: {t_cy:8.3f} s  (speedup {t_py / t_cy:.1f}x)")

    a = json.dumps([_tree_dict(t) for t in forest_py.trees], sort_keys=True)
    b = json.dumps([_tree_dict(t) for t in forest_cy.trees], sort_keys=True)
    if a != b:
        raise SystemExit("backends disagree: serialized forests differ")
    print("backends agree: serialized forests are byte-identical")


if __name__ == "__main__":
    main()
