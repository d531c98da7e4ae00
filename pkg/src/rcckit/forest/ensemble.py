"""Deterministic random-forest classifier with class-probability output.

Trees grow greedily on Gini impurity with ceil(sqrt(p)) candidate features
per node, bootstrap resamples of size N, midpoint thresholds, and no depth
limit (nodes stop at purity or the minimum leaf size). All randomness flows
from per-tree seeds derived from the forest seed, and nodes are expanded in
a fixed depth-first order, so training is reproducible bit for bit.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .._rng import child_seeds
from . import backend

__all__ = [
    "Dataset",
    "ForestConfig",
    "Tree",
    "Forest",
    "TREE_COUNT_GRID",
    "train_forest",
    "predict_proba",
    "predict_proba_batch",
    "predict_labels",
    "cv_select_num_trees",
]

# Candidate ensemble sizes tried by cross-validation.
TREE_COUNT_GRID = (100, 250, 500, 1000, 5000)


@dataclass(eq=False)
class Dataset:
    """Feature matrix plus labels over a finite class set."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels)
        if self.features.ndim != 2 or self.features.shape[0] == 0:
            raise ValueError("features must be a nonempty (N, p) matrix")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features contain non-finite values")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("labels must be a vector matching the feature rows")

    @property
    def n_samples(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])


@dataclass(frozen=True)
class ForestConfig:
    """Training knobs; "sqrt" draws ceil(sqrt(p)) candidate features per node."""

    max_features: int | str = "sqrt"
    bootstrap: bool = True
    min_leaf: int = 1

    def __post_init__(self):
        if isinstance(self.max_features, str):
            if self.max_features not in ("sqrt", "all"):
                raise ValueError("max_features must be an int, 'sqrt' or 'all'")
        elif int(self.max_features) < 1:
            raise ValueError("max_features must be >= 1")
        if int(self.min_leaf) < 1:
            raise ValueError("min_leaf must be >= 1")

    def resolve_k(self, p: int) -> int:
        if self.max_features == "sqrt":
            return min(p, math.ceil(math.sqrt(p)))
        if self.max_features == "all":
            return p
        return min(p, int(self.max_features))


@dataclass(eq=False)
class Tree:
    """Flat node arrays; feature -1 marks a leaf. counts holds per-node class counts."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    def leaf_ids(self, X: np.ndarray) -> np.ndarray:
        """Route each row of X to its leaf node index."""
        nodes = np.zeros(X.shape[0], dtype=np.int32)
        while True:
            f = self.feature[nodes]
            active = np.where(f >= 0)[0]
            if active.size == 0:
                return nodes
            cur = nodes[active]
            go_left = X[active, f[active]] <= self.threshold[cur]
            nodes[active] = np.where(go_left, self.left[cur], self.right[cur])


@dataclass(eq=False)
class Forest:
    """Trained ensemble: trees, class ordering, config echo, and the seed used."""

    trees: list
    classes: np.ndarray
    n_features: int
    config: ForestConfig
    seed: int
    num_trees: int = field(init=False)

    def __post_init__(self):
        if len(self.trees) < 1:
            raise ValueError("a forest needs at least one tree")
        self.num_trees = len(self.trees)
        for t in self.trees:
            internal = t.feature[t.feature >= 0]
            if internal.size and internal.max() >= self.n_features:
                raise ValueError("tree references a feature index out of range")


def _grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    rng: np.random.Generator,
    config: ForestConfig,
) -> Tree:
    n_rows, p = X.shape
    k = config.resolve_k(p)
    all_feats = np.arange(p, dtype=np.int64)

    if config.bootstrap:
        root_idx = rng.integers(0, n_rows, size=n_rows)
    else:
        root_idx = np.arange(n_rows, dtype=np.int64)

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    counts: list[np.ndarray] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(None)
        return len(feature) - 1

    # Depth-first, left child before right; candidate features are drawn per
    # node in this order, which fixes the RNG stream.
    stack = [(root_idx, new_node())]
    while stack:
        idx, nid = stack.pop()
        cnt = np.bincount(y[idx], minlength=n_classes).astype(np.int64)
        counts[nid] = cnt
        n = idx.shape[0]
        if cnt.max() == n or n < 2 or n < 2 * config.min_leaf:
            continue
        if k < p:
            feats = np.sort(rng.choice(p, size=k, replace=False)).astype(np.int64)
        else:
            feats = all_feats
        f, thr = backend.best_split(X, y, idx, feats, n_classes, config.min_leaf)
        if f < 0:
            continue
        mask = X[idx, f] <= thr
        left_idx = idx[mask]
        right_idx = idx[~mask]
        lid = new_node()
        rid = new_node()
        feature[nid] = f
        threshold[nid] = thr
        left[nid] = lid
        right[nid] = rid
        stack.append((right_idx, rid))
        stack.append((left_idx, lid))

    return Tree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        counts=np.stack(counts).astype(np.int64),
    )


def train_forest(
    data: Dataset, num_trees: int, seed: int, config: ForestConfig | None = None
) -> Forest:
    """Train `num_trees` trees on bootstrap resamples. Deterministic given seed."""
    if num_trees < 1:
        raise ValueError(f"num_trees must be >= 1, got {num_trees}")
    if config is None:
        config = ForestConfig()
    classes, y_codes = np.unique(data.labels, return_inverse=True)
    y_codes = np.ascontiguousarray(y_codes, dtype=np.int64)
    tree_seeds = child_seeds(seed, num_trees)
    trees = [
        _grow_tree(
            data.features,
            y_codes,
            len(classes),
            np.random.default_rng(int(tree_seeds[t])),
            config,
        )
        for t in range(num_trees)
    ]
    return Forest(
        trees=trees,
        classes=classes,
        n_features=data.n_features,
        config=config,
        seed=int(seed),
    )


def _check_batch(model: Forest, X) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(f"expected feature rows of length {model.n_features}")
    if not np.all(np.isfinite(X)):
        raise ValueError("features contain non-finite values")
    return X


def predict_proba_batch(model: Forest, X) -> np.ndarray:
    """Class-probability rows: the average of per-tree leaf class frequencies."""
    X = _check_batch(model, X)
    acc = np.zeros((X.shape[0], len(model.classes)))
    for tree in model.trees:
        c = tree.counts[tree.leaf_ids(X)].astype(np.float64)
        acc += c / c.sum(axis=1, keepdims=True)
    return acc / model.num_trees


def predict_proba(model: Forest, feature) -> np.ndarray:
    """Probability vector over model.classes for one feature vector."""
    v = np.atleast_1d(np.asarray(feature, dtype=np.float64))
    if v.ndim != 1:
        raise ValueError("expected a single feature vector")
    return predict_proba_batch(model, v[None, :])[0]


def predict_labels(model: Forest, X) -> np.ndarray:
    proba = predict_proba_batch(model, X)
    return model.classes[np.argmax(proba, axis=1)]


def cv_select_num_trees(
    data: Dataset,
    grid,
    folds: int,
    seed: int,
    config: ForestConfig | None = None,
) -> int:
    """Pick the ensemble size with the best stratified k-fold accuracy.

    Ties resolve to the smallest tree count. Folds are assigned by a seeded
    round-robin over class-grouped, shuffled indices.
    """
    grid = sorted({int(g) for g in grid})
    if not grid:
        raise ValueError("grid must be nonempty")
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    if data.n_samples < folds:
        raise ValueError(f"need at least {folds} samples for {folds}-fold CV")

    seeds = child_seeds(seed, 1 + len(grid) * folds)
    assign_rng = np.random.default_rng(int(seeds[0]))
    classes = np.unique(data.labels)
    order = np.concatenate(
        [assign_rng.permutation(np.where(data.labels == c)[0]) for c in classes]
    )
    fold_of = np.empty(data.n_samples, dtype=np.int64)
    fold_of[order] = np.arange(data.n_samples) % folds

    best_count = grid[0]
    best_acc = -np.inf
    for gi, g in enumerate(grid):
        fold_accs = []
        for f in range(folds):
            test = fold_of == f
            if not test.any():
                continue
            train = Dataset(data.features[~test], data.labels[~test])
            model = train_forest(train, g, int(seeds[1 + gi * folds + f]), config)
            pred = predict_labels(model, data.features[test])
            fold_accs.append(float(np.mean(pred == data.labels[test])))
        acc = float(np.mean(fold_accs))
        if acc > best_acc:
            best_acc = acc
            best_count = g
    return int(best_count)
