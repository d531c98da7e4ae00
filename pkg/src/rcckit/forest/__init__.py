"""Tree-ensemble classifier with a compiled split kernel and numpy fallback."""

from .backend import active_backend
from .ensemble import (
    TREE_COUNT_GRID,
    Dataset,
    Forest,
    ForestConfig,
    Tree,
    cv_select_num_trees,
    predict_labels,
    predict_proba,
    predict_proba_batch,
    train_forest,
)

__all__ = [
    "Dataset",
    "Forest",
    "ForestConfig",
    "Tree",
    "TREE_COUNT_GRID",
    "active_backend",
    "cv_select_num_trees",
    "predict_labels",
    "predict_proba",
    "predict_proba_batch",
    "train_forest",
]
