"""Model persistence and data-file ingestion.

Models are stored as versioned JSON with sorted keys, so save -> load ->
save round-trips byte for byte. Feature bases are stored as seeds by
default (regeneration is bit-exact); a full-matrix mode is available for
archival. All file writes go through a temp-file-plus-rename so partial
writes never land.
"""

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embedding import KernelSpec, RffBasis, draw_rff_basis
from .forest import Forest, ForestConfig, Tree

__all__ = [
    "FORMAT_VERSION",
    "ModelFormatError",
    "ModelBundle",
    "PairFileRecord",
    "save_model",
    "load_model",
    "parse_pair_file",
    "read_labels_csv",
    "write_text_atomic",
]

FORMAT_VERSION = "rcckit-model/1"


class ModelFormatError(ValueError):
    """Raised when a model file has the wrong version or a broken layout."""


@dataclass(eq=False)
class ModelBundle:
    """Everything needed to score new data: kernel, bases, forest, metadata.

    kind is "pair" (binary direction classifier, 1-D + 2-D bases) or
    "triplet" (3-class classifier, 1-D + 3-D bases).
    """

    kind: str
    spec: KernelSpec
    bases: tuple
    forest: Forest
    metadata: dict

    def __post_init__(self):
        if self.kind not in ("pair", "triplet"):
            raise ValueError(f"kind must be 'pair' or 'triplet', got {self.kind!r}")
        dims = tuple(b.dim for b in self.bases)
        expected = (1, 2) if self.kind == "pair" else (1, 3)
        if dims != expected:
            raise ValueError(f"{self.kind} bundle needs basis dims {expected}, got {dims}")

    @property
    def basis1d(self) -> RffBasis:
        return self.bases[0]

    @property
    def basis_joint(self) -> RffBasis:
        return self.bases[1]


def write_text_atomic(path, text: str):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _basis_dict(basis: RffBasis, store_matrices: bool) -> dict:
    d = {"seed": int(basis.seed), "dim": basis.dim, "m": basis.m, "mode": "seed"}
    if store_matrices:
        d["mode"] = "full"
        d["W"] = [[float(v) for v in row] for row in basis.W]
        d["b"] = [float(v) for v in basis.b]
        d["c_k"] = float(basis.c_k)
    return d


def _tree_dict(tree: Tree) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "counts": tree.counts.tolist(),
    }


def bundle_to_dict(bundle: ModelBundle, store_matrices: bool = False) -> dict:
    cfg = bundle.forest.config
    return {
        "format_version": FORMAT_VERSION,
        "kind": bundle.kind,
        "kernel": {
            "gammas": [float(g) for g in bundle.spec.gammas],
            "weights": [float(w) for w in bundle.spec.weights],
        },
        "bases": [_basis_dict(b, store_matrices) for b in bundle.bases],
        "forest": {
            "classes": [int(c) for c in bundle.forest.classes],
            "seed": int(bundle.forest.seed),
            "config": {
                "max_features": cfg.max_features,
                "bootstrap": cfg.bootstrap,
                "min_leaf": cfg.min_leaf,
            },
            "trees": [_tree_dict(t) for t in bundle.forest.trees],
        },
        "metadata": bundle.metadata,
    }


def save_model(bundle: ModelBundle, path, store_matrices: bool = False):
    """Write the bundle as deterministic JSON (sorted keys, repr floats)."""
    text = json.dumps(bundle_to_dict(bundle, store_matrices), sort_keys=True)
    write_text_atomic(path, text + "\n")


def _load_basis(d: dict, spec: KernelSpec) -> RffBasis:
    if d.get("mode") == "full":
        return RffBasis(
            dim=int(d["dim"]),
            m=int(d["m"]),
            W=np.asarray(d["W"], dtype=np.float64),
            b=np.asarray(d["b"], dtype=np.float64),
            c_k=float(d["c_k"]),
            seed=int(d["seed"]),
        )
    if d.get("mode") == "seed":
        return draw_rff_basis(spec, int(d["dim"]), int(d["m"]), int(d["seed"]))
    raise ModelFormatError(f"unknown basis mode {d.get('mode')!r}")


def _load_tree(d: dict) -> Tree:
    return Tree(
        feature=np.asarray(d["feature"], dtype=np.int32),
        threshold=np.asarray(d["threshold"], dtype=np.float64),
        left=np.asarray(d["left"], dtype=np.int32),
        right=np.asarray(d["right"], dtype=np.int32),
        counts=np.asarray(d["counts"], dtype=np.int64),
    )


def load_model(path) -> ModelBundle:
    """Load and validate a model bundle; bases are regenerated from seeds."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"corrupted model JSON in {path}: {e}") from e

    version = raw.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format {version!r}; expected {FORMAT_VERSION!r}"
        )
    try:
        spec = KernelSpec(tuple(raw["kernel"]["gammas"]), tuple(raw["kernel"]["weights"]))
        bases = tuple(_load_basis(b, spec) for b in raw["bases"])
        fr = raw["forest"]
        cfg_raw = fr["config"]
        config = ForestConfig(
            max_features=cfg_raw["max_features"],
            bootstrap=bool(cfg_raw["bootstrap"]),
            min_leaf=int(cfg_raw["min_leaf"]),
        )
        trees = [_load_tree(t) for t in fr["trees"]]
        n_features = sum(b.m for b in bases) + bases[0].m
        forest = Forest(
            trees=trees,
            classes=np.asarray(fr["classes"], dtype=np.int64),
            n_features=n_features,
            config=config,
            seed=int(fr["seed"]),
        )
        return ModelBundle(
            kind=raw["kind"],
            spec=spec,
            bases=bases,
            forest=forest,
            metadata=raw.get("metadata", {}),
        )
    except (KeyError, TypeError) as e:
        raise ModelFormatError(f"malformed model bundle in {path}: {e}") from e


@dataclass(eq=False)
class PairFileRecord:
    """A parsed whitespace-column data file plus an optional direction label."""

    path: str
    name: str
    columns: np.ndarray
    label: int | None = None

    @property
    def n_columns(self) -> int:
        return int(self.columns.shape[1])


def parse_pair_file(path) -> PairFileRecord:
    """Parse whitespace-separated decimal columns, one observation per row.

    Blank lines and lines starting with '#' are skipped. Ragged rows and
    unparseable values raise with the offending line number.
    """
    path = Path(path)
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            try:
                row = [float(p) for p in parts]
            except ValueError as e:
                raise ValueError(f"{path}: line {lineno}: {e}") from e
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ValueError(
                    f"{path}: line {lineno}: expected {width} columns, got {len(row)}"
                )
            rows.append(row)
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least 2 data rows, got {len(rows)}")
    cols = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(cols)):
        raise ValueError(f"{path}: non-finite values")
    return PairFileRecord(path=str(path), name=path.stem, columns=cols)


def read_labels_csv(path) -> dict:
    """Read a name,label index with label in {1, -1}; a header row is allowed."""
    labels = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            parts = [p.strip() for p in stripped.split(",")]
            if lineno == 1 and parts[:2] == ["name", "label"]:
                continue
            if len(parts) < 2:
                raise ValueError(f"{path}: line {lineno}: expected name,label")
            try:
                value = int(parts[1])
            except ValueError as e:
                raise ValueError(f"{path}: line {lineno}: {e}") from e
            if value not in (1, -1):
                raise ValueError(f"{path}: line {lineno}: label must be 1 or -1")
            labels[parts[0]] = value
    if not labels:
        raise ValueError(f"{path}: no labels found")
    return labels
