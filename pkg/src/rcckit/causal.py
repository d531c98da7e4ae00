"""Causal direction scoring, decision-rate evaluation, and DAG reconstruction.

The direction score of a pair is the difference between the classifier's
cause-first probability under both orderings of the pair, which makes it
exactly antisymmetric and confines it to [-1, 1]. For d >= 3 variables, a
3-class triplet classifier is evaluated on every ordered pair alongside
every scalar context, the resulting label probabilities are averaged and
symmetrized into edge-belief matrices, and the best edge types are kept
subject to acyclicity.
"""

from dataclasses import dataclass

import numpy as np

from .embedding import RffBasis, embed_sample, featurize_pair_both, stack_features
from .forest import Forest, predict_proba_batch
from .synthgen import CauseEffectSample

__all__ = [
    "CausationScore",
    "DecisionRateCurve",
    "EdgeBeliefs",
    "CausalDag",
    "rcc_score",
    "decision_rate_curve",
    "pairwise_beliefs",
    "infer_dag",
]


@dataclass(frozen=True)
class CausationScore:
    """Antisymmetric direction score in [-1, 1]; sign(value) is the prediction."""

    value: float

    def __post_init__(self):
        if not np.isfinite(self.value) or abs(self.value) > 1.0:
            raise ValueError(f"score must be finite and in [-1, 1], got {self.value}")

    @property
    def predicted_label(self) -> int:
        return int(np.sign(self.value))


@dataclass(eq=False)
class DecisionRateCurve:
    """Accuracy at each decision rate k/N, for k = 1..N."""

    rates: np.ndarray
    accuracies: np.ndarray

    def __post_init__(self):
        self.rates = np.asarray(self.rates, dtype=np.float64)
        self.accuracies = np.asarray(self.accuracies, dtype=np.float64)
        if self.rates.shape != self.accuracies.shape or self.rates.ndim != 1:
            raise ValueError("rates and accuracies must be matching vectors")
        if self.rates.shape[0] == 0:
            raise ValueError("curve must be nonempty")
        if np.any(np.diff(self.rates) <= 0):
            raise ValueError("rates must be strictly increasing")
        if self.rates[-1] != 1.0:
            raise ValueError("last rate must be 1.0")
        if np.any((self.accuracies < 0) | (self.accuracies > 1)):
            raise ValueError("accuracies must lie in [0, 1]")


def _class_column(model: Forest, label: int) -> int:
    hits = np.where(model.classes == label)[0]
    if hits.size != 1:
        raise ValueError(f"model has no class {label}")
    return int(hits[0])


def rcc_score(
    model: Forest, sample: CauseEffectSample, basis1d: RffBasis, basis2d: RffBasis
) -> CausationScore:
    """Score = P(cause-first | features(x, y)) - P(cause-first | features(y, x))."""
    fwd, bwd = featurize_pair_both(sample.x, sample.y, basis1d, basis2d)
    probs = predict_proba_batch(model, stack_features([fwd, bwd]))
    col = _class_column(model, 1)
    value = float(probs[0, col] - probs[1, col])
    return CausationScore(min(1.0, max(-1.0, value)))


def decision_rate_curve(scores, truths) -> DecisionRateCurve:
    """Accuracy of the top-k most confident sign predictions, for every k.

    Pairs are ranked by |score| descending (ties keep input order); the
    accuracy at rate k/N is the fraction of correct signs among the first k.
    """
    values = np.asarray([s.value for s in scores], dtype=np.float64)
    truths = np.asarray(truths, dtype=np.int64)
    if values.shape != truths.shape or values.ndim != 1 or values.shape[0] == 0:
        raise ValueError("scores and truths must be nonempty and of equal length")
    if not np.all(np.isin(truths, (-1, 1))):
        raise ValueError("truths must be +1 or -1")
    order = np.argsort(-np.abs(values), kind="stable")
    correct = np.sign(values[order]) == truths[order]
    k = np.arange(1, values.shape[0] + 1, dtype=np.float64)
    return DecisionRateCurve(rates=k / values.shape[0], accuracies=np.cumsum(correct) / k)


@dataclass(eq=False)
class EdgeBeliefs:
    """Per-ordered-pair probabilities of forward, independent, and backward edges."""

    fwd: np.ndarray
    indep: np.ndarray
    bwd: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        self.fwd = np.asarray(self.fwd, dtype=np.float64)
        self.indep = np.asarray(self.indep, dtype=np.float64)
        self.bwd = np.asarray(self.bwd, dtype=np.float64)
        d = len(self.names)
        for m in (self.fwd, self.indep, self.bwd):
            if m.shape != (d, d):
                raise ValueError(f"belief matrices must be {d}x{d}")
        off = ~np.eye(d, dtype=bool)
        total = self.fwd + self.indep + self.bwd
        if np.max(np.abs(total[off] - 1.0)) > 1e-9:
            raise ValueError("per-pair beliefs must sum to 1")
        if np.max(np.abs(self.fwd - self.bwd.T)[off]) > 1e-9:
            raise ValueError("fwd[i, j] must equal bwd[j, i]")
        if np.max(np.abs(self.indep - self.indep.T)[off]) > 1e-9:
            raise ValueError("indep must be symmetric")

    @property
    def d(self) -> int:
        return len(self.names)


def pairwise_beliefs(
    model3: Forest,
    data,
    basis1d: RffBasis,
    basis3d: RffBasis,
    names: tuple[str, ...] | None = None,
) -> EdgeBeliefs:
    """Evaluate the 3-class triplet classifier over all pairs and scalar contexts.

    For each ordered pair (i, j) the triplet features (x_i, x_j, x_k) are
    scored for every context k and the class probabilities averaged over k;
    the two orderings are then symmetrized so that beliefs satisfy the
    transpose coupling exactly.
    """
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("data must be an (n, d) matrix with n >= 2")
    d = X.shape[1]
    if d < 3:
        raise ValueError("pairwise beliefs need at least 3 variables for a context")
    for label in (-1, 0, 1):
        _class_column(model3, label)
    if names is None:
        names = tuple(f"x{i + 1}" for i in range(d))
    if len(names) != d:
        raise ValueError("names must match the number of columns")

    marg = [embed_sample(X[:, i], basis1d) for i in range(d)]

    rows = []
    keys = []
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            for k in range(d):
                if k in (i, j):
                    continue
                joint = embed_sample(X[:, (i, j, k)], basis3d)
                rows.append(
                    np.concatenate([marg[i].values, marg[j].values, joint.values])
                )
                keys.append((i, j))
    probs = predict_proba_batch(model3, np.stack(rows))

    col_p = _class_column(model3, 1)
    col_0 = _class_column(model3, 0)
    col_m = _class_column(model3, -1)
    p_fwd = np.zeros((d, d))
    p_ind = np.zeros((d, d))
    p_bwd = np.zeros((d, d))
    counts = np.zeros((d, d))
    for (i, j), row in zip(keys, probs):
        p_fwd[i, j] += row[col_p]
        p_ind[i, j] += row[col_0]
        p_bwd[i, j] += row[col_m]
        counts[i, j] += 1
    off = counts > 0
    p_fwd[off] /= counts[off]
    p_ind[off] /= counts[off]
    p_bwd[off] /= counts[off]

    fwd = np.zeros((d, d))
    ind = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            fwd[i, j] = (p_fwd[i, j] + p_bwd[j, i]) / 2.0
            ind[i, j] = (p_ind[i, j] + p_ind[j, i]) / 2.0
    return EdgeBeliefs(fwd=fwd, indep=ind, bwd=fwd.T.copy(), names=names)


def _has_cycle(d: int, edges) -> bool:
    indeg = {v: 0 for v in range(d)}
    out = {v: [] for v in range(d)}
    for a, b in edges:
        out[a].append(b)
        indeg[b] += 1
    ready = [v for v in range(d) if indeg[v] == 0]
    seen = 0
    while ready:
        v = ready.pop()
        seen += 1
        for w in out[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    return seen != d


@dataclass(eq=False)
class CausalDag:
    """Directed acyclic graph over named variables with per-edge confidence."""

    names: tuple[str, ...]
    edges: dict

    def __post_init__(self):
        self.names = tuple(self.names)
        d = len(self.names)
        for (a, b), conf in self.edges.items():
            if not (0 <= a < d and 0 <= b < d) or a == b:
                raise ValueError(f"bad edge ({a}, {b})")
            if (b, a) in self.edges:
                raise ValueError(f"both orientations present for pair ({a}, {b})")
            if not (0.0 <= conf <= 1.0):
                raise ValueError("edge confidence must lie in [0, 1]")
        if _has_cycle(d, self.edges.keys()):
            raise ValueError("graph must be acyclic")

    @property
    def d(self) -> int:
        return len(self.names)

    def edge_type(self, i: int, j: int) -> int:
        """+1 for i -> j, -1 for j -> i, 0 for no edge."""
        if (i, j) in self.edges:
            return 1
        if (j, i) in self.edges:
            return -1
        return 0


def infer_dag(beliefs: EdgeBeliefs) -> CausalDag:
    """Keep each pair's most probable edge type, then prune until acyclic.

    Ties in the per-pair argmax conservatively resolve to no edge. While a
    directed cycle remains, the globally least-confident edge is removed
    (ties on confidence break on the lowest vertex pair).
    """
    d = beliefs.d
    edges = {}
    for i in range(d):
        for j in range(i + 1, d):
            pf = beliefs.fwd[i, j]
            pb = beliefs.fwd[j, i]
            pi = beliefs.indep[i, j]
            top = max(pf, pb, pi)
            winners = [p for p in (pf, pb, pi) if p == top]
            if len(winners) > 1 or pi == top:
                continue
            if pf == top:
                edges[(i, j)] = float(pf)
            else:
                edges[(j, i)] = float(pb)

    while _has_cycle(d, edges.keys()):
        victim = min(edges.items(), key=lambda kv: (kv[1], kv[0]))[0]
        del edges[victim]

    return CausalDag(names=beliefs.names, edges=edges)
