"""Synthetic cause-effect data generators and training-set construction.

Pairs are drawn from a parametric family: a Gaussian-mixture cause, a random
spline mechanism, and additive Gaussian noise, each series standardized to
zero mean and unit variance. Triplets extend the same recipe to the eight
three-variable DAGs used for context-aware direction classification. Every
generator is a pure function of its parameters and a seed.
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial.distance import cdist

from ._rng import child_seeds
from .embedding import (
    PairFeature,
    RffBasis,
    TripletFeature,
    embed_sample,
    featurize_pair_both,
    stack_features,
)

__all__ = [
    "MotherParams",
    "CauseEffectSample",
    "TripletSample",
    "DagSpec",
    "EIGHT_DAGS",
    "sample_pair",
    "sample_triplet",
    "build_pair_training_set",
    "build_triplet_training_set",
    "fit_theta",
    "theta_grid",
    "sample_theta_grid",
]

# Degenerate mixture scale: used when sigma2 = 0 would make the
# accept-only-positive rejection loop run forever.
_TINY_STD = 1e-6


@dataclass(frozen=True)
class MotherParams:
    """Generator knobs: mixture size, three scale parameters, spline knot count."""

    c: int
    sigma1: float
    sigma2: float
    sigma3: float
    d_f: int

    def __post_init__(self):
        if int(self.c) < 1:
            raise ValueError(f"c must be >= 1, got {self.c}")
        if int(self.d_f) < 1:
            raise ValueError(f"d_f must be >= 1, got {self.d_f}")
        for name in ("sigma1", "sigma2", "sigma3"):
            v = float(getattr(self, name))
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        object.__setattr__(self, "c", int(self.c))
        object.__setattr__(self, "d_f", int(self.d_f))
        object.__setattr__(self, "sigma1", float(self.sigma1))
        object.__setattr__(self, "sigma2", float(self.sigma2))
        object.__setattr__(self, "sigma3", float(self.sigma3))

    def astuple(self) -> tuple:
        return (self.c, self.sigma1, self.sigma2, self.sigma3, self.d_f)


def _check_series(v: np.ndarray, name: str):
    if v.ndim != 1 or v.shape[0] < 2:
        raise ValueError(f"{name} must be a vector of length >= 2")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite values")


@dataclass(eq=False)
class CauseEffectSample:
    """Paired observations with an optional ground-truth direction label.

    label is +1 for x -> y, -1 for y -> x, 0 for neither, or None if unknown.
    """

    x: np.ndarray
    y: np.ndarray
    label: int | None = None
    name: str | None = None

    def __post_init__(self):
        self.x = np.ascontiguousarray(self.x, dtype=np.float64)
        self.y = np.ascontiguousarray(self.y, dtype=np.float64)
        _check_series(self.x, "x")
        _check_series(self.y, "y")
        if self.x.shape[0] != self.y.shape[0]:
            raise ValueError("x and y must have equal length")
        if self.label is not None and self.label not in (-1, 0, 1):
            raise ValueError(f"label must be one of -1, 0, +1 or None, got {self.label}")

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    def swapped(self) -> "CauseEffectSample":
        label = None if self.label is None else -self.label
        return CauseEffectSample(self.y, self.x, label, self.name)

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])


@dataclass(eq=False)
class TripletSample:
    """Three aligned series with per-pair labels for (x,y), (y,z), (x,z)."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    labels: tuple[int, int, int]
    dag_id: int

    def __post_init__(self):
        self.x = np.ascontiguousarray(self.x, dtype=np.float64)
        self.y = np.ascontiguousarray(self.y, dtype=np.float64)
        self.z = np.ascontiguousarray(self.z, dtype=np.float64)
        for v, name in ((self.x, "x"), (self.y, "y"), (self.z, "z")):
            _check_series(v, name)
        if not (self.x.shape == self.y.shape == self.z.shape):
            raise ValueError("x, y and z must have equal length")
        if not (0 <= self.dag_id <= 7):
            raise ValueError(f"dag_id must be in 0..7, got {self.dag_id}")
        expected = EIGHT_DAGS[self.dag_id].labels()
        if tuple(self.labels) != expected:
            raise ValueError(f"labels {self.labels} inconsistent with dag {self.dag_id}")


_EIGHT_EDGE_SETS = (
    frozenset(),
    frozenset({(0, 1)}),
    frozenset({(0, 1), (1, 2)}),
    frozenset({(0, 1), (2, 1)}),
    frozenset({(1, 0), (1, 2)}),
    frozenset({(0, 1), (1, 2), (0, 2)}),
    frozenset({(0, 1), (2, 1), (0, 2)}),
    frozenset({(1, 0), (1, 2), (0, 2)}),
)


@dataclass(frozen=True)
class DagSpec:
    """One of the eight 3-vertex DAGs over variables (0, 1, 2)."""

    edges: frozenset

    def __post_init__(self):
        edges = frozenset((int(a), int(b)) for a, b in self.edges)
        object.__setattr__(self, "edges", edges)
        if edges not in _EIGHT_EDGE_SETS:
            raise ValueError(f"not one of the eight admissible 3-vertex DAGs: {sorted(edges)}")

    def label(self, i: int, j: int) -> int:
        if (i, j) in self.edges:
            return 1
        if (j, i) in self.edges:
            return -1
        return 0

    def labels(self) -> tuple[int, int, int]:
        return (self.label(0, 1), self.label(1, 2), self.label(0, 2))

    def parents(self, v: int) -> list[int]:
        return sorted(a for a, b in self.edges if b == v)

    def topological_order(self) -> list[int]:
        remaining = {0, 1, 2}
        order = []
        while remaining:
            ready = sorted(v for v in remaining if not set(self.parents(v)) & remaining)
            order.append(ready[0])
            remaining.remove(ready[0])
        return order


EIGHT_DAGS = tuple(DagSpec(e) for e in _EIGHT_EDGE_SETS)


def _standardize(v: np.ndarray) -> np.ndarray:
    # Population standardization (divide by n); degenerate series stay centered.
    z = v - v.mean()
    s2 = float(np.mean(z * z))
    if s2 > 0.0:
        z = z / np.sqrt(s2)
    return z


def _mixture_cause(rng: np.random.Generator, theta: MotherParams, n: int) -> np.ndarray:
    # Weights ~ U(0,1) normalized; means ~ N(0, sigma1); component scales
    # redrawn from N(0, sigma2) until positive. Output standardized.
    w = rng.uniform(0.0, 1.0, theta.c)
    w = w / w.sum()
    means = rng.normal(0.0, theta.sigma1, theta.c)
    if theta.sigma2 == 0.0:
        stds = np.full(theta.c, _TINY_STD)
    else:
        stds = np.empty(theta.c)
        for i in range(theta.c):
            s = rng.normal(0.0, theta.sigma2)
            while s <= 0.0:
                s = rng.normal(0.0, theta.sigma2)
            stds[i] = s
    comp = rng.choice(theta.c, size=n, p=w)
    x = means[comp] + stds[comp] * rng.standard_normal(n)
    return _standardize(x)


def _draw_noise(rng: np.random.Generator, theta: MotherParams, n: int) -> np.ndarray:
    # Centered Gaussian with variance ~ U(0, sigma3).
    v = rng.uniform(0.0, theta.sigma3)
    return rng.standard_normal(n) * np.sqrt(v)


def _draw_mechanism(rng: np.random.Generator, x: np.ndarray, d_f: int):
    """Spline through d_f uniform grid knots on [min(x), max(x)] with N(0,1) values.

    Natural cubic for d_f >= 3; d_f = 2 degenerates to linear interpolation
    and d_f = 1 to a constant. Returns (callable, grid, knot values).
    """
    knots = rng.standard_normal(d_f)
    lo, hi = float(x.min()), float(x.max())
    if d_f == 1 or lo == hi:
        grid = np.array([lo])
        return (lambda t: np.full(np.shape(t), knots[0])), grid, knots[:1]
    grid = np.linspace(lo, hi, d_f)
    if d_f == 2:
        return (lambda t: np.interp(t, grid, knots)), grid, knots
    f = CubicSpline(grid, knots, bc_type="natural")
    return (lambda t: f(t)), grid, knots


def sample_pair(theta: MotherParams, n: int, seed: int) -> CauseEffectSample:
    """Draw one labeled cause-effect pair (label +1, cause first).

    The generator stream is consumed in a fixed order: mixture weights,
    means, component scales, component assignments, cause noise, effect
    noise variance, effect noise, spline knots.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    rng = np.random.default_rng(int(seed))
    x = _mixture_cause(rng, theta, n)
    eps = _draw_noise(rng, theta, n)
    f, _, _ = _draw_mechanism(rng, x, theta.d_f)
    y = _standardize(f(x) + eps)
    return CauseEffectSample(x, y, label=1)


def sample_triplet(theta: MotherParams, dag: DagSpec, n: int, seed: int) -> TripletSample:
    """Draw one three-variable sample from `dag`.

    Roots follow the mixture-cause recipe; each child is the sum of one
    independent spline per parent (parents in ascending index order) plus
    noise, standardized. Vertices are processed in topological order with
    index tie-breaks, which pins the generator stream.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    rng = np.random.default_rng(int(seed))
    values: dict[int, np.ndarray] = {}
    for v in dag.topological_order():
        parents = dag.parents(v)
        if not parents:
            values[v] = _mixture_cause(rng, theta, n)
        else:
            eps = _draw_noise(rng, theta, n)
            acc = np.zeros(n)
            for p in parents:
                f, _, _ = _draw_mechanism(rng, values[p], theta.d_f)
                acc = acc + f(values[p])
            values[v] = _standardize(acc + eps)
    return TripletSample(
        x=values[0],
        y=values[1],
        z=values[2],
        labels=dag.labels(),
        dag_id=EIGHT_DAGS.index(dag),
    )


def build_pair_training_set(
    theta: MotherParams,
    N: int,
    n: int,
    basis1d: RffBasis,
    basis2d: RffBasis,
    seed: int,
) -> list[tuple[PairFeature, int]]:
    """2N labeled features: each synthetic pair contributes both orderings.

    Entries are interleaved: (features(x, y), +1) then (features(y, x), -1).
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    seeds = child_seeds(seed, N)
    out: list[tuple[PairFeature, int]] = []
    for i in range(N):
        s = sample_pair(theta, n, int(seeds[i]))
        fwd, bwd = featurize_pair_both(s.x, s.y, basis1d, basis2d)
        out.append((fwd, 1))
        out.append((bwd, -1))
    return out


# Six orderings of (x, y, z) and the index (0, 1 or 2) of the pair label each
# one carries, with its sign. Order matters: it defines the training layout.
_ARRANGEMENTS = (
    (("x", "y", "z"), 0, +1),
    (("y", "z", "x"), 1, +1),
    (("x", "z", "y"), 2, +1),
    (("y", "x", "z"), 0, -1),
    (("z", "y", "x"), 1, -1),
    (("z", "x", "y"), 2, -1),
)


def build_triplet_training_set(
    theta: MotherParams,
    N: int,
    n: int,
    basis1d: RffBasis,
    basis3d: RffBasis,
    seed: int,
) -> list[tuple[TripletFeature, int]]:
    """6N labeled features over DAGs drawn uniformly from the eight.

    Each triplet contributes its six ordered arrangements with labels
    (+l1, +l2, +l3, -l1, -l2, -l3).
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    seeds = child_seeds(seed, N + 1)
    dag_ids = np.random.default_rng(int(seeds[0])).integers(0, 8, size=N)
    out: list[tuple[TripletFeature, int]] = []
    for i in range(N):
        t = sample_triplet(theta, EIGHT_DAGS[int(dag_ids[i])], n, int(seeds[1 + i]))
        series = {"x": t.x, "y": t.y, "z": t.z}
        marg = {k: embed_sample(v, basis1d) for k, v in series.items()}
        for (a, b, c), li, sign in _ARRANGEMENTS:
            joint = embed_sample(
                np.column_stack([series[a], series[b], series[c]]), basis3d
            )
            feat = TripletFeature(first=marg[a], second=marg[b], joint=joint)
            out.append((feat, sign * t.labels[li]))
    return out


def fit_theta(
    test_features,
    candidates,
    N_probe: int,
    n: int,
    basis1d: RffBasis,
    basis2d: RffBasis,
    seed: int,
) -> MotherParams:
    """Pick the candidate whose synthetic features best cover the test features.

    For each candidate, draws N_probe synthetic pairs, featurizes them, and
    scores sum_i min_j ||test_i - probe_j||^2; returns the argmin candidate
    (ties resolve to the lowest candidate index).
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("candidate list must be nonempty")
    if N_probe < 1:
        raise ValueError(f"N_probe must be >= 1, got {N_probe}")
    test = stack_features(test_features)
    cand_seeds = child_seeds(seed, len(candidates))
    best_theta = None
    best_obj = np.inf
    for ci, theta in enumerate(candidates):
        probe_seeds = child_seeds(int(cand_seeds[ci]), N_probe)
        probes = []
        for j in range(N_probe):
            s = sample_pair(theta, n, int(probe_seeds[j]))
            fwd, _ = featurize_pair_both(s.x, s.y, basis1d, basis2d)
            probes.append(fwd)
        d2 = cdist(test, stack_features(probes), "sqeuclidean")
        obj = float(d2.min(axis=1).sum())
        if obj < best_obj:
            best_obj = obj
            best_theta = theta
    return best_theta


def theta_grid() -> list[MotherParams]:
    """The full default search grid: c, d_f in 1..10; sigmas in {0, 0.5, ..., 5}."""
    sigmas = [0.5 * i for i in range(11)]
    grid = []
    for c in range(1, 11):
        for s1 in sigmas:
            for s2 in sigmas:
                for s3 in sigmas:
                    for d_f in range(1, 11):
                        grid.append(MotherParams(c, s1, s2, s3, d_f))
    return grid


def sample_theta_grid(budget: int, seed: int) -> list[MotherParams]:
    """Uniform random subsample of the full grid, kept in grid order."""
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    full = theta_grid()
    if budget >= len(full):
        return full
    rng = np.random.default_rng(int(seed))
    idx = np.sort(rng.choice(len(full), size=budget, replace=False))
    return [full[int(i)] for i in idx]
