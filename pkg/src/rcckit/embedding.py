"""Gaussian kernel mixtures, random Fourier feature bases, and empirical
mean embeddings of samples, plus the exact-kernel oracles used to validate
the random-feature approximation.

The embedding of a sample S under a basis (W, b, c_k) is

    values_j = (2 c_k / |S|) * sum_{z in S} cos(<w_j, z> + b_j),

an m-dimensional stand-in for the kernel mean embedding of the empirical
distribution of S. Inner products of these vectors reconstruct kernel
means up to Monte-Carlo error in the number of features m.
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist, pdist

from ._rng import child_seeds

__all__ = [
    "KernelSpec",
    "RffBasis",
    "Embedding",
    "PairFeature",
    "TripletFeature",
    "median_heuristic",
    "kernel_matrix",
    "kernel_value",
    "draw_rff_basis",
    "embed_sample",
    "rff_kernel_estimate",
    "exact_mmd",
    "rff_mmd_sq",
    "featurize_pair",
    "featurize_pair_both",
    "featurize_triplet",
    "stack_features",
    "reconstruction_error_estimate",
    "reconstruction_error_bound",
    "convergence_curve",
    "rate_slope_estimate",
]

# Chunk edge for blockwise kernel means; fixed so summation order (and
# therefore every digit of the result) is reproducible.
_KERNEL_CHUNK = 1024


def _as_points(points, dim: int | None = None) -> np.ndarray:
    """Coerce input to a finite (n, d) float64 array; 1-D input becomes (n, 1)."""
    a = np.asarray(points, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] == 0:
        raise ValueError("expected a nonempty (n, d) array of points")
    if not np.all(np.isfinite(a)):
        raise ValueError("points contain non-finite values")
    if dim is not None and a.shape[1] != dim:
        raise ValueError(f"point dimension {a.shape[1]} does not match expected {dim}")
    return a


def _as_vector(z, dim: int) -> np.ndarray:
    v = np.atleast_1d(np.asarray(z, dtype=np.float64))
    if v.ndim != 1 or v.shape[0] != dim:
        raise ValueError(f"expected a vector of dimension {dim}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains non-finite values")
    return v


@dataclass(frozen=True)
class KernelSpec:
    """Weighted sum of Gaussian kernels sum_s w_s * exp(-gamma_s ||z - z'||^2)."""

    gammas: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        gammas = tuple(float(g) for g in self.gammas)
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "weights", weights)
        if len(gammas) == 0:
            raise ValueError("gammas must be nonempty")
        if len(weights) != len(gammas):
            raise ValueError("weights must match gammas in length")
        if not all(np.isfinite(g) and g > 0 for g in gammas):
            raise ValueError("all gammas must be finite and > 0")
        if not all(np.isfinite(w) and w >= 0 for w in weights):
            raise ValueError("all weights must be finite and >= 0")
        if abs(float(np.sum(weights)) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")

    @classmethod
    def single(cls, gamma: float) -> "KernelSpec":
        return cls((gamma,), (1.0,))

    @classmethod
    def three_scale(cls, gamma: float) -> "KernelSpec":
        """Equal-weight mixture at scales 0.1*gamma, gamma, 10*gamma.

        Equal thirds keep sup_z k(z, z) = 1, which the error bounds assume.
        """
        return cls((0.1 * gamma, gamma, 10.0 * gamma), (1 / 3, 1 / 3, 1 / 3))

    @property
    def c_k(self) -> float:
        return float(np.sum(self.weights))


def median_heuristic(points) -> float:
    """Bandwidth rule: gamma = 1 / (2 * median of pairwise squared distances).

    Falls back to gamma = 1.0 when the median distance is zero (all points
    coincide). Requires at least two finite points.
    """
    a = _as_points(points)
    if a.shape[0] < 2:
        raise ValueError("median heuristic needs at least 2 points")
    med = float(np.median(pdist(a, "sqeuclidean")))
    if med <= 0.0:
        return 1.0
    return 1.0 / (2.0 * med)


def kernel_matrix(spec: KernelSpec, a, b) -> np.ndarray:
    """Gram matrix of the weighted-sum kernel between two point sets."""
    pa = _as_points(a)
    pb = _as_points(b)
    if pa.shape[1] != pb.shape[1]:
        raise ValueError("point sets must share a dimension")
    d2 = cdist(pa, pb, "sqeuclidean")
    k = np.zeros_like(d2)
    for g, w in zip(spec.gammas, spec.weights):
        k += w * np.exp(-g * d2)
    return k


def kernel_value(spec: KernelSpec, z, z2) -> float:
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    z2 = np.atleast_1d(np.asarray(z2, dtype=np.float64))
    return float(kernel_matrix(spec, z[None, :], z2[None, :])[0, 0])


@dataclass(eq=False)
class RffBasis:
    """Random Fourier feature basis: frequencies W (m, dim), phases b in [0, 2pi)."""

    dim: int
    m: int
    W: np.ndarray
    b: np.ndarray
    c_k: float
    seed: int
    basis_id: str = field(init=False)

    def __post_init__(self):
        self.W = np.ascontiguousarray(self.W, dtype=np.float64)
        self.b = np.ascontiguousarray(self.b, dtype=np.float64)
        if self.W.shape != (self.m, self.dim):
            raise ValueError(f"W must have shape ({self.m}, {self.dim})")
        if self.b.shape != (self.m,):
            raise ValueError(f"b must have shape ({self.m},)")
        if not np.all(np.isfinite(self.W)):
            raise ValueError("W contains non-finite entries")
        if np.any(self.b < 0.0) or np.any(self.b >= 2.0 * np.pi):
            raise ValueError("phases must lie in [0, 2*pi)")
        if not (np.isfinite(self.c_k) and self.c_k > 0):
            raise ValueError("c_k must be a positive real")
        h = hashlib.sha1()
        h.update(f"{self.seed}:{self.dim}:{self.m}:{self.c_k!r}".encode())
        h.update(self.W.tobytes())
        h.update(self.b.tobytes())
        self.basis_id = h.hexdigest()[:16]


def draw_rff_basis(spec: KernelSpec, dim: int, m: int, seed: int) -> RffBasis:
    """Draw an m-feature basis approximating `spec` in dimension `dim`.

    Frequencies are i.i.d. from the Gaussian mixture N(0, 2*gamma_s*I) with
    the spec's weights (the normalized Fourier transform of the kernel);
    phases are uniform on [0, 2*pi). Bit-identical for a fixed seed.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    rng = np.random.default_rng(int(seed))
    gammas = np.asarray(spec.gammas)
    weights = np.asarray(spec.weights)
    comp = rng.choice(len(gammas), size=m, p=weights / weights.sum())
    w = rng.standard_normal((m, dim)) * np.sqrt(2.0 * gammas[comp])[:, None]
    b = rng.uniform(0.0, 2.0 * np.pi, size=m)
    return RffBasis(dim=dim, m=m, W=w, b=b, c_k=spec.c_k, seed=int(seed))


@dataclass(eq=False)
class Embedding:
    """An m-vector of cosine-feature means tied to the basis that produced it."""

    values: np.ndarray
    basis_id: str

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.ndim != 1 or self.values.shape[0] == 0:
            raise ValueError("embedding values must be a nonempty vector")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("embedding values must be finite")

    @property
    def m(self) -> int:
        return int(self.values.shape[0])


def _tree_colsum(a: np.ndarray) -> np.ndarray:
    # Column sums via a fixed fold tree: rows i and n//2 + i merge each round.
    # A duplicated sample folds to exactly 2x the original rows on the first
    # round, and doubling commutes with every later addition, so sample means
    # stay bit-exact under duplication.
    n = a.shape[0]
    if n == 1:
        return a[0].copy()
    carry = None
    while n > 1:
        h = n // 2
        if n % 2:
            last = a[2 * h]
            carry = last.copy() if carry is None else carry + last
        a = a[:h] + a[h : 2 * h]
        n = h
    return a[0] if carry is None else a[0] + carry


def embed_sample(points, basis: RffBasis) -> Embedding:
    """Empirical mean embedding of a sample under a fixed basis."""
    p = _as_points(points, dim=basis.dim)
    c = np.cos(p @ basis.W.T + basis.b)
    mean = _tree_colsum(c) / float(p.shape[0])
    return Embedding(mean * (2.0 * basis.c_k), basis.basis_id)


def rff_kernel_estimate(z, z2, basis: RffBasis) -> float:
    """Monte-Carlo kernel estimate (2 c_k / m) * sum_j cos_j(z) * cos_j(z2)."""
    za = _as_vector(z, basis.dim)
    zb = _as_vector(z2, basis.dim)
    ca = np.cos(basis.W @ za + basis.b)
    cb = np.cos(basis.W @ zb + basis.b)
    return float((2.0 * basis.c_k / basis.m) * np.dot(ca, cb))


def _mean_kernel(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> float:
    # Blockwise mean of the Gram matrix; avoids materializing huge matrices.
    # The in-place exp on the distance block is the hot path for large inputs.
    single = len(spec.gammas) == 1
    total = 0.0
    for i in range(0, a.shape[0], _KERNEL_CHUNK):
        ai = a[i : i + _KERNEL_CHUNK]
        for j in range(0, b.shape[0], _KERNEL_CHUNK):
            d2 = cdist(ai, b[j : j + _KERNEL_CHUNK], "sqeuclidean")
            if single:
                d2 *= -spec.gammas[0]
                np.exp(d2, out=d2)
                total += spec.weights[0] * float(d2.sum())
            else:
                for g, w in zip(spec.gammas, spec.weights):
                    total += w * float(np.exp(d2 * -g).sum())
    return total / (a.shape[0] * b.shape[0])


def exact_mmd(s, t, spec: KernelSpec) -> float:
    """Exact RKHS distance between the empirical embeddings of two samples.

    Computed with the kernel trick as
    sqrt(mean k(s, s') - 2 mean k(s, t) + mean k(t, t')), clamped at zero.
    """
    ps = _as_points(s)
    pt = _as_points(t)
    if ps.shape[1] != pt.shape[1]:
        raise ValueError("samples must share a dimension")
    mss = _mean_kernel(spec, ps, ps)
    mtt = _mean_kernel(spec, pt, pt)
    # canonical argument order keeps the cross-term summation order, and so
    # the result, exactly symmetric in (s, t)
    if (pt.shape[0], pt.tobytes()) < (ps.shape[0], ps.tobytes()):
        mst = _mean_kernel(spec, pt, ps)
    else:
        mst = _mean_kernel(spec, ps, pt)
    return float(np.sqrt(max(mss - 2.0 * mst + mtt, 0.0)))


def rff_mmd_sq(e1: Embedding, e2: Embedding, basis: RffBasis) -> float:
    """Random-feature reconstruction of the squared embedding distance.

    With the embedding scaling values_j = (2 c_k / n) sum cos_j, the kernel
    estimate pairs with a 1/m average, so

        mmd^2 ~= ||values_S - values_T||^2 / (2 * c_k * m).
    """
    if e1.basis_id != basis.basis_id or e2.basis_id != basis.basis_id:
        raise ValueError("embeddings were not produced by the given basis")
    d = e1.values - e2.values
    return float(np.dot(d, d) / (2.0 * basis.c_k * basis.m))


@dataclass(eq=False)
class PairFeature:
    """Feature of a bivariate sample: both marginal embeddings plus the joint."""

    marginal_x: Embedding
    marginal_y: Embedding
    joint: Embedding

    def __post_init__(self):
        if self.marginal_x.basis_id != self.marginal_y.basis_id:
            raise ValueError("marginal blocks must share one 1-D basis")

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate(
            [self.marginal_x.values, self.marginal_y.values, self.joint.values]
        )


@dataclass(eq=False)
class TripletFeature:
    """Feature of a trivariate sample: two marginal embeddings plus the 3-D joint."""

    first: Embedding
    second: Embedding
    joint: Embedding

    def __post_init__(self):
        if self.first.basis_id != self.second.basis_id:
            raise ValueError("marginal blocks must share one 1-D basis")

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.first.values, self.second.values, self.joint.values])


def featurize_pair(x, y, basis1d: RffBasis, basis2d: RffBasis) -> PairFeature:
    """Blocks (embed {x_j}, embed {y_j}, embed {(x_j, y_j)}), in that order."""
    if basis1d.dim != 1 or basis2d.dim != 2:
        raise ValueError("featurize_pair needs a 1-D and a 2-D basis")
    xv = _as_points(x, dim=1)
    yv = _as_points(y, dim=1)
    if xv.shape[0] != yv.shape[0]:
        raise ValueError("x and y must have equal length")
    joint = np.column_stack([xv[:, 0], yv[:, 0]])
    return PairFeature(
        marginal_x=embed_sample(xv, basis1d),
        marginal_y=embed_sample(yv, basis1d),
        joint=embed_sample(joint, basis2d),
    )


def featurize_pair_both(
    x, y, basis1d: RffBasis, basis2d: RffBasis
) -> tuple[PairFeature, PairFeature]:
    """Features of (x, y) and of the swapped pair (y, x), sharing marginal blocks."""
    if basis1d.dim != 1 or basis2d.dim != 2:
        raise ValueError("featurize_pair needs a 1-D and a 2-D basis")
    xv = _as_points(x, dim=1)
    yv = _as_points(y, dim=1)
    if xv.shape[0] != yv.shape[0]:
        raise ValueError("x and y must have equal length")
    ex = embed_sample(xv, basis1d)
    ey = embed_sample(yv, basis1d)
    jx = embed_sample(np.column_stack([xv[:, 0], yv[:, 0]]), basis2d)
    jy = embed_sample(np.column_stack([yv[:, 0], xv[:, 0]]), basis2d)
    return (
        PairFeature(marginal_x=ex, marginal_y=ey, joint=jx),
        PairFeature(marginal_x=ey, marginal_y=ex, joint=jy),
    )


def featurize_triplet(u, v, w, basis1d: RffBasis, basis3d: RffBasis) -> TripletFeature:
    """Blocks (embed {u_j}, embed {v_j}, embed {(u_j, v_j, w_j)}), in that order."""
    if basis1d.dim != 1 or basis3d.dim != 3:
        raise ValueError("featurize_triplet needs a 1-D and a 3-D basis")
    uv = _as_points(u, dim=1)
    vv = _as_points(v, dim=1)
    wv = _as_points(w, dim=1)
    if not (uv.shape[0] == vv.shape[0] == wv.shape[0]):
        raise ValueError("u, v and w must have equal length")
    joint = np.column_stack([uv[:, 0], vv[:, 0], wv[:, 0]])
    return TripletFeature(
        first=embed_sample(uv, basis1d),
        second=embed_sample(vv, basis1d),
        joint=embed_sample(joint, basis3d),
    )


def stack_features(features) -> np.ndarray:
    """Stack PairFeature/TripletFeature objects into an (n, 3m) matrix."""
    rows = [f.vector for f in features]
    if not rows:
        raise ValueError("no features to stack")
    return np.stack(rows)


def reconstruction_error_estimate(
    points, basis: RffBasis, spec: KernelSpec, q_samples: int, seed: int
) -> float:
    """Monte-Carlo L2 error of the random-feature reconstruction of the embedding.

    Draws q_samples reference points t ~ N(0, I_d), evaluates the exact
    empirical embedding mean_z k(z, t) and its cosine-feature reconstruction
    at each t, and returns the root-mean-square difference. This estimates
    the L2(Q) distance bounded by `reconstruction_error_bound`.
    """
    if q_samples < 1:
        raise ValueError(f"q_samples must be >= 1, got {q_samples}")
    p = _as_points(points, dim=basis.dim)
    rng = np.random.default_rng(int(seed))
    t = rng.standard_normal((q_samples, basis.dim))
    exact = kernel_matrix(spec, t, p).mean(axis=1)
    cos_t = np.cos(t @ basis.W.T + basis.b)
    recon = cos_t @ embed_sample(p, basis).values / basis.m
    return float(np.sqrt(np.mean((exact - recon) ** 2)))


def reconstruction_error_bound(c_k: float, m: int, n: int, delta: float = 0.05) -> float:
    """High-probability bound (2 c_k / sqrt(m)) * (1 + sqrt(2 ln(n / delta)))."""
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must be in (0, 1)")
    return (2.0 * c_k / np.sqrt(m)) * (1.0 + np.sqrt(2.0 * np.log(n / delta)))


def convergence_curve(
    dist_seed: int, sizes, reps: int, spec: KernelSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Mean embedding deviation per sample size, against a large reference draw.

    For a 2-D standard normal population, draws `reps` samples at every size
    and averages exact_mmd(S_n, S_ref), with S_ref of size 10 * max(sizes).
    Returns (sizes, mean deviations).
    """
    sizes = [int(s) for s in sizes]
    if len(sizes) < 2:
        raise ValueError("need at least 2 sizes")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly increasing")
    if min(sizes) < 1:
        raise ValueError("sizes must be positive")
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")

    seeds = child_seeds(dist_seed, 1 + len(sizes) * reps)
    ref = np.random.default_rng(int(seeds[0])).standard_normal((10 * max(sizes), 2))
    mtt = _mean_kernel(spec, ref, ref)

    devs = np.empty(len(sizes))
    for i, n in enumerate(sizes):
        vals = np.empty(reps)
        for r in range(reps):
            s = np.random.default_rng(int(seeds[1 + i * reps + r])).standard_normal((n, 2))
            mss = _mean_kernel(spec, s, s)
            mst = _mean_kernel(spec, s, ref)
            vals[r] = np.sqrt(max(mss - 2.0 * mst + mtt, 0.0))
        devs[i] = vals.mean()
    return np.asarray(sizes, dtype=np.float64), devs


def _loglog_slope(ns: np.ndarray, devs: np.ndarray) -> float:
    if np.any(devs <= 0):
        raise ValueError("deviations must be positive for a log-log fit")
    return float(np.polyfit(np.log(ns), np.log(devs), 1)[0])


def rate_slope_estimate(dist_seed: int, sizes, reps: int, spec: KernelSpec) -> float:
    """Least-squares slope of log(mean deviation) against log(sample size).

    An n^(-1/2) convergence rate of the empirical embedding shows up as a
    slope near -0.5.
    """
    ns, devs = convergence_curve(dist_seed, sizes, reps, spec)
    return _loglog_slope(ns, devs)
