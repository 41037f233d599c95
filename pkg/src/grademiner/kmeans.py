"""Lloyd's k-means over real-valued feature vectors.

Points are handled as an ``(n, d)`` float array; a 1-D sequence is treated
as ``n`` points in one dimension.  Nearest-centroid ties go to the lowest
centroid index, and a cluster that loses all its members is moved onto the
point farthest from its own cluster mean.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .errors import (
    ConfigError,
    DimensionMismatch,
    InputError,
    InvalidAssignmentIndex,
    TooFewDistinctPoints,
)


@dataclass(frozen=True)
class KMeansConfig:
    k: int = 3
    seed: int = 0
    max_iters: int = 100
    epsilon: float = 1e-9

    def __post_init__(self):
        for name in ("k", "seed", "max_iters"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise ConfigError(f"{name} must be an integer, got {v!r}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if not (np.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ConfigError(f"epsilon must be a non-negative real, got {self.epsilon}")


@dataclass(frozen=True, eq=False)
class ClusterModel:
    centroids: np.ndarray
    assignment: np.ndarray
    iterations: int
    sse: float
    converged: bool
    # objective after every assign+recompute round
    sse_trace: Tuple[float, ...] = ()

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k)

    def __eq__(self, other):
        if not isinstance(other, ClusterModel):
            return NotImplemented
        return (
            np.array_equal(self.centroids, other.centroids)
            and np.array_equal(self.assignment, other.assignment)
            and self.iterations == other.iterations
            and self.sse == other.sse
            and self.converged == other.converged
            and self.sse_trace == other.sse_trace
        )

    __hash__ = None


def as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise DimensionMismatch(f"points must be 1-D or 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("points must have finite coordinates")
    return np.ascontiguousarray(arr)


def _as_assignment(assignment, n, k) -> np.ndarray:
    a = np.asarray(assignment)
    if a.shape != (n,):
        raise DimensionMismatch(f"assignment has shape {a.shape}, expected ({n},)")
    if a.size and not np.issubdtype(a.dtype, np.integer):
        raise InvalidAssignmentIndex("assignment indices must be integers")
    a = a.astype(np.int64)
    if a.size and (a.min() < 0 or a.max() >= k):
        raise InvalidAssignmentIndex(f"assignment indices must lie in [0, {k})")
    return np.ascontiguousarray(a)


def init_centroids(points, cfg: KMeansConfig) -> np.ndarray:
    """Pick ``k`` distinct input points uniformly at random (seeded)."""
    pts = as_points(points)
    distinct = np.unique(pts, axis=0)
    if cfg.k > len(distinct):
        raise TooFewDistinctPoints(
            f"k={cfg.k} exceeds the number of distinct points ({len(distinct)})"
        )
    rng = np.random.default_rng(cfg.seed)
    pick = rng.choice(len(distinct), size=cfg.k, replace=False)
    return distinct[pick].copy()


def assign_points(points, centroids) -> np.ndarray:
    pts = as_points(points)
    cents = as_points(centroids)
    if cents.shape[0] == 0:
        raise DimensionMismatch("no centroids given")
    if pts.shape[1] != cents.shape[1]:
        raise DimensionMismatch(
            f"points have dimension {pts.shape[1]}, centroids {cents.shape[1]}"
        )
    return _kernels.assign(pts, cents)


def recompute_centroids(points, assignment, k: int) -> np.ndarray:
    """Mean of each cluster's members; empty clusters are relocated.

    An empty cluster takes the point with the largest squared distance to
    its own (non-empty) cluster mean.  Several empty clusters take distinct
    points in decreasing distance order, ties to the lowest point index.
    """
    pts = as_points(points)
    a = _as_assignment(assignment, pts.shape[0], k)
    sums, counts = _kernels.cluster_sums(pts, a, k)
    cents = np.zeros_like(sums)
    filled = counts > 0
    cents[filled] = sums[filled] / counts[filled, None]
    empty = np.flatnonzero(~filled)
    if empty.size:
        if pts.shape[0] == 0:
            raise InvalidAssignmentIndex("cannot relocate empty clusters without points")
        d2 = _kernels.point_sq_dist(pts, cents, a).copy()
        for c in empty:
            far = int(np.argmax(d2))
            cents[c] = pts[far]
            d2[far] = -1.0
    return cents


def sse(points, centroids, assignment) -> float:
    pts = as_points(points)
    cents = as_points(centroids)
    if pts.shape[1] != cents.shape[1]:
        raise DimensionMismatch(
            f"points have dimension {pts.shape[1]}, centroids {cents.shape[1]}"
        )
    a = _as_assignment(assignment, pts.shape[0], cents.shape[0])
    return _kernels.sse(pts, cents, a)


def fit(points, cfg: KMeansConfig = KMeansConfig()) -> ClusterModel:
    """Run Lloyd iterations from a seeded start.

    Each round recomputes centroids from the current assignment and then
    reassigns every point.  The run has converged once no centroid moved by
    more than ``epsilon`` in any coordinate and the assignment is unchanged,
    so the returned model is a fixed point of one more round.
    """
    pts = as_points(points)
    centroids = init_centroids(pts, cfg)
    assignment = _kernels.assign(pts, centroids)
    trace = []
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        new = recompute_centroids(pts, assignment, cfg.k)
        new_assignment = _kernels.assign(pts, new)
        trace.append(_kernels.sse(pts, new, new_assignment))
        shift = float(np.max(np.abs(new - centroids)))
        stable = np.array_equal(new_assignment, assignment)
        centroids, assignment = new, new_assignment
        if shift <= cfg.epsilon and stable:
            converged = True
            break
    return ClusterModel(
        centroids=centroids,
        assignment=assignment,
        iterations=it,
        sse=trace[-1],
        converged=converged,
        sse_trace=tuple(trace),
    )


def fit_best(points, cfg: KMeansConfig = KMeansConfig(), n_init: int = 10,
             seeds: Optional[Sequence[int]] = None) -> ClusterModel:
    """Lowest-SSE model over several seeds (``cfg.seed`` .. ``cfg.seed + n_init - 1``).

    Ties keep the earliest seed.
    """
    if seeds is None:
        if n_init < 1:
            raise ConfigError("n_init must be >= 1")
        seeds = range(cfg.seed, cfg.seed + n_init)
    best = None
    for s in seeds:
        m = fit(points, KMeansConfig(cfg.k, int(s), cfg.max_iters, cfg.epsilon))
        if best is None or m.sse < best.sse:
            best = m
    if best is None:
        raise ConfigError("no seeds given")
    return best
