"""Numeric inner loops, with numba and pure-numpy implementations.

Both paths compute the same quantities in the same summation order so
results agree bit-for-bit on the inputs this package produces.  The numba
path is used unless ``GRADEMINER_DISABLE_NUMBA`` is set to a truthy value
or numba cannot be imported.
"""
import os

import numpy as np

_FLAG = "GRADEMINER_DISABLE_NUMBA"


def _numba_requested():
    return os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


try:
    if not _numba_requested():
        raise ImportError("numba disabled by " + _FLAG)
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

BACKEND = "numba" if HAS_NUMBA else "numpy"


# -- pure numpy ----------------------------------------------------------

def assign_numpy(points, centroids):
    # (n, k) squared distances; argmin keeps the first minimum (lowest index)
    diff = points[:, None, :] - centroids[None, :, :]
    d2 = np.zeros((points.shape[0], centroids.shape[0]))
    for j in range(points.shape[1]):
        d2 += diff[:, :, j] * diff[:, :, j]
    return np.argmin(d2, axis=1).astype(np.int64)


def cluster_sums_numpy(points, assignment, k):
    sums = np.zeros((k, points.shape[1]))
    np.add.at(sums, assignment, points)
    counts = np.bincount(assignment, minlength=k).astype(np.int64)
    return sums, counts


def point_sq_dist_numpy(points, centroids, assignment):
    diff = points - centroids[assignment]
    out = np.zeros(points.shape[0])
    for j in range(points.shape[1]):
        out += diff[:, j] * diff[:, j]
    return out


def sse_numpy(points, centroids, assignment):
    d2 = point_sq_dist_numpy(points, centroids, assignment)
    if d2.size == 0:
        return 0.0
    # cumsum accumulates left to right, matching the loop kernel
    return float(np.cumsum(d2)[-1])


def contingency_numpy(value_codes, class_codes, n_values, n_classes):
    flat = value_codes * n_classes + class_codes
    counts = np.bincount(flat, minlength=n_values * n_classes)
    return counts.reshape(n_values, n_classes).astype(np.int64)


# -- numba ---------------------------------------------------------------

def _assign_loop(points, centroids):
    n, d = points.shape
    k = centroids.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        best = 0
        best_d = np.inf
        for c in range(k):
            acc = 0.0
            for j in range(d):
                t = points[i, j] - centroids[c, j]
                acc += t * t
            if acc < best_d:
                best_d = acc
                best = c
        out[i] = best
    return out


def _cluster_sums_loop(points, assignment, k):
    n, d = points.shape
    sums = np.zeros((k, d))
    counts = np.zeros(k, dtype=np.int64)
    for i in range(n):
        c = assignment[i]
        counts[c] += 1
        for j in range(d):
            sums[c, j] += points[i, j]
    return sums, counts


def _point_sq_dist_loop(points, centroids, assignment):
    n, d = points.shape
    out = np.empty(n)
    for i in range(n):
        c = assignment[i]
        acc = 0.0
        for j in range(d):
            t = points[i, j] - centroids[c, j]
            acc += t * t
        out[i] = acc
    return out


def _sse_loop(points, centroids, assignment):
    n, d = points.shape
    total = 0.0
    for i in range(n):
        c = assignment[i]
        acc = 0.0
        for j in range(d):
            t = points[i, j] - centroids[c, j]
            acc += t * t
        total += acc
    return total


def _contingency_loop(value_codes, class_codes, n_values, n_classes):
    out = np.zeros((n_values, n_classes), dtype=np.int64)
    for i in range(value_codes.shape[0]):
        out[value_codes[i], class_codes[i]] += 1
    return out


if HAS_NUMBA:
    _opts = dict(cache=True, nogil=True)
    assign_numba = njit(**_opts)(_assign_loop)
    cluster_sums_numba = njit(**_opts)(_cluster_sums_loop)
    point_sq_dist_numba = njit(**_opts)(_point_sq_dist_loop)
    sse_numba = njit(**_opts)(_sse_loop)
    contingency_numba = njit(**_opts)(_contingency_loop)

    def assign(points, centroids):
        return assign_numba(points, centroids)

    def cluster_sums(points, assignment, k):
        return cluster_sums_numba(points, assignment, k)

    def point_sq_dist(points, centroids, assignment):
        return point_sq_dist_numba(points, centroids, assignment)

    def sse(points, centroids, assignment):
        return float(sse_numba(points, centroids, assignment))

    def contingency(value_codes, class_codes, n_values, n_classes):
        return contingency_numba(value_codes, class_codes, n_values, n_classes)

else:
    assign = assign_numpy
    cluster_sums = cluster_sums_numpy
    point_sq_dist = point_sq_dist_numpy
    sse = sse_numpy
    contingency = contingency_numpy


def warmup():
    """Trigger JIT compilation of every kernel (no-op on the numpy path)."""
    pts = np.zeros((2, 1))
    idx = np.zeros(2, dtype=np.int64)
    assign(pts, pts)
    cluster_sums(pts, idx, 1)
    point_sq_dist(pts, pts, idx)
    sse(pts, pts, idx)
    contingency(idx, idx, 1, 1)
