"""Max-norm nearest-neighbor queries and strict-radius counts.

All distances are maximum-norm. The two query operations follow one
counting convention throughout the package:

* kth_nn_distance excludes the query point itself;
* count_within_strict counts points strictly inside the radius and adds
  one for the query point, so the result is always >= 1.

The indexed implementation wraps a k-d tree. Strict-< counting on a
closed-ball tree query is exact because for any radius eps > 0 the set
{d < eps} equals {d <= nextafter(eps, -inf)} in double precision. The
brute-force functions below are an independent linear-scan implementation
of the same contracts, used as the correctness oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .embedding import EmbeddedEnsemble
from .errors import InsufficientPointsError, NonFiniteSampleError

__all__ = [
    "PointSet",
    "SearchWindow",
    "build_window_index",
    "oracle_kth_nn_distance",
    "oracle_count_within_strict",
]


@dataclass(frozen=True)
class SearchWindow:
    """Time window [center - half_width, center + half_width], truncated."""

    center: int
    half_width: int

    def __post_init__(self) -> None:
        if self.half_width < 0:
            raise InsufficientPointsError(
                f"window half-width must be >= 0, got {self.half_width}"
            )

    def bounds(self, n_times: int) -> tuple[int, int]:
        """Inclusive (lo, hi) clipped to [0, n_times); may be empty."""
        lo = max(self.center - self.half_width, 0)
        hi = min(self.center + self.half_width, n_times - 1)
        return lo, hi


class PointSet:
    """Immutable set of same-dimension points with max-norm queries."""

    def __init__(self, points: np.ndarray,
                 trials: Optional[np.ndarray] = None,
                 times: Optional[np.ndarray] = None):
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InsufficientPointsError(f"bad point array shape {pts.shape}")
        if not np.isfinite(pts).all():
            raise NonFiniteSampleError("points contain NaN or infinity")
        pts.setflags(write=False)
        self._points = pts
        self.trials = None if trials is None else np.asarray(trials, dtype=np.int64)
        self.times = None if times is None else np.asarray(times, dtype=np.int64)
        self._tree: Optional[cKDTree] = None

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def n_points(self) -> int:
        return self._points.shape[0]

    @property
    def dim(self) -> int:
        return self._points.shape[1]

    def _index(self) -> cKDTree:
        if self._tree is None:
            self._tree = cKDTree(self._points)
        return self._tree

    def _check_id(self, point_id: int) -> int:
        i = int(point_id)
        if not 0 <= i < self.n_points:
            raise InsufficientPointsError(
                f"point id {i} outside set of {self.n_points} points"
            )
        return i

    def kth_nn_distance(self, point_id: int, k: int) -> float:
        """Distance to the k-th nearest other point (query excluded)."""
        i = self._check_id(point_id)
        if not 1 <= k <= self.n_points - 1:
            raise InsufficientPointsError(
                f"k={k} needs at least k+1 points, set has {self.n_points}"
            )
        d, _ = self._index().query(self._points[i], k=k + 1, p=np.inf)
        return float(d[k])

    def kth_nn_distances(self, k: int,
                         point_ids: Optional[np.ndarray] = None) -> np.ndarray:
        """kth_nn_distance for many points at once (all points if None)."""
        if not 1 <= k <= self.n_points - 1:
            raise InsufficientPointsError(
                f"k={k} needs at least k+1 points, set has {self.n_points}"
            )
        if point_ids is None:
            queries = self._points
        else:
            queries = self._points[np.asarray(point_ids, dtype=np.int64)]
        d, _ = self._index().query(queries, k=k + 1, p=np.inf)
        return np.ascontiguousarray(d[:, k])

    def count_within_strict(self, point_id: int, radius: float) -> int:
        i = self._check_id(point_id)
        return int(self.counts_within_strict(np.array([radius]), np.array([i]))[0])

    def counts_within_strict(self, radii: np.ndarray,
                             point_ids: Optional[np.ndarray] = None) -> np.ndarray:
        """Strict-radius count (self included) at each listed point.

        point_ids=None queries every point in order; radii must then have
        one entry per point.
        """
        if point_ids is None:
            queries = self._points
        else:
            ids = np.asarray(point_ids, dtype=np.int64)
            if ids.size and (ids.min() < 0 or ids.max() >= self.n_points):
                raise InsufficientPointsError("point id outside set")
            queries = self._points[ids]
        radii = np.asarray(radii, dtype=np.float64)
        if radii.shape != (queries.shape[0],):
            raise InsufficientPointsError(
                f"need one radius per query, got {radii.shape}"
            )
        if (radii < 0).any():
            raise InsufficientPointsError("radii must be >= 0")
        # closed ball at the largest double strictly below eps == open ball at eps
        shrunk = np.nextafter(radii, -np.inf)
        shrunk = np.maximum(shrunk, 0.0)
        counts = self._index().query_ball_point(
            queries, shrunk, p=np.inf, return_length=True
        )
        counts = np.asarray(counts, dtype=np.int64)
        # eps == 0: strictness leaves only the query point itself
        return np.where(radii == 0.0, 1, counts)


def oracle_kth_nn_distance(points: np.ndarray, point_id: int, k: int) -> float:
    """Linear-scan reference for PointSet.kth_nn_distance."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[0]
    if not 1 <= k <= n - 1:
        raise InsufficientPointsError(
            f"k={k} needs at least k+1 points, set has {n}"
        )
    d = np.abs(pts - pts[int(point_id)]).max(axis=1)
    d[int(point_id)] = np.inf
    return float(np.partition(d, k - 1)[k - 1])


def oracle_count_within_strict(points: np.ndarray, point_id: int,
                               radius: float) -> int:
    """Linear-scan reference for PointSet.count_within_strict."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if radius < 0:
        raise InsufficientPointsError("radius must be >= 0")
    i = int(point_id)
    d = np.abs(pts - pts[i]).max(axis=1)
    others = (d < radius)
    others[i] = False
    return int(others.sum()) + 1


def build_window_index(embedded: EmbeddedEnsemble,
                       marginal: Optional[Sequence[int]],
                       window: SearchWindow) -> PointSet:
    """Point set of all (trial, window time) vectors, projected onto a marginal.

    marginal=None keeps the full joint vector. Point order is trial-major
    then time-ascending; trial and window-relative time ids are attached
    for bookkeeping.
    """
    lo, hi = window.bounds(embedded.n_times)
    if hi < lo:
        raise InsufficientPointsError(
            f"window centered at {window.center} is empty for "
            f"{embedded.n_times} retained times"
        )
    w = hi - lo + 1
    r = embedded.n_trials
    chunk = embedded.data[:, lo:hi + 1, :]
    if marginal is not None:
        cols = np.asarray(list(marginal), dtype=np.int64)
        chunk = chunk[:, :, cols]
    pts = np.ascontiguousarray(chunk).reshape(r * w, -1)
    trials = np.repeat(np.arange(r, dtype=np.int64), w)
    times = np.tile(np.arange(lo, hi + 1, dtype=np.int64), r)
    return PointSet(pts, trials, times)
