"""Stationary nearest-neighbor estimators over pooled points.

kl_entropy implements the classic k-NN differential entropy estimator
under the maximum norm:

    H = -psi(k) + psi(N) + d*log(2) + (d/N) * sum_i log eps_i

where eps_i is the distance from point i to its k-th nearest neighbor
(self excluded) and log(2^d) is the max-norm unit-ball volume term.

static_combination evaluates a signed marginal combination with the
variable-neighbor-count correction: the joint k-th neighbor distance at
each point sets a radius, marginal neighbor counts inside that radius
(strict inequality, self included) feed F(x) = psi(x) - psi(N), and the
estimate is F(k) - sum_i signs[i] * mean(F(count_i)). All digamma values
come from the integer recurrence psi(n) = -gamma + sum_{j<n} 1/j, cached
in a growing table; no special-function library is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .combinations import CombinationSpec, validate
from .embedding import EmbeddedEnsemble
from .errors import (
    ConfigError,
    DuplicatePointsError,
    InsufficientPointsError,
    NonFiniteSampleError,
)
from .knn import PointSet

EULER_GAMMA = 0.57721566490153286

_psi_table = np.array([-EULER_GAMMA])


def digamma_int(n):
    """psi at positive integer arguments, scalar or array, via recurrence."""
    global _psi_table
    arr = np.asarray(n)
    if arr.size == 0:
        return np.zeros(arr.shape)
    if not np.issubdtype(arr.dtype, np.integer):
        raise ConfigError(f"digamma_int takes integers, got dtype {arr.dtype}")
    top = int(arr.max(initial=1))
    if int(arr.min(initial=1)) < 1:
        raise ConfigError("digamma_int requires arguments >= 1")
    if top > _psi_table.size:
        size = max(top, 2 * _psi_table.size)
        table = np.empty(size)
        table[0] = -EULER_GAMMA
        # sequential cumulative sum reproduces the literal recurrence loop
        table[1:] = -EULER_GAMMA + np.cumsum(1.0 / np.arange(1, size))
        _psi_table = table
    out = _psi_table[arr - 1]
    if np.isscalar(n) or arr.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class EstimatorParams:
    """Neighbor count and optional anti-duplicate jitter.

    jitter > 0 adds uniform noise in [-jitter, jitter] per coordinate
    before any neighbor search, with a stream fixed by jitter_seed so
    repeated runs stay identical.
    """

    k: int = 4
    jitter: float = 0.0
    jitter_seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if not math.isfinite(self.jitter) or self.jitter < 0:
            raise ConfigError(f"jitter must be finite and >= 0, got {self.jitter}")


def auto_jitter_amplitude(data: np.ndarray) -> float:
    """Default jitter amplitude: 1e-10 times the overall data range."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.size == 0:
        return 0.0
    return 1e-10 * float(arr.max() - arr.min())


def _prepare_points(points: np.ndarray, params: EstimatorParams) -> np.ndarray:
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise ConfigError(f"points must be 1-d or 2-d, got shape {pts.shape}")
    if not np.isfinite(pts).all():
        raise NonFiniteSampleError("points contain NaN or infinity")
    if params.jitter > 0:
        rng = np.random.default_rng(np.random.SeedSequence(params.jitter_seed))
        pts = pts + rng.uniform(-params.jitter, params.jitter, pts.shape)
    return pts


def kl_entropy(points: np.ndarray, params: EstimatorParams = EstimatorParams()) -> float:
    """Differential entropy of a sample, in nats."""
    pts = _prepare_points(points, params)
    n, d = pts.shape
    if n < params.k + 1:
        raise InsufficientPointsError(
            f"need at least k+1={params.k + 1} points, got {n}"
        )
    eps = PointSet(pts).kth_nn_distances(params.k)
    if (eps == 0.0).any():
        raise DuplicatePointsError(
            "zero k-th neighbor distance (duplicate points); "
            "set EstimatorParams.jitter to break ties"
        )
    return float(
        -digamma_int(params.k)
        + digamma_int(n)
        + d * math.log(2.0)
        + (d / n) * np.log(eps).sum()
    )


def combination_from_counts(k: int, n_candidates, counts: np.ndarray,
                            signs) -> np.ndarray:
    """Assemble sign-weighted estimates from neighbor counts.

    counts has marginals on its last axis and sample points on the
    second-to-last; n_candidates broadcasts against the remaining axes.
    Returns F(k) - sum_i signs[i] * mean_points(F(counts[..., i])).
    """
    counts = np.asarray(counts)
    psi_n = digamma_int(np.asarray(n_candidates))
    psi_counts = digamma_int(counts)
    value = digamma_int(k) - psi_n
    for i, s in enumerate(signs):
        value = value - s * (psi_counts[..., i].mean(axis=-1) - psi_n)
    return value


def static_combination(embedded: EmbeddedEnsemble, spec: CombinationSpec,
                       params: EstimatorParams = EstimatorParams()) -> float:
    """Stationary combination estimate over all trials and times pooled."""
    if spec.width != embedded.width:
        raise ConfigError(
            f"spec width {spec.width} != embedded width {embedded.width}"
        )
    report = validate(spec)
    if not report.ok:
        raise ConfigError(f"invalid combination spec: {report.message()}")
    pool = _prepare_points(embedded.pooled(), params)
    n = pool.shape[0]
    if n < params.k + 1:
        raise InsufficientPointsError(
            f"need at least k+1={params.k + 1} pooled points, got {n}"
        )
    joint = PointSet(pool)
    eps = joint.kth_nn_distances(params.k)
    if (eps == 0.0).any():
        raise DuplicatePointsError(
            "zero k-th neighbor distance in the joint space (duplicate points); "
            "set EstimatorParams.jitter to break ties"
        )
    counts = np.empty((n, spec.n_marginals), dtype=np.int64)
    for i, cols in enumerate(spec.marginals):
        marginal = PointSet(np.ascontiguousarray(pool[:, list(cols)]))
        counts[:, i] = marginal.counts_within_strict(eps)
    return float(combination_from_counts(params.k, n, counts, spec.signs))
