"""Time-resolved combination estimators over a trial ensemble.

Three estimators share one windowed neighbor statistic:

* ensemble_estimate pools candidates across all trials inside a sliding
  window centered on each instant and averages the sign-weighted
  correction over trials; this is the low-variance estimator the package
  exists for.
* average_estimate runs the single-trial pointwise estimator per trial
  (neighbors only from that trial's own window) and averages the
  resulting series across trials; kept as the high-variance baseline.
* naive_pointwise is the single-trial estimator itself.

All three then apply a truncated moving-average smoother of order q.

Per-instant candidate counts N(n) = r' * |window| feed the psi(N) terms
by default; TemporalParams.candidate_count="fixed" switches to the
constant pool size r' * T for comparison (for measures whose signs sum
to 1 the psi(N) terms cancel and the switch has no effect).

Trial-permutation invariance of ensemble_estimate is exact: per-instant
neighbor counts are sorted over trials before the psi average, so
relabeling trials permutes identical summands into the same order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._kernels import window_marginal_stats
from .combinations import CombinationSpec, validate
from .embedding import EmbeddedEnsemble
from .errors import ConfigError, DuplicatePointsError, FormatError
from .estimators import EstimatorParams, combination_from_counts
from .knn import SearchWindow, build_window_index

CANDIDATE_COUNT_MODES = ("per-window", "fixed")
ENGINES = ("fast", "reference")


@dataclass(frozen=True)
class TemporalParams:
    """Window half-width, smoothing order, and the core estimator knobs."""

    half_width: int = 25
    smoothing: int = 20
    estimator: EstimatorParams = field(default_factory=EstimatorParams)
    candidate_count: str = "per-window"

    def __post_init__(self) -> None:
        if self.half_width < 0:
            raise ConfigError(f"half_width must be >= 0, got {self.half_width}")
        if self.smoothing < 1:
            raise ConfigError(f"smoothing order must be >= 1, got {self.smoothing}")
        if self.candidate_count not in CANDIDATE_COUNT_MODES:
            raise ConfigError(
                f"candidate_count must be one of {CANDIDATE_COUNT_MODES}, "
                f"got {self.candidate_count!r}"
            )


@dataclass(eq=False)
class EstimateSeries:
    """Per-instant estimate with bookkeeping and optional significance."""

    times: np.ndarray
    values: np.ndarray
    n_eff: np.ndarray
    threshold: Optional[np.ndarray] = None
    p_value: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        self.n_eff = np.asarray(self.n_eff, dtype=np.int64)
        if not self.times.shape == self.values.shape == self.n_eff.shape:
            raise ConfigError("times, values, n_eff must have matching shapes")

    def __len__(self) -> int:
        return self.times.size

    def to_csv(self, path) -> None:
        cols = ["time", "value", "n_eff"]
        if self.threshold is not None:
            cols += ["threshold", "p_value"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(cols)
            for i in range(len(self)):
                row = [int(self.times[i]), format(self.values[i], ".17g"),
                       int(self.n_eff[i])]
                if self.threshold is not None:
                    row += [format(self.threshold[i], ".17g"),
                            format(self.p_value[i], ".17g")]
                writer.writerow(row)

    @classmethod
    def from_csv(cls, path) -> "EstimateSeries":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or header[:3] != ["time", "value", "n_eff"]:
                raise FormatError(f"unexpected estimate header {header}")
            has_sig = header[3:] == ["threshold", "p_value"]
            rows = [row for row in reader if row]
        times = np.array([int(float(r[0])) for r in rows], dtype=np.int64)
        values = np.array([float(r[1]) for r in rows])
        n_eff = np.array([int(float(r[2])) for r in rows], dtype=np.int64)
        threshold = p_value = None
        if has_sig:
            threshold = np.array([float(r[3]) for r in rows])
            p_value = np.array([float(r[4]) for r in rows])
        return cls(times, values, n_eff, threshold, p_value)


def moving_average(values: np.ndarray, order: int) -> np.ndarray:
    """Centered moving average, windows truncated at the edges.

    Even orders lean one sample into the past: order 20 averages
    [n-10, n+9]. order=1 is the identity.
    """
    if order < 1:
        raise ConfigError(f"order must be >= 1, got {order}")
    values = np.asarray(values, dtype=np.float64)
    if order == 1:
        return values.copy()
    n = values.size
    back = (order - 1 + 1) // 2   # ceil((order-1)/2)
    fwd = (order - 1) // 2
    out = np.empty_like(values)
    for i in range(n):
        lo = max(i - back, 0)
        hi = min(i + fwd, n - 1)
        out[i] = values[lo:hi + 1].mean()
    return out


def _check_inputs(embedded: EmbeddedEnsemble, spec: CombinationSpec,
                  params: TemporalParams, engine: str) -> None:
    if engine not in ENGINES:
        raise ConfigError(f"engine must be one of {ENGINES}, got {engine!r}")
    if spec.width != embedded.width:
        raise ConfigError(
            f"spec width {spec.width} != embedded width {embedded.width}"
        )
    report = validate(spec)
    if not report.ok:
        raise ConfigError(f"invalid combination spec: {report.message()}")


def _maybe_jitter(data: np.ndarray, est: EstimatorParams) -> np.ndarray:
    if est.jitter <= 0:
        return data
    rng = np.random.default_rng(np.random.SeedSequence(est.jitter_seed))
    return data + rng.uniform(-est.jitter, est.jitter, data.shape)


def _windowed_stats(data: np.ndarray, spec: CombinationSpec, k: int,
                    sigma: int, engine: str):
    if engine == "fast":
        return window_marginal_stats(
            data, spec.width, spec.marginals, spec.signs, k, sigma
        )
    return _windowed_stats_reference(data, spec, k, sigma)


def _windowed_stats_reference(data: np.ndarray, spec: CombinationSpec,
                              k: int, sigma: int):
    """Same statistic computed point set by point set through the knn engine."""
    r, t, m = data.shape
    if r * min(sigma + 1, t) < k + 1:
        raise ConfigError(
            f"smallest window holds {r * min(sigma + 1, t)} candidates, "
            f"need k+1={k + 1}"
        )
    shell = EmbeddedEnsemble(data, 0, ())
    eps = np.empty((t, r))
    counts = np.empty((t, r, spec.n_marginals), dtype=np.int64)
    n_candidates = np.empty(t, dtype=np.int64)
    for n in range(t):
        win = SearchWindow(n, sigma)
        joint = build_window_index(shell, None, win)
        lo, _ = win.bounds(t)
        w = joint.n_points // r
        ids = np.array([rr * w + (n - lo) for rr in range(r)], dtype=np.int64)
        eps[n] = joint.kth_nn_distances(k, ids)
        for i, cols in enumerate(spec.marginals):
            marginal = build_window_index(shell, cols, win)
            counts[n, :, i] = marginal.counts_within_strict(eps[n], ids)
        n_candidates[n] = joint.n_points
    return eps, counts, n_candidates


def _assemble(counts: np.ndarray, n_candidates: np.ndarray,
              spec: CombinationSpec, k: int) -> np.ndarray:
    ordered = np.sort(counts, axis=1)  # exact trial-permutation invariance
    return combination_from_counts(k, n_candidates, ordered, spec.signs)


def ensemble_estimate(embedded: EmbeddedEnsemble, spec: CombinationSpec,
                      params: TemporalParams = TemporalParams(),
                      engine: str = "fast") -> EstimateSeries:
    """Cross-trial windowed estimate at every retained instant."""
    _check_inputs(embedded, spec, params, engine)
    est = params.estimator
    data = _maybe_jitter(embedded.data, est)
    eps, counts, n_candidates = _windowed_stats(
        data, spec, est.k, params.half_width, engine
    )
    if (eps == 0.0).any():
        raise DuplicatePointsError(
            "zero k-th neighbor distance inside a window (duplicate points); "
            "set EstimatorParams.jitter to break ties"
        )
    if params.candidate_count == "fixed":
        n_candidates = np.full_like(n_candidates, embedded.n_trials * embedded.n_times)
    values = _assemble(counts, n_candidates, spec, est.k)
    return EstimateSeries(
        embedded.times,
        moving_average(values, params.smoothing),
        n_candidates,
    )


def _per_trial_values(data: np.ndarray, spec: CombinationSpec,
                      params: TemporalParams, engine: str):
    """Unsmoothed single-trial series for each trial, shape (r', T).

    Each trial is treated as a stationary record: the neighbor search set
    at every instant is the trial's full length, and the instant's value
    is the single-point term of the static combination there. half_width
    plays no role on this path.
    """
    r, t, m = data.shape
    est = params.estimator
    values = np.empty((r, t))
    n_candidates = None
    for trial in range(r):
        block = np.ascontiguousarray(data[trial:trial + 1])
        # sigma >= t-1 makes every truncated window the whole trial
        eps, counts, n_cand = _windowed_stats(block, spec, est.k, t - 1, engine)
        if (eps == 0.0).any():
            raise DuplicatePointsError(
                f"zero k-th neighbor distance within trial {trial} "
                "(duplicate points); set EstimatorParams.jitter to break ties"
            )
        values[trial] = _assemble(counts, n_cand, spec, est.k)
        n_candidates = n_cand
    return values, n_candidates


def average_estimate(embedded: EmbeddedEnsemble, spec: CombinationSpec,
                     params: TemporalParams = TemporalParams(),
                     engine: str = "fast") -> EstimateSeries:
    """Trial-by-trial pointwise estimates averaged across trials.

    The per-trial series have huge variance (one realization per instant)
    and their neighbor statistics mix all epochs of the record, so this
    estimator is kept as the baseline the windowed cross-trial estimator
    is measured against.
    """
    _check_inputs(embedded, spec, params, engine)
    data = _maybe_jitter(embedded.data, params.estimator)
    values, n_candidates = _per_trial_values(data, spec, params, engine)
    return EstimateSeries(
        embedded.times,
        moving_average(values.mean(axis=0), params.smoothing),
        n_candidates,
    )


def naive_pointwise(embedded: EmbeddedEnsemble, spec: CombinationSpec,
                    params: TemporalParams = TemporalParams(),
                    engine: str = "fast") -> EstimateSeries:
    """Single-trial pointwise estimator; requires exactly one trial."""
    if embedded.n_trials != 1:
        raise ConfigError(
            f"naive_pointwise takes a single trial, got {embedded.n_trials}"
        )
    return average_estimate(embedded, spec, params, engine)
