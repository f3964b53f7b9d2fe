"""Delay embedding, integer lag alignment, and the MI-maximizing lag scan."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .ensemble import ChannelRef, TrialEnsemble
from .errors import ConfigError, SeriesTooShortError

# canonical block labels used by the measure factories and the shuffler
ROLE_FUTURE = "future"
ROLE_TARGET = "target"
ROLE_CONDITIONER = "conditioner"
ROLE_SOURCE = "source"


@dataclass(frozen=True)
class EmbeddingSpec:
    """One coordinate block of the joint state vector.

    The block at time n holds (x(n+horizon), x(n+horizon-delay), ...,
    x(n+horizon-(dim-1)*delay)): newest coordinate first. horizon=0 is a
    past block, horizon=1 the one-step-ahead future sample.
    """

    channel: ChannelRef
    dim: int = 1
    delay: int = 1
    horizon: int = 0
    role: str = ""

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ConfigError(f"embedding dim must be >= 1, got {self.dim}")
        if self.delay < 1:
            raise ConfigError(f"embedding delay must be >= 1, got {self.delay}")
        if self.horizon < 0:
            raise ConfigError(f"embedding horizon must be >= 0, got {self.horizon}")


@dataclass(frozen=True)
class Block:
    """Column range [start, stop) that one EmbeddingSpec produced."""

    spec: EmbeddingSpec
    start: int
    stop: int

    @property
    def role(self) -> str:
        return self.spec.role

    @property
    def columns(self) -> np.ndarray:
        return np.arange(self.start, self.stop)


@dataclass(frozen=True, eq=False)
class EmbeddedEnsemble:
    """Joint state vectors per (trial, time), with the block map kept."""

    data: np.ndarray  # (n_trials, n_times, width) float64
    time_start: int
    blocks: tuple[Block, ...]

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "time_start", int(self.time_start))

    @property
    def n_trials(self) -> int:
        return self.data.shape[0]

    @property
    def n_times(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def times(self) -> np.ndarray:
        return self.time_start + np.arange(self.n_times)

    def columns_for_role(self, role: str) -> np.ndarray:
        cols = [b.columns for b in self.blocks if b.role == role]
        if not cols:
            have = sorted({b.role for b in self.blocks})
            raise ConfigError(f"no block with role {role!r}; blocks have roles {have}")
        return np.concatenate(cols)

    def pooled(self) -> np.ndarray:
        """All (trial, time) vectors stacked trial-major, shape (r'*T, width)."""
        return self.data.reshape(-1, self.width)


def delay_embed(ensemble: TrialEnsemble,
                specs: Sequence[EmbeddingSpec]) -> EmbeddedEnsemble:
    """Build the joint embedded ensemble for an ordered list of blocks.

    The valid time range is the intersection over blocks: n needs
    n + horizon - (dim-1)*delay >= 0 and n + horizon <= N-1. Boundary
    samples are dropped, never padded.
    """
    if not specs:
        raise ConfigError("need at least one embedding spec")
    n = ensemble.n_times
    lo = 0
    hi = n - 1
    for s in specs:
        ensemble.channel_index(s.channel)  # raises on unknown channel
        lo = max(lo, (s.dim - 1) * s.delay - s.horizon)
        hi = min(hi, n - 1 - s.horizon)
    if hi < lo:
        raise SeriesTooShortError(
            f"series of length {n} too short for requested embedding"
        )
    t = hi - lo + 1
    width = sum(s.dim for s in specs)
    data = np.empty((ensemble.n_trials, t, width))
    blocks = []
    col = 0
    for s in specs:
        ch = ensemble.channel_index(s.channel)
        for j in range(s.dim):
            shift = lo + s.horizon - j * s.delay
            data[:, :, col + j] = ensemble.samples[:, shift:shift + t, ch]
        blocks.append(Block(s, col, col + s.dim))
        col += s.dim
    return EmbeddedEnsemble(data, ensemble.time_start + lo, tuple(blocks))


def apply_lags(ensemble: TrialEnsemble,
               lags: Mapping[ChannelRef, int]) -> TrialEnsemble:
    """Delay each listed channel by its lag and truncate to the overlap.

    After the call, sample n of a lagged channel holds the original value
    at n - lag, and every channel covers the same absolute time range
    [time_start + max_lag, ...]. Channels not listed get lag 0.
    """
    n = ensemble.n_times
    by_index: dict[int, int] = {}
    for ref, lag in lags.items():
        idx = ensemble.channel_index(ref)
        lag = int(lag)
        if not 0 <= lag < n:
            raise SeriesTooShortError(
                f"lag {lag} out of range for series of length {n}"
            )
        if by_index.setdefault(idx, lag) != lag:
            raise ConfigError(f"conflicting lags for channel {ref!r}")
    max_lag = max(by_index.values(), default=0)
    kept = n - max_lag
    out = np.empty((ensemble.n_trials, kept, ensemble.n_channels))
    for c in range(ensemble.n_channels):
        shift = max_lag - by_index.get(c, 0)
        out[:, :, c] = ensemble.samples[:, shift:shift + kept, c]
    return TrialEnsemble(out, ensemble.channel_names,
                         ensemble.time_start + max_lag)


def apply_lag(ensemble: TrialEnsemble, channel: ChannelRef,
              lag: int) -> TrialEnsemble:
    """Single-channel form of apply_lags."""
    return apply_lags(ensemble, {channel: lag})


def lag_mi_profile(ensemble: TrialEnsemble, source: ChannelRef,
                   destination: ChannelRef, max_lag: int,
                   params=None, horizon: int = 0) -> np.ndarray:
    """Static pooled MI between lagged source and destination, per lag.

    Returns the MI value for each lag in [0, max_lag]. Trials and times
    are pooled, so this is the stationary estimate used for alignment.
    horizon > 0 pairs the lagged source with the destination's sample
    that many steps ahead, matching the prediction target of directed
    measures (whose future block sits at n + horizon).
    """
    from .combinations import mutual_information_spec
    from .estimators import EstimatorParams, static_combination

    if params is None:
        params = EstimatorParams()
    max_lag = int(max_lag)
    if max_lag < 0:
        raise ConfigError(f"max_lag must be >= 0, got {max_lag}")
    if horizon < 0:
        raise ConfigError(f"horizon must be >= 0, got {horizon}")
    if not max_lag < ensemble.n_times / 2:
        raise ConfigError(
            f"max_lag {max_lag} must be < half the series length "
            f"({ensemble.n_times / 2:g})"
        )
    src = ensemble.channel_index(source)
    dst = ensemble.channel_index(destination)
    if src == dst:
        raise ConfigError("source and destination must be distinct channels")
    spec = mutual_information_spec(1, 1)
    out = np.empty(max_lag + 1)
    for lag in range(max_lag + 1):
        lagged = apply_lags(ensemble, {src: lag})
        embedded = delay_embed(lagged, (
            EmbeddingSpec(src, role=ROLE_SOURCE),
            EmbeddingSpec(dst, horizon=horizon, role=ROLE_TARGET),
        ))
        out[lag] = static_combination(embedded, spec, params)
    return out


def find_optimal_lag(ensemble: TrialEnsemble, source: ChannelRef,
                     destination: ChannelRef, max_lag: int,
                     params=None, horizon: int = 0) -> int:
    """Lag in [0, max_lag] maximizing pooled MI; ties go to the smaller lag."""
    profile = lag_mi_profile(ensemble, source, destination, max_lag, params,
                             horizon)
    return int(np.argmax(profile))
