"""Trial-shuffle permutation testing.

Surrogates destroy the cross-trial alignment between the shuffled role's
coordinate blocks and everything else, while leaving every marginal
distribution untouched: trial labels of the chosen blocks are permuted,
nothing is resampled. The observed series is compared per instant against
the surrogate distribution; the threshold is the order statistic at rank
ceil((1-alpha)*S) and p-values use the add-one rule so p >= 1/(S+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .combinations import CombinationSpec
from .embedding import ROLE_SOURCE, EmbeddedEnsemble
from .errors import ConfigError
from .timeresolved import (
    EstimateSeries,
    TemporalParams,
    average_estimate,
    ensemble_estimate,
)

_METHODS = {
    "ensemble": ensemble_estimate,
    "average": average_estimate,
}


@dataclass(frozen=True)
class SurrogateConfig:
    n_surrogates: int = 100
    alpha: float = 0.05
    seed: int = 0
    shuffle_role: str = ROLE_SOURCE

    def __post_init__(self) -> None:
        if self.n_surrogates < 1:
            raise ConfigError(
                f"surrogate count must be >= 1, got {self.n_surrogates}"
            )
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.n_surrogates * self.alpha < 1.0:
            raise ConfigError(
                f"S*alpha = {self.n_surrogates * self.alpha:g} < 1: "
                "threshold rank not resolvable; raise S or alpha"
            )

    @property
    def threshold_rank(self) -> int:
        """1-based order-statistic rank ceil((1-alpha)*S), computed in ints."""
        s = self.n_surrogates
        return s - int(math.floor(self.alpha * s + 1e-9))


def shuffle_trials(embedded: EmbeddedEnsemble, role: str,
                   permutation: np.ndarray) -> EmbeddedEnsemble:
    """Reassign the role's coordinate blocks across trials.

    Trial r of the result carries trial permutation[r]'s values in the
    shuffled columns and trial r's own values everywhere else.
    """
    perm = np.asarray(permutation, dtype=np.int64)
    r = embedded.n_trials
    if perm.shape != (r,) or not np.array_equal(np.sort(perm), np.arange(r)):
        raise ConfigError(f"not a permutation of range({r}): {perm}")
    cols = embedded.columns_for_role(role)
    data = embedded.data.copy()
    data[:, :, cols] = embedded.data[perm][:, :, cols]
    return EmbeddedEnsemble(data, embedded.time_start, embedded.blocks)


def permutation_test(embedded: EmbeddedEnsemble, spec: CombinationSpec,
                     params: TemporalParams = TemporalParams(),
                     config: SurrogateConfig = SurrogateConfig(),
                     method: str = "ensemble") -> EstimateSeries:
    """Observed estimate decorated with per-instant threshold and p-value."""
    if method not in _METHODS:
        raise ConfigError(
            f"method must be one of {sorted(_METHODS)}, got {method!r}"
        )
    estimate = _METHODS[method]
    observed = estimate(embedded, spec, params)
    s = config.n_surrogates
    surrogate_values = np.empty((s, len(observed)))
    seeds = np.random.SeedSequence(config.seed).spawn(s)
    for i in range(s):
        perm = np.random.default_rng(seeds[i]).permutation(embedded.n_trials)
        shuffled = shuffle_trials(embedded, config.shuffle_role, perm)
        surrogate_values[i] = estimate(shuffled, spec, params).values
    ordered = np.sort(surrogate_values, axis=0)
    threshold = ordered[config.threshold_rank - 1]
    exceed = (surrogate_values >= observed.values[None, :]).sum(axis=0)
    p_value = (1.0 + exceed) / (s + 1.0)
    return EstimateSeries(
        observed.times, observed.values, observed.n_eff, threshold, p_value
    )
