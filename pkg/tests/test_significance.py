"""Trial-shuffle surrogates: the shuffler, thresholds, and p-values."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from entcomb import (
    ROLE_CONDITIONER,
    ROLE_SOURCE,
    ROLE_TARGET,
    ConfigError,
    EstimatorParams,
    MeasureKind,
    SurrogateConfig,
    TemporalParams,
    TrialEnsemble,
    build_measure,
    delay_embed,
    ensemble_estimate,
    permutation_test,
    shuffle_trials,
)

SMALL = TemporalParams(half_width=6, smoothing=4, estimator=EstimatorParams(k=3))


def pair_measure(n_trials=10, n_times=40, seed=0, couple=0.0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n_trials, n_times))
    noise = 0.3 if couple else 1.0
    y = couple * x + noise * rng.standard_normal((n_trials, n_times))
    ens = TrialEnsemble(np.stack([x, y], axis=2), ("x", "y"))
    spec, plan = build_measure(MeasureKind("mi", target="x", source="y"), ens)
    return delay_embed(ens, plan), spec


def conditioned_measure(n_trials=6, n_times=30, seed=1):
    rng = np.random.default_rng(seed)
    ens = TrialEnsemble(rng.standard_normal((n_trials, n_times, 3)), ("x", "y", "z"))
    spec, plan = build_measure(
        MeasureKind("pte", target="x", source="y", conditioner="z"), ens
    )
    return delay_embed(ens, plan), spec


class TestSurrogateConfig:
    @pytest.mark.parametrize("s,alpha,rank", [
        (100, 0.05, 95),
        (20, 0.05, 19),
        (100, 0.01, 99),
        (1000, 0.05, 950),
    ])
    def test_threshold_rank(self, s, alpha, rank):
        assert SurrogateConfig(n_surrogates=s, alpha=alpha).threshold_rank == rank

    def test_surrogate_count_bound(self):
        with pytest.raises(ConfigError):
            SurrogateConfig(n_surrogates=0)

    def test_alpha_bounds(self):
        with pytest.raises(ConfigError):
            SurrogateConfig(alpha=0.0)
        with pytest.raises(ConfigError):
            SurrogateConfig(alpha=1.0)

    def test_unresolvable_rank_rejected(self):
        with pytest.raises(ConfigError):
            SurrogateConfig(n_surrogates=10, alpha=0.05)


class TestShuffleTrials:
    def test_identity_permutation_changes_nothing(self):
        embedded, _ = pair_measure()
        out = shuffle_trials(embedded, ROLE_SOURCE, np.arange(10))
        assert np.array_equal(out.data, embedded.data)

    def test_two_trial_swap_moves_only_the_role(self):
        embedded, _ = pair_measure(n_trials=2)
        src = embedded.columns_for_role(ROLE_SOURCE)
        tgt = embedded.columns_for_role(ROLE_TARGET)
        out = shuffle_trials(embedded, ROLE_SOURCE, np.array([1, 0]))
        assert np.array_equal(out.data[0][:, src], embedded.data[1][:, src])
        assert np.array_equal(out.data[1][:, src], embedded.data[0][:, src])
        assert np.array_equal(out.data[:, :, tgt], embedded.data[:, :, tgt])

    def test_per_instant_marginals_are_preserved_exactly(self):
        embedded, _ = pair_measure(n_trials=7)
        perm = np.random.default_rng(3).permutation(7)
        out = shuffle_trials(embedded, ROLE_SOURCE, perm)
        # across trials, each (time, column) cell set is only relabeled
        assert np.array_equal(
            np.sort(out.data, axis=0), np.sort(embedded.data, axis=0)
        )

    def test_conditioner_role_shuffles(self):
        embedded, _ = conditioned_measure()
        cond = embedded.columns_for_role(ROLE_CONDITIONER)
        perm = np.array([1, 2, 3, 4, 5, 0])
        out = shuffle_trials(embedded, ROLE_CONDITIONER, perm)
        assert np.array_equal(out.data[:, :, cond], embedded.data[perm][:, :, cond])

    def test_original_is_untouched(self):
        embedded, _ = pair_measure(n_trials=4)
        before = embedded.data.copy()
        shuffle_trials(embedded, ROLE_SOURCE, np.array([3, 2, 1, 0]))
        assert np.array_equal(embedded.data, before)

    def test_bookkeeping_carried_over(self):
        embedded, _ = pair_measure(n_trials=4)
        out = shuffle_trials(embedded, ROLE_SOURCE, np.array([3, 2, 1, 0]))
        assert out.time_start == embedded.time_start
        assert out.blocks == embedded.blocks

    def test_non_permutations_rejected(self):
        embedded, _ = pair_measure(n_trials=3)
        for bad in ([0, 0, 1], [0, 1], [0, 1, 3]):
            with pytest.raises(ConfigError):
                shuffle_trials(embedded, ROLE_SOURCE, np.array(bad))

    def test_unknown_role_rejected(self):
        embedded, _ = pair_measure(n_trials=3)
        with pytest.raises(ConfigError):
            shuffle_trials(embedded, ROLE_CONDITIONER, np.arange(3))


class TestPermutationTest:
    def test_matches_manual_surrogate_loop(self):
        embedded, spec = pair_measure(n_trials=8, couple=1.0)
        config = SurrogateConfig(n_surrogates=12, alpha=0.25, seed=5)
        result = permutation_test(embedded, spec, SMALL, config)

        observed = ensemble_estimate(embedded, spec, SMALL)
        seeds = np.random.SeedSequence(5).spawn(12)
        surr = np.empty((12, len(observed)))
        for i in range(12):
            perm = np.random.default_rng(seeds[i]).permutation(8)
            shuffled = shuffle_trials(embedded, ROLE_SOURCE, perm)
            surr[i] = ensemble_estimate(shuffled, spec, SMALL).values
        rank = config.threshold_rank
        assert np.array_equal(result.values, observed.values)
        assert np.array_equal(result.threshold, np.sort(surr, axis=0)[rank - 1])
        expected_p = (1.0 + (surr >= observed.values).sum(axis=0)) / 13.0
        assert_allclose(result.p_value, expected_p, atol=0)

    def test_deterministic(self):
        embedded, spec = pair_measure(n_trials=6)
        config = SurrogateConfig(n_surrogates=8, alpha=0.25, seed=2)
        a = permutation_test(embedded, spec, SMALL, config)
        b = permutation_test(embedded, spec, SMALL, config)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.threshold, b.threshold)
        assert np.array_equal(a.p_value, b.p_value)

    def test_p_value_range(self):
        embedded, spec = pair_measure(n_trials=6)
        config = SurrogateConfig(n_surrogates=20, alpha=0.05, seed=0)
        result = permutation_test(embedded, spec, SMALL, config)
        assert np.all(result.p_value >= 1.0 / 21.0)
        assert np.all(result.p_value <= 1.0)

    def test_strong_coupling_detected(self):
        embedded, spec = pair_measure(n_trials=12, n_times=50, couple=1.0)
        config = SurrogateConfig(n_surrogates=20, alpha=0.05, seed=0)
        result = permutation_test(embedded, spec, SMALL, config)
        assert (result.values > result.threshold).mean() > 0.8
        assert (result.p_value < 0.05).mean() > 0.8

    def test_independent_channels_mostly_insignificant(self):
        embedded, spec = pair_measure(n_trials=10, n_times=50, seed=11)
        config = SurrogateConfig(n_surrogates=20, alpha=0.05, seed=1)
        result = permutation_test(embedded, spec, SMALL, config)
        assert result.p_value.mean() > 0.2

    def test_average_method_runs(self):
        embedded, spec = pair_measure(n_trials=5, n_times=30)
        config = SurrogateConfig(n_surrogates=5, alpha=0.25, seed=0)
        result = permutation_test(embedded, spec, SMALL, config, method="average")
        assert np.isfinite(result.values).all()
        assert result.threshold.shape == result.values.shape

    def test_unknown_method_rejected(self):
        embedded, spec = pair_measure(n_trials=4)
        with pytest.raises(ConfigError):
            permutation_test(embedded, spec, SMALL,
                             SurrogateConfig(n_surrogates=5, alpha=0.25),
                             method="naive")

    def test_alternate_shuffle_role(self):
        embedded, spec = pair_measure(n_trials=6)
        config = SurrogateConfig(n_surrogates=5, alpha=0.25, seed=0,
                                 shuffle_role=ROLE_TARGET)
        result = permutation_test(embedded, spec, SMALL, config)
        assert result.p_value is not None
