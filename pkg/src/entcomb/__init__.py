"""Time-resolved entropy-combination estimation on trial ensembles."""

__version__ = "0.1.0"

from .errors import (
    EntcombError,
    FormatError,
    RaggedTrialsError,
    NonFiniteSampleError,
    ChannelLookupError,
    SeriesTooShortError,
    ConfigError,
    InsufficientPointsError,
    DuplicatePointsError,
)
from .ensemble import (
    TrialEnsemble,
    load_binary,
    store_binary,
    load_csv,
    store_csv,
    default_channel_names,
)
from .embedding import (
    EmbeddingSpec,
    EmbeddedEnsemble,
    delay_embed,
    apply_lag,
    apply_lags,
    lag_mi_profile,
    find_optimal_lag,
    ROLE_FUTURE,
    ROLE_TARGET,
    ROLE_CONDITIONER,
    ROLE_SOURCE,
)
from .combinations import (
    CombinationSpec,
    ValidationReport,
    validate,
    spec_to_json,
    spec_from_json,
    mutual_information_spec,
    transfer_entropy_spec,
    partial_mi_spec,
    partial_te_spec,
    MeasureKind,
    build_measure,
    MEASURE_KINDS,
)
from .knn import (
    PointSet,
    SearchWindow,
    build_window_index,
    oracle_kth_nn_distance,
    oracle_count_within_strict,
)
from .estimators import (
    EstimatorParams,
    digamma_int,
    kl_entropy,
    static_combination,
    combination_from_counts,
    auto_jitter_amplitude,
)
from .timeresolved import (
    TemporalParams,
    EstimateSeries,
    moving_average,
    ensemble_estimate,
    average_estimate,
    naive_pointwise,
)
from .significance import (
    SurrogateConfig,
    shuffle_trials,
    permutation_test,
)
from .synthgen import (
    CoupledARConfig,
    generate_coupled_ar,
    coupling_profiles,
)

__all__ = [
    "__version__",
    # errors
    "EntcombError", "FormatError", "RaggedTrialsError", "NonFiniteSampleError",
    "ChannelLookupError", "SeriesTooShortError", "ConfigError",
    "InsufficientPointsError", "DuplicatePointsError",
    # ensembles
    "TrialEnsemble", "load_binary", "store_binary", "load_csv", "store_csv",
    "default_channel_names",
    # embedding
    "EmbeddingSpec", "EmbeddedEnsemble", "delay_embed", "apply_lag",
    "apply_lags", "lag_mi_profile", "find_optimal_lag",
    "ROLE_FUTURE", "ROLE_TARGET", "ROLE_CONDITIONER", "ROLE_SOURCE",
    # combinations
    "CombinationSpec", "ValidationReport", "validate", "spec_to_json",
    "spec_from_json", "mutual_information_spec", "transfer_entropy_spec",
    "partial_mi_spec", "partial_te_spec", "MeasureKind", "build_measure",
    "MEASURE_KINDS",
    # neighbor searches
    "PointSet", "SearchWindow", "build_window_index",
    "oracle_kth_nn_distance", "oracle_count_within_strict",
    # estimators
    "EstimatorParams", "digamma_int", "kl_entropy", "static_combination",
    "combination_from_counts", "auto_jitter_amplitude",
    # time-resolved
    "TemporalParams", "EstimateSeries", "moving_average",
    "ensemble_estimate", "average_estimate", "naive_pointwise",
    # significance
    "SurrogateConfig", "shuffle_trials", "permutation_test",
    # synthetic benchmark
    "CoupledARConfig", "generate_coupled_ar", "coupling_profiles",
]
