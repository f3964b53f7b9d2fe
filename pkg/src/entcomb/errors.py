"""Exception taxonomy shared across the package."""


class EntcombError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(EntcombError):
    """A data file is malformed: bad magic, truncated header, bad row."""


class RaggedTrialsError(FormatError):
    """Trials in a file do not share an identical time grid."""


class NonFiniteSampleError(EntcombError):
    """Input data contains NaN or infinity."""


class ChannelLookupError(EntcombError):
    """A channel name or index does not resolve against the ensemble."""


class SeriesTooShortError(EntcombError):
    """The series cannot support the requested embedding or lag."""


class ConfigError(EntcombError):
    """Invalid parameter value or parameter combination."""


class InsufficientPointsError(EntcombError):
    """Too few candidate points for the requested neighbor statistic."""


class DuplicatePointsError(EntcombError):
    """A zero k-th neighbor distance was encountered.

    Exact duplicates make the log/psi terms of the estimator undefined.
    The standard workaround is a tiny uniform jitter; see
    EstimatorParams.jitter and auto_jitter_amplitude.
    """
