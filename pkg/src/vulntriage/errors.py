"""Exception types raised by vulntriage.

Everything domain-level derives from VulnTriageError so callers (notably the
CLI) can distinguish expected failures from bugs. Plain file-system problems
are raised as OSError.
"""


class VulnTriageError(Exception):
    """Base class for all vulntriage domain errors."""


class NetworkError(VulnTriageError):
    """A remote feed source could not be reached."""


class DecompressError(VulnTriageError):
    """A gzip feed payload is corrupt."""


class JsonError(VulnTriageError):
    """A feed file is not valid JSON."""


class SchemaError(VulnTriageError):
    """A feed file parses as JSON but is not an NVD 1.1 feed."""


class UnknownSeverityError(VulnTriageError):
    """A severity label outside {LOW, MEDIUM, HIGH, CRITICAL}."""


class EmptyTextError(VulnTriageError):
    """Text input was empty or whitespace-only."""


class AssetError(VulnTriageError):
    """Encoder or tokenizer assets could not be loaded."""


class DimensionError(VulnTriageError):
    """Configured hidden size does not match the loaded encoder."""


class ShapeError(VulnTriageError):
    """A batch violated the forward-pass shape contract."""


class LengthMismatchError(VulnTriageError):
    """Parallel lists passed to a metric or loss differ in length."""


class DegenerateSplitError(VulnTriageError):
    """A stratified split would leave a non-singleton class empty on one side."""


class DegenerateCurveError(VulnTriageError):
    """A ranking curve was requested for labels with no positives or no negatives."""


class DataError(VulnTriageError):
    """A training dataset partition is unusable (e.g. empty)."""


class NumericError(VulnTriageError):
    """Training produced a non-finite loss."""


class VersionError(VulnTriageError):
    """A saved model manifest has an unsupported schema version."""


class BindError(VulnTriageError):
    """The service could not bind its host:port."""
