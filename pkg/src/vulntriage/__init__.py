"""Vulnerability triage: severity and type classification of CVE descriptions."""

from .classifier import VulnerabilityReportClassifier
from .dataset import (
    LabeledExample,
    SplitDataset,
    TokenizedInput,
    build_examples,
    stratified_split,
    tokenize,
)
from .errors import (
    AssetError,
    BindError,
    DataError,
    DecompressError,
    DegenerateCurveError,
    DegenerateSplitError,
    DimensionError,
    EmptyTextError,
    JsonError,
    LengthMismatchError,
    NetworkError,
    NumericError,
    SchemaError,
    ShapeError,
    UnknownSeverityError,
    VersionError,
    VulnTriageError,
)
from .evaluation import (
    SeverityReport,
    TypeReport,
    WordFrequencyTable,
    evaluate_model,
    misclassified_word_frequencies,
    pr_points,
    render_artifacts,
    roc_points,
    severity_metrics,
    type_metrics,
)
from .ingest import CveRecord, FeedSource, IngestStats, fetch_feed, parse_feed
from .model import (
    DualHeadModel,
    DualLogits,
    LossBreakdown,
    ModelConfig,
    Prediction,
    build_model,
    combined_loss,
    decode,
    forward,
    load_model,
    save_model,
)
from .taxonomy import (
    NUM_SEVERITIES,
    NUM_TYPES,
    SEVERITY_NAMES,
    TypeTaxonomy,
    TypeVector,
    default_taxonomy,
    map_cwes_to_types,
    map_severity,
)
from .training import EpochLog, TrainConfig, export_learning_curve, train

__version__ = "0.1.0"

__all__ = [
    "AssetError",
    "BindError",
    "CveRecord",
    "DataError",
    "DecompressError",
    "DegenerateCurveError",
    "DegenerateSplitError",
    "DimensionError",
    "DualHeadModel",
    "DualLogits",
    "EmptyTextError",
    "EpochLog",
    "FeedSource",
    "IngestStats",
    "JsonError",
    "LabeledExample",
    "LengthMismatchError",
    "LossBreakdown",
    "ModelConfig",
    "NetworkError",
    "NumericError",
    "NUM_SEVERITIES",
    "NUM_TYPES",
    "Prediction",
    "SchemaError",
    "SEVERITY_NAMES",
    "SeverityReport",
    "ShapeError",
    "SplitDataset",
    "TokenizedInput",
    "TrainConfig",
    "TypeReport",
    "TypeTaxonomy",
    "TypeVector",
    "UnknownSeverityError",
    "VersionError",
    "VulnTriageError",
    "VulnerabilityReportClassifier",
    "WordFrequencyTable",
    "build_examples",
    "build_model",
    "combined_loss",
    "decode",
    "default_taxonomy",
    "evaluate_model",
    "export_learning_curve",
    "fetch_feed",
    "forward",
    "load_model",
    "map_cwes_to_types",
    "map_severity",
    "misclassified_word_frequencies",
    "parse_feed",
    "pr_points",
    "render_artifacts",
    "roc_points",
    "save_model",
    "severity_metrics",
    "stratified_split",
    "tokenize",
    "train",
    "type_metrics",
    "__version__",
]
