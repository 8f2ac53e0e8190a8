"""Event-factuality toolkit.

Harmonizes seven English factuality corpora into a unified representation,
predicts "expected inference" labels from surface lexical patterns (verb
signatures or feature-matched training means), and provides the statistical
machinery (ordered logit, mixed-effects regression, MAE/Pearson) to analyze
externally produced model predictions against those expectations.
"""

from .analysis import (
    CategoryReport,
    DispersionReport,
    ErrorCategory,
    EvaluationReport,
    ExpectedInferenceStudy,
    PredictionSet,
    RankedError,
    ScatterTable,
    error_category_report,
    evaluate,
    expected_inference_study,
    group_dispersion,
    mean_predictions,
    rank_errors,
    read_error_annotations,
    read_predictions,
    scatter_export,
)
from .core import (
    Category,
    Dataset,
    Environment,
    EventRecord,
    FactualityError,
    FormatError,
    Polarity,
    Split,
    category_to_score,
    read_records,
    score_to_category,
    write_records,
)
from .harmonize import (
    FilterReport,
    SplitSpec,
    load_cb,
    load_megaveridicality,
    load_rp,
    load_unified,
    read_conllu,
    resolve_event_span,
    stratified_split,
)
from .oracle import (
    ExpectedInference,
    ExpectedInferenceOracle,
    build_feature_index,
    expected_inference,
    ingest_rule_predictions,
)
from .signatures import (
    EnvironmentPolicy,
    Signature,
    SignaturePredictor,
    load_lexicon,
    predict_item,
    project,
)
from .stats import MixedLinearModel, OrderedLogit, mae, pearson

__version__ = "0.1.0"

__all__ = [
    "Category",
    "CategoryReport",
    "Dataset",
    "DispersionReport",
    "Environment",
    "EnvironmentPolicy",
    "ErrorCategory",
    "EvaluationReport",
    "EventRecord",
    "ExpectedInference",
    "ExpectedInferenceOracle",
    "ExpectedInferenceStudy",
    "FactualityError",
    "FilterReport",
    "FormatError",
    "MixedLinearModel",
    "OrderedLogit",
    "Polarity",
    "PredictionSet",
    "RankedError",
    "ScatterTable",
    "Signature",
    "SignaturePredictor",
    "Split",
    "SplitSpec",
    "build_feature_index",
    "category_to_score",
    "error_category_report",
    "evaluate",
    "expected_inference",
    "expected_inference_study",
    "group_dispersion",
    "ingest_rule_predictions",
    "load_cb",
    "load_lexicon",
    "load_megaveridicality",
    "load_rp",
    "load_unified",
    "mae",
    "mean_predictions",
    "pearson",
    "predict_item",
    "project",
    "rank_errors",
    "read_conllu",
    "read_error_annotations",
    "read_predictions",
    "read_records",
    "resolve_event_span",
    "scatter_export",
    "score_to_category",
    "stratified_split",
    "write_records",
]
