"""Audit individual fairness across equally-performing model runs.

Models with identical aggregate performance can still disagree about
individuals.  This package ingests the crisp predictions of many runs,
groups them into performance bands, finds the instances whose outcome is
disputed within a band, quantifies the disagreement exactly, and builds the
fair ensemble that resolves every dispute in the individual's favour.
"""

from .banding import Banding, BandingPolicy, PerformanceBand, band_counts, partition, refine_lexicographic
from .core import (
    ConfusionMatrix,
    ExactRatio,
    InstanceIndex,
    LabelVector,
    ModelRun,
    PredictionVector,
    confusion_matrix,
    metric,
    verify_utility,
)
from .errors import (
    AlignmentError,
    AnalysisError,
    InvariantViolation,
    MultimaxError,
    UndefinedMetricError,
    ValidationError,
)
from .fairness import (
    DiscrepancyStats,
    DisputableSet,
    FairEnsembleReport,
    FairnessVerdict,
    ambiguity,
    ambiguity_by_group,
    discrepancy,
    disputable_instances,
    ensemble_predictions,
    fair_ensemble,
    is_individually_fair,
    unique_vector_counts,
)
from .ingest import AuditManifest, load_manifest, load_predictions, read_labels
from .profiles import (
    FoldPanelData,
    ProfileStyle,
    RenderedSvg,
    fairness_profile,
    multiplicity_panel,
    stability_profile,
)
from .report import AuditOutcome, audit, compare_policies, emit_json, run_audit

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "AnalysisError",
    "AuditManifest",
    "AuditOutcome",
    "Banding",
    "BandingPolicy",
    "ConfusionMatrix",
    "DiscrepancyStats",
    "DisputableSet",
    "ExactRatio",
    "FairEnsembleReport",
    "FairnessVerdict",
    "FoldPanelData",
    "InstanceIndex",
    "InvariantViolation",
    "LabelVector",
    "ModelRun",
    "MultimaxError",
    "PerformanceBand",
    "PredictionVector",
    "ProfileStyle",
    "RenderedSvg",
    "UndefinedMetricError",
    "ValidationError",
    "ambiguity",
    "ambiguity_by_group",
    "audit",
    "band_counts",
    "compare_policies",
    "confusion_matrix",
    "discrepancy",
    "disputable_instances",
    "emit_json",
    "ensemble_predictions",
    "fair_ensemble",
    "fairness_profile",
    "is_individually_fair",
    "load_manifest",
    "load_predictions",
    "metric",
    "multiplicity_panel",
    "partition",
    "read_labels",
    "refine_lexicographic",
    "run_audit",
    "stability_profile",
    "unique_vector_counts",
    "verify_utility",
]
