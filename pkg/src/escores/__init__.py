"""E-value incorrectness scores for generated responses.

Scores each candidate response with a nonnegative value calibrated on
held-out prompts so that filtering at any post-hoc tolerance keeps the
expected retained-set error in check; includes rank (p-score) and naive
baselines, filtering strategies, split-based evaluation, synthetic data
generation, and JSONL/CSV/SVG plumbing.
"""

from __future__ import annotations

from .core import (
    CalibrationSummary,
    ConfigurationError,
    EScoresError,
    InvalidInputError,
    InvalidSplitError,
    LabeledResponseSet,
    Prompt,
    Response,
    ResponseSetSizeError,
    ScoredResponseSet,
    SubResponse,
    ext_add,
    ext_div,
    ext_recip,
    ext_sum,
)
from .estimation import (
    EstimateLevel,
    EstimateSource,
    FTransform,
    PromptInstance,
    aggregate_conditionals,
    build_calibration_summary,
    calibration_f_star,
    transform_estimate,
)
from .evaluation import (
    EquivalenceTrials,
    EvaluationReport,
    InstanceResult,
    Parameter,
    PreparedDataset,
    ReportRow,
    SplitAssignment,
    SplitPlan,
    SplitResult,
    Strategy,
    StrategyGrid,
    WorstCaseRow,
    aggregate_splits,
    evaluate_dataset,
    evaluate_split,
    instance_metrics,
    plan_splits,
    run_equivalence_trials,
    threshold_equivalence_check,
    worst_case_distortion,
)
from .filtering import (
    FilterOutcome,
    filter_at_alpha,
    fractional_inclusion_alpha,
    max_constrained_alpha,
)
from .io import (
    CSV_HEADER,
    DatasetParseError,
    DatasetValidationError,
    RunConfig,
    emit_csv,
    emit_svg_curves,
    parse_dataset,
    parse_grid,
    write_dataset,
)
from .response_sets import (
    IDENTITY_POLICY,
    MAX_UNCAPPED_PERMUTATION_STEPS,
    GeneratedResponse,
    PermutationMode,
    PermutationPolicy,
    build_permutation_set,
    build_prefix_set,
    label_response_set,
)
from .scoring import (
    ALL_SCORE_KINDS,
    RandomDraw,
    ScoreFamily,
    ScoreKind,
    combined_e_score,
    e_score,
    naive_score,
    p_score,
    p_score_randomized,
    score_response_set,
    uniform_block,
    uniform_draw,
)
from .synthetic import (
    MCEstimate,
    SyntheticConfig,
    evariable_statistic,
    generate_dataset,
    mc_evariable_check,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_SCORE_KINDS",
    "CSV_HEADER",
    "CalibrationSummary",
    "ConfigurationError",
    "DatasetParseError",
    "DatasetValidationError",
    "EScoresError",
    "EquivalenceTrials",
    "EstimateLevel",
    "EstimateSource",
    "EvaluationReport",
    "FTransform",
    "FilterOutcome",
    "GeneratedResponse",
    "IDENTITY_POLICY",
    "InstanceResult",
    "InvalidInputError",
    "InvalidSplitError",
    "LabeledResponseSet",
    "MAX_UNCAPPED_PERMUTATION_STEPS",
    "MCEstimate",
    "Parameter",
    "PermutationMode",
    "PermutationPolicy",
    "PreparedDataset",
    "Prompt",
    "PromptInstance",
    "RandomDraw",
    "ReportRow",
    "Response",
    "ResponseSetSizeError",
    "RunConfig",
    "ScoreFamily",
    "ScoreKind",
    "ScoredResponseSet",
    "SplitAssignment",
    "SplitPlan",
    "SplitResult",
    "Strategy",
    "StrategyGrid",
    "SubResponse",
    "SyntheticConfig",
    "WorstCaseRow",
    "aggregate_conditionals",
    "aggregate_splits",
    "build_calibration_summary",
    "build_permutation_set",
    "build_prefix_set",
    "calibration_f_star",
    "combined_e_score",
    "e_score",
    "emit_csv",
    "emit_svg_curves",
    "evaluate_dataset",
    "evaluate_split",
    "evariable_statistic",
    "ext_add",
    "ext_div",
    "ext_recip",
    "ext_sum",
    "filter_at_alpha",
    "fractional_inclusion_alpha",
    "generate_dataset",
    "instance_metrics",
    "label_response_set",
    "max_constrained_alpha",
    "mc_evariable_check",
    "naive_score",
    "p_score",
    "p_score_randomized",
    "parse_dataset",
    "parse_grid",
    "plan_splits",
    "run_equivalence_trials",
    "score_response_set",
    "threshold_equivalence_check",
    "transform_estimate",
    "uniform_block",
    "uniform_draw",
    "worst_case_distortion",
    "write_dataset",
]
