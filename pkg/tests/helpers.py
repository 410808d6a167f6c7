"""Small builders shared across test modules."""

from __future__ import annotations

from escores import (
    EstimateSource,
    GeneratedResponse,
    LabeledResponseSet,
    PromptInstance,
    Response,
    ScoredResponseSet,
)


def make_scored(scores) -> ScoredResponseSet:
    """Scored set over single-index responses 1..m, in the given order."""
    return ScoredResponseSet(
        tuple((Response((i + 1,)), float(s)) for i, s in enumerate(scores))
    )


def make_labeled(labels) -> LabeledResponseSet:
    """Labeled set over single-index responses 1..m, in the given order."""
    return LabeledResponseSet(
        tuple((Response((i + 1,)), int(lab)) for i, lab in enumerate(labels))
    )


def make_generated(prompt_id: str, k: int, first_error_index=None) -> GeneratedResponse:
    return GeneratedResponse.from_texts(
        prompt_id, [f"s{j}" for j in range(1, k + 1)], first_error_index=first_error_index
    )


def make_instance(prompt_id: str, conditionals, first_error_index=None) -> PromptInstance:
    """Prompt instance with step-level conditionals given as a sequence."""
    generated = make_generated(prompt_id, len(conditionals), first_error_index)
    source = EstimateSource(
        conditionals={j + 1: float(c) for j, c in enumerate(conditionals)}
    )
    return PromptInstance(generated, source)
