"""Incorrectness scores for responses: e-scores, p-scores, naive scores.

Low score means likely correct, high score means likely incorrect.  For
a test response with transformed value f against a calibration summary
of n per-prompt maxima summing to S, the e-score is the reciprocal of
the e-value

    (n + 1) * f / (f + S),

computed under extended-real rules so that f = +inf attains the minimal
e-score 1/(n+1), f = 0 yields +inf, and an infinite calibration sum
sends every finite-f score to +inf.  The e-score of a response whose
value ties the calibration maxima still certifies the advertised error
rate, which is what makes post-hoc tolerance selection sound.

The combined e-score averages the reciprocals of the per-transform
e-scores and inverts the mean, staying within a factor of the number of
components of the smallest one.  The p-score is the usual rank statistic
(1 + #{f <= fstar_i}) / (n + 1); its randomized variant breaks ties with
a uniform draw and recovers the plain p-score at u = 1.  Naive scores
invert the transformed estimate directly and use no calibration at all.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import (
    CalibrationSummary,
    ConfigurationError,
    InvalidInputError,
    Prompt,
    Response,
    ScoredResponseSet,
    as_unit_interval,
    ext_add,
    ext_div,
    ext_recip,
)
from .estimation import EstimateSource, FTransform, aggregate_conditionals, transform_estimate


class ScoreFamily(enum.Enum):
    E_SCORE = "e"
    E_SCORE_COMBINED = "e-combined"
    P_SCORE = "p"
    P_SCORE_RANDOMIZED = "p-randomized"
    NAIVE = "naive"


@dataclass(frozen=True)
class ScoreKind:
    """A score family plus, where the family needs one, a transform choice."""

    family: ScoreFamily
    transform: FTransform | None = None

    def __post_init__(self) -> None:
        needs = self.family in (ScoreFamily.E_SCORE, ScoreFamily.NAIVE)
        if needs and self.transform is None:
            raise InvalidInputError(f"{self.family.value} scores need a transform option")
        if not needs and self.transform is not None:
            raise InvalidInputError(f"{self.family.value} scores take no transform option")

    @property
    def name(self) -> str:
        if self.family is ScoreFamily.E_SCORE:
            assert self.transform is not None
            return f"e{self.transform.option}"
        if self.family is ScoreFamily.NAIVE:
            assert self.transform is not None
            return f"naive{self.transform.option}"
        return self.family.value

    @classmethod
    def parse(cls, name: str) -> "ScoreKind":
        text = name.strip().lower()
        aliases = {"p-rand": "p-randomized", "prand": "p-randomized", "e-comb": "e-combined"}
        text = aliases.get(text, text)
        if text in ("e1", "e2", "e3"):
            return cls(ScoreFamily.E_SCORE, FTransform.from_option(int(text[1])))
        if text in ("naive1", "naive2", "naive3"):
            return cls(ScoreFamily.NAIVE, FTransform.from_option(int(text[5])))
        for family in (ScoreFamily.E_SCORE_COMBINED, ScoreFamily.P_SCORE, ScoreFamily.P_SCORE_RANDOMIZED):
            if text == family.value:
                return cls(family)
        raise InvalidInputError(
            f"unknown score kind {name!r}; expected one of e1, e2, e3, e-combined, "
            f"p, p-randomized, naive1, naive2, naive3"
        )


#: Every scoreable kind, in report order.
ALL_SCORE_KINDS: tuple[ScoreKind, ...] = (
    ScoreKind(ScoreFamily.E_SCORE, FTransform.IDENTITY),
    ScoreKind(ScoreFamily.E_SCORE, FTransform.INVERSE_COMPLEMENT),
    ScoreKind(ScoreFamily.E_SCORE, FTransform.ODDS),
    ScoreKind(ScoreFamily.E_SCORE_COMBINED),
    ScoreKind(ScoreFamily.P_SCORE),
    ScoreKind(ScoreFamily.P_SCORE_RANDOMIZED),
    ScoreKind(ScoreFamily.NAIVE, FTransform.IDENTITY),
    ScoreKind(ScoreFamily.NAIVE, FTransform.INVERSE_COMPLEMENT),
    ScoreKind(ScoreFamily.NAIVE, FTransform.ODDS),
)


@dataclass(frozen=True)
class RandomDraw:
    """A uniform tie-breaking draw plus the derivation path that produced it."""

    u: float
    seed_path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        as_unit_interval(self.u, "uniform draw")
        object.__setattr__(self, "seed_path", tuple(self.seed_path))


def _prompt_key(prompt_id: str) -> int:
    digest = hashlib.sha256(prompt_id.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def uniform_block(master_seed: int, split_index: int, prompt_id: str, count: int) -> np.ndarray:
    """The first ``count`` uniforms of the (seed, split, prompt) stream.

    A pure function of its arguments: the stream is derived from the
    master seed through a spawn key, so draws never depend on evaluation
    order across prompts or splits.
    """
    if master_seed < 0 or split_index < 0:
        raise InvalidInputError("master seed and split index must be >= 0")
    seq = np.random.SeedSequence(master_seed, spawn_key=(1, split_index, _prompt_key(prompt_id)))
    return np.random.default_rng(seq).random(count)


def uniform_draw(
    master_seed: int, split_index: int, prompt_id: str, response_ordinal: int
) -> RandomDraw:
    """Deterministic uniform draw for one (split, prompt, response) triple."""
    if response_ordinal < 0:
        raise InvalidInputError("response ordinal must be >= 0")
    block = uniform_block(master_seed, split_index, prompt_id, response_ordinal + 1)
    return RandomDraw(
        u=float(block[response_ordinal]),
        seed_path=(master_seed, split_index, _prompt_key(prompt_id), response_ordinal),
    )


# ---------------------------------------------------------------------------
# the scores themselves
# ---------------------------------------------------------------------------


def e_score(f_test: float, cal: CalibrationSummary) -> float:
    """Reciprocal e-value of a test response's transformed value.

    Touches only the summary's precomputed sum and count, never the
    per-prompt list, so each call is O(1) once the summary exists.
    Monotone nonincreasing in f_test, with range [1/(n+1), +inf].
    """
    e_value = (cal.n + 1) * ext_div(f_test, ext_add(f_test, cal.fstar_sum))
    return ext_recip(e_value)


def combined_e_score(components: Sequence[float]) -> float:
    """Invert the mean reciprocal of several e-scores.

    The reciprocals are e-values, and an average of e-values is again an
    e-value, so the combination keeps the same guarantee while letting
    any single small component dominate: the result is at most
    len(components) times the smallest component.
    """
    if len(components) == 0:
        raise InvalidInputError("cannot combine zero e-scores")
    total = 0.0
    for s in components:
        total = ext_add(total, ext_recip(s))
    return ext_recip(ext_div(total, float(len(components))))


def p_score(f_test: float, cal: CalibrationSummary) -> float:
    """Rank of f_test among the calibration maxima, as a conformal p-value.

    Counts weak exceedances with exact float comparison (ties at +inf
    count), so each call walks the full per-prompt list: Theta(n).
    Range [1/(n+1), 1].
    """
    f_test = _checked_value(f_test)
    count = sum(1 for v in cal.per_prompt_fstar if f_test <= v)
    return (1 + count) / (cal.n + 1)


def p_score_randomized(f_test: float, cal: CalibrationSummary, draw: RandomDraw) -> float:
    """Tie-randomized p-score; u = 1 recovers the plain p-score exactly."""
    f_test = _checked_value(f_test)
    ties = 0
    below = 0
    for v in cal.per_prompt_fstar:
        if f_test == v:
            ties += 1
        elif f_test < v:
            below += 1
    return (draw.u * (1 + ties) + below) / (cal.n + 1)


def naive_score(estimate: float, transform: FTransform) -> float:
    """Reciprocal transformed estimate, with no calibration correction."""
    estimate = as_unit_interval(estimate)
    if transform is FTransform.IDENTITY:
        return ext_div(1.0, estimate)
    if transform is FTransform.INVERSE_COMPLEMENT:
        return 1.0 - estimate
    if transform is FTransform.ODDS:
        return ext_div(1.0 - estimate, estimate)
    raise InvalidInputError(f"unknown transform {transform!r}")


def _checked_value(f_test: float) -> float:
    value = float(f_test)
    if math.isnan(value) or value < 0.0:
        raise InvalidInputError(f"test value must be an extended nonnegative real, got {f_test!r}")
    return value


def _require_summary(
    cal: object, transform: FTransform | None, kind: ScoreKind
) -> CalibrationSummary:
    if not isinstance(cal, CalibrationSummary):
        raise ConfigurationError(
            f"score kind {kind.name!r} needs a single calibration summary, got {type(cal).__name__}"
        )
    if transform is not None and cal.transform is not None and cal.transform is not transform:
        raise ConfigurationError(
            f"score kind {kind.name!r} wants transform {transform.name} but the summary "
            f"was built with {cal.transform.name}"
        )
    return cal


def score_response_set(
    prompt: Prompt,
    responses: Sequence[Response],
    estimates: EstimateSource,
    kind: ScoreKind,
    cal: "CalibrationSummary | Mapping[FTransform, CalibrationSummary] | None" = None,
    *,
    master_seed: int = 0,
    split_index: int = 0,
) -> ScoredResponseSet:
    """Score every response of one prompt under a single score kind.

    ``cal`` is a single summary for e/p kinds, a mapping from all three
    transforms to summaries for the combined kind, and unused for naive
    kinds.  Randomized p-scores draw their uniform per response ordinal
    from (master_seed, split_index, prompt id).
    """
    estimate_of = [aggregate_conditionals(estimates, resp) for resp in responses]

    if kind.family is ScoreFamily.NAIVE:
        assert kind.transform is not None
        scores = [naive_score(o, kind.transform) for o in estimate_of]

    elif kind.family is ScoreFamily.E_SCORE:
        assert kind.transform is not None
        summary = _require_summary(cal, kind.transform, kind)
        scores = [
            e_score(transform_estimate(o, kind.transform), summary) for o in estimate_of
        ]

    elif kind.family is ScoreFamily.E_SCORE_COMBINED:
        if not isinstance(cal, Mapping):
            raise ConfigurationError(
                "the combined e-score needs a mapping of all three transforms to summaries"
            )
        summaries = {}
        for transform in FTransform:
            if transform not in cal:
                raise ConfigurationError(f"missing calibration summary for {transform.name}")
            summaries[transform] = _require_summary(cal[transform], transform, kind)
        scores = [
            combined_e_score(
                [
                    e_score(transform_estimate(o, t), summaries[t])
                    for t in FTransform
                ]
            )
            for o in estimate_of
        ]

    elif kind.family in (ScoreFamily.P_SCORE, ScoreFamily.P_SCORE_RANDOMIZED):
        summary = _require_summary(cal, None, kind)
        value_transform = summary.transform or FTransform.IDENTITY
        values = [transform_estimate(o, value_transform) for o in estimate_of]
        if kind.family is ScoreFamily.P_SCORE:
            scores = [p_score(v, summary) for v in values]
        else:
            block = uniform_block(master_seed, split_index, prompt.id, len(values))
            scores = [
                p_score_randomized(
                    v,
                    summary,
                    RandomDraw(float(block[j]), (master_seed, split_index, _prompt_key(prompt.id), j)),
                )
                for j, v in enumerate(values)
            ]
    else:  # pragma: no cover - enum is exhaustive
        raise ConfigurationError(f"unknown score family {kind.family!r}")

    return ScoredResponseSet(tuple(zip(tuple(responses), scores)))
