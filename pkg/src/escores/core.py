"""Extended nonnegative real arithmetic and the shared data model.

Every score in this package lives on the extended nonnegative half-line:
a finite float >= 0 or +inf, never NaN and never negative.  Division
follows the convention a/0 = 0 when a = 0 and +inf otherwise, so the
reciprocal of 0 is +inf and the reciprocal of +inf is 0.  The remaining
corner, inf/inf, is defined as 1: it is the limit of f/(f + c) as f
grows with c held finite, which keeps the score of an infinitely
confident response at its minimal attainable value instead of leaving
the ratio undefined.

Container types are frozen dataclasses over tuples.  They validate
their invariants at construction time and are immutable afterwards, so
instances can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Iterator

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, typing only
    from .estimation import FTransform

INF = math.inf


class EScoresError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(EScoresError, ValueError):
    """An argument violates a documented precondition or invariant."""


class ConfigurationError(EScoresError):
    """Score kinds, calibration data, or report grids do not fit together."""


class InvalidSplitError(EScoresError):
    """A calibration/test split would leave one side empty or is malformed."""


class ResponseSetSizeError(EScoresError):
    """An uncapped permutation response set would be combinatorially huge."""


# ---------------------------------------------------------------------------
# extended nonnegative reals
# ---------------------------------------------------------------------------


def as_ext_real(value: float, what: str = "value") -> float:
    """Validate and return ``value`` as an extended nonnegative real.

    Accepts ints, floats, and numpy scalars.  Rejects NaN and negatives.
    """
    try:
        out = float(value)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{what} must be a number, got {value!r}") from exc
    if math.isnan(out):
        raise InvalidInputError(f"{what} must not be NaN")
    if out < 0.0:
        raise InvalidInputError(f"{what} must be >= 0, got {out!r}")
    return out


def ext_add(a: float, b: float) -> float:
    """Sum of two extended nonnegative reals; +inf absorbs."""
    return as_ext_real(a, "left addend") + as_ext_real(b, "right addend")


def ext_sum(values: Iterable[float]) -> float:
    """Exactly rounded sum of extended nonnegative reals (0.0 for empty)."""
    checked = [as_ext_real(v, "summand") for v in values]
    if any(math.isinf(v) for v in checked):
        return INF
    return math.fsum(checked)


def ext_div(a: float, b: float) -> float:
    """Divide on [0, +inf] with total semantics.

    a/0 is 0 when a = 0 and +inf otherwise; finite/inf is 0; inf/finite
    is +inf; inf/inf is 1 (the limit rule described in the module
    docstring).  Never returns NaN or a negative value.
    """
    a = as_ext_real(a, "numerator")
    b = as_ext_real(b, "denominator")
    if b == 0.0:
        return 0.0 if a == 0.0 else INF
    if math.isinf(b):
        return 1.0 if math.isinf(a) else 0.0
    if math.isinf(a):
        return INF
    return a / b


def ext_recip(a: float) -> float:
    """Reciprocal on [0, +inf]: recip(0) = +inf and recip(+inf) = 0 exactly."""
    return ext_div(1.0, a)


# ---------------------------------------------------------------------------
# scalar validators for the narrow value types used throughout
# ---------------------------------------------------------------------------


def as_label(value: int, what: str = "label") -> int:
    """Validate a correctness label: 1 means correct, 0 means incorrect."""
    if isinstance(value, bool):
        return int(value)
    if not isinstance(value, int) or value not in (0, 1):
        raise InvalidInputError(f"{what} must be 0 or 1, got {value!r}")
    return value


def as_unit_interval(value: float, what: str = "estimate") -> float:
    """Validate a finite float in [0, 1] (oracle estimates, uniform draws)."""
    out = as_ext_real(value, what)
    if out > 1.0:
        raise InvalidInputError(f"{what} must be <= 1, got {out!r}")
    return out


def as_tolerance(value: float, what: str = "tolerance") -> float:
    """Validate an error tolerance: any extended nonnegative real."""
    return as_ext_real(value, what)


def as_unit_fraction(value: "float | str | Fraction", what: str = "fraction") -> Fraction:
    """Coerce an inclusion fraction to an exact rational in [0, 1].

    Strings are parsed as exact decimals ("0.1" -> 1/10).  Floats go
    through their shortest round-trip decimal representation, so 0.1
    also means exactly 1/10 rather than the underlying binary value.
    """
    if isinstance(value, Fraction):
        frac = value
    elif isinstance(value, str):
        try:
            frac = Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInputError(f"{what} must be a decimal string, got {value!r}") from exc
    elif isinstance(value, int):
        frac = Fraction(value)
    elif isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            raise InvalidInputError(f"{what} must be finite, got {value!r}")
        frac = Fraction(repr(value))
    else:
        raise InvalidInputError(f"{what} must be a number or decimal string, got {value!r}")
    if not (0 <= frac <= 1):
        raise InvalidInputError(f"{what} must lie in [0, 1], got {frac}")
    return frac


# ---------------------------------------------------------------------------
# data model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Prompt:
    """A prompt identity; text is optional and never used for computation."""

    id: str
    text: str | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise InvalidInputError("prompt id must be a nonempty string")


@dataclass(frozen=True)
class SubResponse:
    """One generation step, identified by its original 1-based position."""

    index: int
    text: str | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.index, int) or isinstance(self.index, bool) or self.index < 1:
            raise InvalidInputError(f"sub-response index must be an int >= 1, got {self.index!r}")


@dataclass(frozen=True)
class Response:
    """An ordered arrangement of sub-responses, stored by original index.

    The tuple of indices is the identity of a response: two responses
    are equal exactly when they arrange the same original sub-responses
    in the same order.
    """

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", tuple(self.indices))
        if len(self.indices) == 0:
            raise InvalidInputError("a response must contain at least one sub-response")
        for i in self.indices:
            if not isinstance(i, int) or isinstance(i, bool) or i < 1:
                raise InvalidInputError(f"response indices must be ints >= 1, got {i!r}")
        if len(set(self.indices)) != len(self.indices):
            raise InvalidInputError(f"response indices must be distinct, got {self.indices}")

    def __len__(self) -> int:
        return len(self.indices)

    @staticmethod
    def prefix(length: int) -> "Response":
        """The identity-order response of the first ``length`` sub-responses."""
        if length < 1:
            raise InvalidInputError("prefix length must be >= 1")
        return Response(tuple(range(1, length + 1)))


@dataclass(frozen=True)
class LabeledResponseSet:
    """Pairwise-distinct responses, each tagged 1 (correct) or 0 (incorrect)."""

    entries: tuple[tuple[Response, int], ...]

    def __post_init__(self) -> None:
        entries = tuple((resp, as_label(lab)) for resp, lab in self.entries)
        object.__setattr__(self, "entries", entries)
        seen = set()
        for resp, _ in entries:
            if not isinstance(resp, Response):
                raise InvalidInputError(f"expected Response, got {resp!r}")
            if resp in seen:
                raise InvalidInputError(f"duplicate response in labeled set: {resp.indices}")
            seen.add(resp)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[Response, int]]:
        return iter(self.entries)

    @property
    def responses(self) -> tuple[Response, ...]:
        return tuple(resp for resp, _ in self.entries)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(lab for _, lab in self.entries)

    def incorrect_responses(self) -> tuple[Response, ...]:
        return tuple(resp for resp, lab in self.entries if lab == 0)

    def correct_count(self) -> int:
        return sum(lab for _, lab in self.entries)


@dataclass(frozen=True)
class ScoredResponseSet:
    """Pairwise-distinct responses, each carrying an extended-real score."""

    entries: tuple[tuple[Response, float], ...]

    def __post_init__(self) -> None:
        entries = tuple((resp, as_ext_real(score, "score")) for resp, score in self.entries)
        object.__setattr__(self, "entries", entries)
        seen = set()
        for resp, _ in entries:
            if not isinstance(resp, Response):
                raise InvalidInputError(f"expected Response, got {resp!r}")
            if resp in seen:
                raise InvalidInputError(f"duplicate response in scored set: {resp.indices}")
            seen.add(resp)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[Response, float]]:
        return iter(self.entries)

    @property
    def responses(self) -> tuple[Response, ...]:
        return tuple(resp for resp, _ in self.entries)

    @property
    def scores(self) -> tuple[float, ...]:
        return tuple(score for _, score in self.entries)


@dataclass(frozen=True)
class CalibrationSummary:
    """Per-prompt maxima of transformed incorrect-response values, plus their sum.

    ``fstar_sum`` is computed once at build time; scoring a test response
    against the summary then costs O(1) for e-scores, while rank-based
    p-scores walk ``per_prompt_fstar`` in full.  The optional ``transform``
    tag records which value transform produced the entries so that
    mismatched score requests can be rejected.
    """

    per_prompt_fstar: tuple[float, ...]
    fstar_sum: float
    n: int
    transform: "FTransform | None" = field(default=None)

    def __post_init__(self) -> None:
        values = tuple(as_ext_real(v, "calibration value") for v in self.per_prompt_fstar)
        object.__setattr__(self, "per_prompt_fstar", values)
        if self.n != len(values):
            raise InvalidInputError(
                f"summary n={self.n} disagrees with {len(values)} stored values"
            )
        expected = ext_sum(values)
        if expected != as_ext_real(self.fstar_sum, "fstar_sum"):
            raise InvalidInputError(
                f"fstar_sum={self.fstar_sum!r} disagrees with recomputed sum {expected!r}"
            )
