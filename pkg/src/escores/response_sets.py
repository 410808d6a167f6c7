"""Building and labeling response sets from a generated step sequence.

A generated response is an ordered sequence of sub-responses together
with the position of the first erroneous step, if any.  From it we
derive a set of candidate responses: every prefix of the sequence, and
optionally every prefix of every reordering of the sequence.  A derived
response is incorrect exactly when it contains the first-error step,
which makes labels monotone along the identity prefix chain: once a
prefix turns incorrect, every longer prefix stays incorrect.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

from .core import (
    InvalidInputError,
    LabeledResponseSet,
    Prompt,
    Response,
    ResponseSetSizeError,
    SubResponse,
)

# Uncapped enumeration of all permutations is refused beyond this many steps.
MAX_UNCAPPED_PERMUTATION_STEPS = 8


@dataclass(frozen=True)
class GeneratedResponse:
    """One model generation: prompt, ordered steps, first erroneous step.

    ``first_error_index`` is the 1-based position of the first incorrect
    sub-response, or None when the whole generation is correct.  Steps
    after the first error are not individually judged; containment of
    the first-error step is what makes a derived response incorrect.
    """

    prompt: Prompt
    sub_responses: tuple[SubResponse, ...]
    first_error_index: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "sub_responses", tuple(self.sub_responses))
        if not self.sub_responses:
            raise InvalidInputError("a generated response needs at least one sub-response")
        for position, sub in enumerate(self.sub_responses, start=1):
            if not isinstance(sub, SubResponse):
                raise InvalidInputError(f"expected SubResponse, got {sub!r}")
            if sub.index != position:
                raise InvalidInputError(
                    f"sub-responses must be indexed 1..k in order; "
                    f"position {position} holds index {sub.index}"
                )
        fei = self.first_error_index
        if fei is not None:
            if not isinstance(fei, int) or isinstance(fei, bool):
                raise InvalidInputError(f"first_error_index must be int or None, got {fei!r}")
            if not 1 <= fei <= len(self.sub_responses):
                raise InvalidInputError(
                    f"first_error_index {fei} out of range 1..{len(self.sub_responses)}"
                )

    def __len__(self) -> int:
        return len(self.sub_responses)

    @staticmethod
    def from_texts(
        prompt_id: str,
        texts: "list[str] | tuple[str, ...]",
        first_error_index: int | None = None,
        prompt_text: str | None = None,
    ) -> "GeneratedResponse":
        subs = tuple(SubResponse(i, t) for i, t in enumerate(texts, start=1))
        return GeneratedResponse(Prompt(prompt_id, prompt_text), subs, first_error_index)


class PermutationMode(enum.Enum):
    IDENTITY_ONLY = "identity_only"
    EXPLICIT_LIST = "explicit_list"
    ALL_PERMUTATIONS = "all_permutations"


@dataclass(frozen=True)
class PermutationPolicy:
    """How to expand a generated response into candidate orderings.

    ``explicit`` must be given exactly for EXPLICIT_LIST mode, as a tuple
    of 1-based index permutations.  ``cap`` bounds how many responses the
    expansion may produce; ALL_PERMUTATIONS on more than
    MAX_UNCAPPED_PERMUTATION_STEPS steps is refused unless a cap is set.
    """

    mode: PermutationMode
    explicit: tuple[tuple[int, ...], ...] | None = None
    cap: int | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.mode, PermutationMode):
            raise InvalidInputError(f"mode must be a PermutationMode, got {self.mode!r}")
        if (self.explicit is not None) != (self.mode is PermutationMode.EXPLICIT_LIST):
            raise InvalidInputError("explicit permutations are given exactly for EXPLICIT_LIST mode")
        if self.explicit is not None:
            perms = tuple(tuple(p) for p in self.explicit)
            object.__setattr__(self, "explicit", perms)
            if not perms:
                raise InvalidInputError("explicit permutation list must be nonempty")
            for perm in perms:
                if len(set(perm)) != len(perm) or any(
                    not isinstance(i, int) or isinstance(i, bool) or i < 1 for i in perm
                ):
                    raise InvalidInputError(f"not a valid permutation of 1..k: {perm}")
        if self.cap is not None and (not isinstance(self.cap, int) or self.cap < 1):
            raise InvalidInputError(f"cap must be a positive int or None, got {self.cap!r}")


IDENTITY_POLICY = PermutationPolicy(PermutationMode.IDENTITY_ONLY)


def build_prefix_set(generated: GeneratedResponse) -> list[Response]:
    """All prefixes of the generation, shortest first.

    The i-th element keeps the first i sub-responses in their original
    order, so the result has exactly len(generated) pairwise-distinct
    responses and the full generation comes last.
    """
    k = len(generated)
    if k == 0:
        raise InvalidInputError("cannot build a response set from an empty generation")
    return [Response.prefix(i) for i in range(1, k + 1)]


def _check_bijection(perm: tuple[int, ...], k: int) -> None:
    if sorted(perm) != list(range(1, k + 1)):
        raise InvalidInputError(f"permutation {perm} is not a bijection on 1..{k}")


def build_permutation_set(
    generated: GeneratedResponse, policy: PermutationPolicy = IDENTITY_POLICY
) -> list[Response]:
    """Union of prefix sets over the policy's orderings, deduplicated.

    Responses are identified by their ordered index tuples; the first
    occurrence in enumeration order is kept.  IDENTITY_ONLY reproduces
    ``build_prefix_set`` exactly.  ALL_PERMUTATIONS enumerates orderings
    lexicographically and yields sum over i of k!/(k-i)! responses when
    uncapped; beyond MAX_UNCAPPED_PERMUTATION_STEPS steps a cap is
    required.
    """
    k = len(generated)
    if k == 0:
        raise InvalidInputError("cannot build a response set from an empty generation")

    if policy.mode is PermutationMode.IDENTITY_ONLY:
        responses = build_prefix_set(generated)
        return responses[: policy.cap] if policy.cap is not None else responses

    if policy.mode is PermutationMode.EXPLICIT_LIST:
        assert policy.explicit is not None
        orderings: "itertools.chain[tuple[int, ...]] | list[tuple[int, ...]]" = []
        for perm in policy.explicit:
            _check_bijection(perm, k)
        orderings = list(policy.explicit)
    else:
        if k > MAX_UNCAPPED_PERMUTATION_STEPS and policy.cap is None:
            raise ResponseSetSizeError(
                f"all permutations of {k} steps would produce "
                f"{sum(math.factorial(k) // math.factorial(k - i) for i in range(1, k + 1))} "
                f"responses; set a cap or use at most {MAX_UNCAPPED_PERMUTATION_STEPS} steps"
            )
        orderings = itertools.permutations(range(1, k + 1))  # lexicographic

    out: list[Response] = []
    seen: set[tuple[int, ...]] = set()
    for ordering in orderings:
        for i in range(1, k + 1):
            key = tuple(ordering[:i])
            if key not in seen:
                seen.add(key)
                out.append(Response(key))
                if policy.cap is not None and len(out) == policy.cap:
                    return out
    return out


def label_response_set(
    generated: GeneratedResponse, responses: "list[Response] | tuple[Response, ...]"
) -> LabeledResponseSet:
    """Label each response 0 (incorrect) iff it contains the first-error step.

    A fully correct generation labels everything 1.  Responses must draw
    their indices from the generation's steps.
    """
    k = len(generated)
    fei = generated.first_error_index
    entries = []
    for resp in responses:
        if any(i > k for i in resp.indices):
            raise InvalidInputError(
                f"response {resp.indices} references steps beyond the {k}-step generation"
            )
        label = 0 if (fei is not None and fei in resp.indices) else 1
        entries.append((resp, label))
    return LabeledResponseSet(tuple(entries))
