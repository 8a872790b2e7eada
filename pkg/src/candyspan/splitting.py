"""Stratified cross-validation folds, holdout splits and class oversampling.

All randomness comes from the Philox counter-based generator (numpy) keyed
by the caller's 64-bit seed plus a hash of the operation and stratum, so
results are reproducible and independent of the input corpus order: items
are first brought into canonical (document, comment_id, replica) order,
then permuted, then dealt.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .corpus import AnnotatedComment, Corpus, replicate

BINARY = "binary"
FIRST_SPAN_TYPE = "first_span_type"
STRATIFY_MODES = (BINARY, FIRST_SPAN_TYPE)

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class StratumKey:
    """The stratum a comment belongs to under a stratification mode."""

    mode: str
    value: str

    def __post_init__(self):
        if self.mode not in STRATIFY_MODES:
            raise ValueError(f"unknown stratify mode: {self.mode!r}")
        if self.mode == BINARY and self.value not in ("yes", "no"):
            raise ValueError(f"binary stratum value must be yes/no, got {self.value!r}")
        if self.value == "none" and self.mode != FIRST_SPAN_TYPE:
            raise ValueError("'none' stratum only exists in first_span_type mode")


@dataclass(frozen=True)
class FoldAssignment:
    """Fold index per (document, comment_id), for ``fold_count`` folds."""

    fold_count: int
    assignment: dict[tuple[str, int], int]


class InfeasibleSplitError(ValueError):
    """Requested split cannot be produced from this corpus."""


def stratum_key(ac: AnnotatedComment, mode: str) -> StratumKey:
    """Compute the stratum of one comment.

    Binary mode uses the is_candy flag; first_span_type mode uses the type
    of the span with the smallest (start, end), or "none" without spans.
    """
    if mode == BINARY:
        return StratumKey(mode, "yes" if ac.is_candy else "no")
    if mode == FIRST_SPAN_TYPE:
        if not ac.spans:
            return StratumKey(mode, "none")
        first = min(ac.spans, key=lambda s: (s.start, s.end))
        return StratumKey(mode, first.candy_type.name)
    raise ValueError(f"unknown stratify mode: {mode!r}")


def _rng(seed: int, operation: str, mode: str, value: str) -> np.random.Generator:
    payload = f"{operation}\x00{mode}\x00{value}".encode("utf-8")
    digest = int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")
    key = np.array([seed & _MASK64, digest], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _strata(corpus: Corpus, mode: str) -> dict[str, list[AnnotatedComment]]:
    strata: dict[str, list[AnnotatedComment]] = {}
    for ac in corpus:
        strata.setdefault(stratum_key(ac, mode).value, []).append(ac)
    # canonical order inside each stratum makes results input-order invariant
    for members in strata.values():
        members.sort(key=lambda ac: ac.full_key)
    return strata


def _check_unique_keys(corpus: Corpus, operation: str) -> None:
    seen: set[tuple[str, int]] = set()
    for ac in corpus:
        if ac.key in seen:
            raise InfeasibleSplitError(
                f"{operation} requires unique (document, comment_id) keys; "
                f"{ac.key} occurs more than once (oversampled corpus?)"
            )
        seen.add(ac.key)


def make_folds(corpus: Corpus, k: int, mode: str, seed: int) -> FoldAssignment:
    """Assign every comment to one of ``k`` stratified folds.

    Comments are shuffled per stratum with a seed derived from
    (seed, stratum) and dealt round-robin, which bounds per-stratum fold
    size differences by one.
    """
    if k < 2:
        raise InfeasibleSplitError(f"fold count must be at least 2, got {k}")
    if not corpus:
        raise InfeasibleSplitError("cannot split an empty corpus")
    if k > len(corpus):
        raise InfeasibleSplitError(
            f"fold count {k} exceeds corpus size {len(corpus)}"
        )
    _check_unique_keys(corpus, "make_folds")

    assignment: dict[tuple[str, int], int] = {}
    strata = _strata(corpus, mode)
    for stratum_index, value in enumerate(sorted(strata)):
        members = strata[value]
        generator = _rng(seed, "folds", mode, value)
        permutation = generator.permutation(len(members))
        start = stratum_index % k
        for position, member_index in enumerate(permutation):
            assignment[members[member_index].key] = (start + position) % k
    return FoldAssignment(fold_count=k, assignment=assignment)


def write_fold_tsv(folds: FoldAssignment, destination: str | Path | IO[str]) -> None:
    """Serialize a fold assignment as document<TAB>comment_id<TAB>fold."""
    rows = sorted(folds.assignment.items())
    if hasattr(destination, "write"):
        handle, owned = destination, False
    else:
        handle, owned = open(destination, "w", encoding="utf-8", newline=""), True
    try:
        handle.write("document\tcomment_id\tfold\n")
        for (document, comment_id), fold in rows:
            handle.write(f"{document}\t{comment_id}\t{fold}\n")
    finally:
        if owned:
            handle.close()


def holdout_split(
    corpus: Corpus, fraction: float | Fraction, mode: str, seed: int
) -> tuple[Corpus, Corpus]:
    """Split off a stratified holdout of about ``fraction`` of the corpus.

    The holdout target is round(fraction * size), distributed over strata
    proportionally (largest remainder first) with the constraint that any
    stratum of two or more members keeps at least one training member.
    Returns (train, holdout); both preserve the input corpus order.
    """
    if not 0 < fraction < 1:
        raise InfeasibleSplitError(f"fraction must be in (0, 1), got {fraction}")
    if not corpus:
        raise InfeasibleSplitError("cannot split an empty corpus")
    _check_unique_keys(corpus, "holdout_split")

    total = len(corpus)
    target = round(fraction * total)
    if target < 1 or target > total - 1:
        raise InfeasibleSplitError(
            f"fraction {fraction} of {total} comments leaves an empty side"
        )

    strata = _strata(corpus, mode)
    values = sorted(strata)
    sizes = {value: len(strata[value]) for value in values}
    caps = {
        value: (sizes[value] - 1 if sizes[value] >= 2 else 1) for value in values
    }
    counts = {value: min(int(fraction * sizes[value]), caps[value]) for value in values}

    remainder_order = sorted(
        values,
        key=lambda value: (-(fraction * sizes[value] - int(fraction * sizes[value])), value),
    )
    missing = target - sum(counts.values())
    while missing > 0:
        progressed = False
        for value in remainder_order:
            if missing == 0:
                break
            if counts[value] < caps[value]:
                counts[value] += 1
                missing -= 1
                progressed = True
        if not progressed:
            break  # every stratum is at its cap; holdout stays smaller

    holdout_keys: set[tuple[str, int]] = set()
    for value in values:
        members = strata[value]
        generator = _rng(seed, "holdout", mode, value)
        permutation = generator.permutation(len(members))
        for position in permutation[: counts[value]]:
            holdout_keys.add(members[position].key)

    if not holdout_keys or len(holdout_keys) == total:
        raise InfeasibleSplitError(
            f"fraction {fraction} cannot produce a non-empty train and holdout"
        )
    train = [ac for ac in corpus if ac.key not in holdout_keys]
    holdout = [ac for ac in corpus if ac.key in holdout_keys]
    return train, holdout


def oversample_binary(corpus: Corpus, seed: int) -> Corpus:
    """Oversample the candy class to a 1:1 ratio with the non-candy class.

    Replicas are drawn uniformly with replacement from the candy comments
    and appended after the originals with replica ordinals 1, 2, ... per
    source comment. If candy comments already reach or exceed the non-candy
    count, the corpus is returned unchanged.
    """
    candy = [ac for ac in corpus if ac.is_candy]
    non_candy_count = len(corpus) - len(candy)
    if not candy or non_candy_count == 0:
        raise ValueError("oversampling needs at least one comment of each class")
    extra = non_candy_count - len(candy)
    if extra <= 0:
        return list(corpus)

    candy.sort(key=lambda ac: ac.full_key)
    generator = _rng(seed, "oversample", BINARY, "candy")
    draws = generator.integers(0, len(candy), size=extra)

    replica_counter: dict[tuple[str, int], int] = {}
    for ac in corpus:
        key = ac.key
        replica_counter[key] = max(replica_counter.get(key, 0), ac.replica)

    result = list(corpus)
    for draw in draws:
        source = candy[int(draw)]
        replica_counter[source.key] += 1
        result.append(replicate(source, replica_counter[source.key]))
    return result
