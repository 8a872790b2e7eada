"""Character spans <-> token-level BIO tags, plus the prediction interchange format.

Tokenization is supplied by the caller as :class:`TokenOffset` lists, so any
tokenizer (whitespace, WordPiece, SentencePiece, ...) can be used as long as
it reports character offsets. Offsets count Unicode scalar values and token
ranges are half-open, matching the corpus module.

Encoding: a token is eligible for a span when their character ranges
intersect. A token eligible for several spans goes to the span with the
largest character overlap; ties go to the span that comes first in
(start, end, type order). Spans left without any token are dropped and
reported, which makes the information loss of single-label BIO tagging
observable instead of silent.

Decoding: ``decode_basic`` keeps runs of a B tag followed by same-type I
tags and discards orphan or type-mismatched I tags. ``decode_extended``
additionally repairs word boundaries in a single left-to-right pass so no
span starts or ends inside a word (as flagged by ``is_word_continuation``):
a continuation token right after an open span is absorbed into that span
even if it carries a B tag, and a span that would begin at a continuation
token is widened back to the start of its word when the word's earlier
tokens are unclaimed.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

from .corpus import CandyType, SpanAnnotation

logger = logging.getLogger(__name__)

OUTSIDE = "O"


@dataclass(frozen=True)
class TokenOffset:
    """One token: ordinal, half-open character range, subword-continuation flag."""

    index: int
    start: int
    end: int
    is_word_continuation: bool = False


@dataclass(frozen=True)
class BioTag:
    """A BIO tag; ``candy_type`` is present exactly when kind is B or I."""

    kind: str
    candy_type: CandyType | None = None

    def __post_init__(self):
        if self.kind not in ("O", "B", "I"):
            raise ValueError(f"tag kind must be O, B or I, got {self.kind!r}")
        if (self.kind == "O") != (self.candy_type is None):
            raise ValueError("candy_type must be present iff kind is B or I")

    @property
    def name(self) -> str:
        if self.kind == "O":
            return OUTSIDE
        return f"{self.kind}-{self.candy_type.name}"

    @classmethod
    def parse(cls, name: str) -> "BioTag":
        if name == OUTSIDE:
            return _O_TAG
        if len(name) > 2 and name[1] == "-" and name[0] in ("B", "I"):
            try:
                return cls(name[0], CandyType[name[2:]])
            except KeyError:
                pass
        raise ValueError(f"unknown tag name: {name!r}")


_O_TAG = BioTag(OUTSIDE)


def label_registry() -> tuple[str, ...]:
    """The 21 tag names in canonical order; the index is the integer id."""
    names = [OUTSIDE]
    for candy_type in CandyType:
        names.append(f"B-{candy_type.name}")
        names.append(f"I-{candy_type.name}")
    return tuple(names)


_REGISTRY = label_registry()
_TAG_IDS = {name: i for i, name in enumerate(_REGISTRY)}


def tag_id(name: str) -> int:
    try:
        return _TAG_IDS[name]
    except KeyError:
        raise ValueError(f"unknown tag name: {name!r}")


def tag_name(identifier: int) -> str:
    if not 0 <= identifier < len(_REGISTRY):
        raise ValueError(f"tag id out of range: {identifier}")
    return _REGISTRY[identifier]


@dataclass(frozen=True)
class TaggedSequence:
    """Token offsets plus one BIO tag per token for a single comment."""

    document: str
    comment_id: int
    tokens: tuple[TokenOffset, ...]
    tags: tuple[BioTag, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.tags):
            raise ValueError(
                f"{len(self.tags)} tags for {len(self.tokens)} tokens "
                f"in ({self.document}, {self.comment_id})"
            )

    @property
    def key(self) -> tuple[str, int]:
        return (self.document, self.comment_id)

    def tag_names(self) -> tuple[str, ...]:
        return tuple(tag.name for tag in self.tags)


def validate_tokens(tokens: Sequence[TokenOffset]) -> None:
    """Raise ValueError unless offsets are increasing, disjoint and well formed."""
    previous_end = None
    for position, token in enumerate(tokens):
        if token.index != position:
            raise ValueError(f"token index {token.index} at position {position}")
        if token.start < 0 or token.start >= token.end:
            raise ValueError(f"bad token range [{token.start}, {token.end})")
        if previous_end is not None and token.start < previous_end:
            raise ValueError(
                f"token {position} starts at {token.start} before previous end {previous_end}"
            )
        previous_end = token.end
    if tokens and tokens[0].is_word_continuation:
        raise ValueError("first token cannot be a word continuation")


@dataclass(frozen=True)
class EncodeResult:
    """Encoder output: the tagged sequence plus indices of dropped spans."""

    tagged: TaggedSequence
    dropped_spans: tuple[int, ...]


def encode_bio(
    text: str,
    spans: Sequence[SpanAnnotation],
    tokens: Sequence[TokenOffset],
    document: str = "",
    comment_id: int = 0,
) -> EncodeResult:
    """Tag tokens with B/I labels for the given character spans.

    ``dropped_spans`` holds the positions (into the input ``spans`` list) of
    spans that ended up with no token, either because no token intersects
    them or because every intersecting token was won by another span.
    """
    validate_tokens(tokens)
    for span in spans:
        if not (0 <= span.start < span.end <= len(text)):
            raise ValueError(
                f"span [{span.start}, {span.end}) out of bounds for text of length {len(text)}"
            )
    for token in tokens:
        if token.end > len(text):
            raise ValueError(
                f"token [{token.start}, {token.end}) extends beyond text of length {len(text)}"
            )

    processing_order = sorted(
        range(len(spans)),
        key=lambda i: (spans[i].start, spans[i].end, spans[i].candy_type.order, i),
    )
    claimed: dict[int, list[int]] = {i: [] for i in range(len(spans))}
    for token in tokens:
        best_index = None
        best_overlap = 0
        for span_index in processing_order:
            span = spans[span_index]
            overlap = min(token.end, span.end) - max(token.start, span.start)
            if overlap > best_overlap:
                best_overlap = overlap
                best_index = span_index
        if best_index is not None:
            claimed[best_index].append(token.index)

    tags: list[BioTag] = [_O_TAG] * len(tokens)
    dropped: list[int] = []
    for span_index in processing_order:
        token_indices = claimed[span_index]
        if not token_indices:
            dropped.append(span_index)
            continue
        candy_type = spans[span_index].candy_type
        tags[token_indices[0]] = BioTag("B", candy_type)
        for token_index in token_indices[1:]:
            tags[token_index] = BioTag("I", candy_type)

    tagged = TaggedSequence(document, comment_id, tuple(tokens), tuple(tags))
    return EncodeResult(tagged=tagged, dropped_spans=tuple(sorted(dropped)))


def decode_basic(tagged: TaggedSequence) -> list[SpanAnnotation]:
    """Parse B-initiated runs of same-type I tags back into character spans.

    I tags without a same-type B or I immediately before them are discarded.
    Span boundaries come from the first token's start and the last token's
    end; output is sorted by (start, end).
    """
    spans: list[SpanAnnotation] = []
    current: tuple[CandyType, int, int] | None = None  # (type, first, last)

    def close() -> None:
        nonlocal current
        if current is not None:
            candy_type, first, last = current
            spans.append(
                SpanAnnotation(tagged.tokens[first].start, tagged.tokens[last].end, candy_type)
            )
            current = None

    for position, tag in enumerate(tagged.tags):
        if tag.kind == "B":
            close()
            current = (tag.candy_type, position, position)
        elif tag.kind == "I":
            if current is not None and current[0] == tag.candy_type:
                current = (current[0], current[1], position)
            else:
                close()  # orphan or type-mismatched I: discard the tag
        else:
            close()
    close()
    spans.sort(key=lambda s: (s.start, s.end))
    return spans


def decode_extended(tagged: TaggedSequence) -> list[SpanAnnotation]:
    """decode_basic plus word-boundary repair across subword tokens.

    Single left-to-right pass; on sequences without continuation tokens the
    result equals :func:`decode_basic`.
    """
    tokens = tagged.tokens
    runs: list[tuple[CandyType, int, int]] = []  # (type, first token, last token)
    claimed = [False] * len(tokens)
    current: tuple[CandyType, int, int] | None = None

    def close() -> None:
        nonlocal current
        if current is not None:
            runs.append(current)
            current = None

    for position, tag in enumerate(tagged.tags):
        token = tokens[position]
        if current is not None:
            if tag.kind == "I" and tag.candy_type == current[0]:
                current = (current[0], current[1], position)
                claimed[position] = True
                continue
            if token.is_word_continuation:
                # a span must not end mid-word: absorb the token, whatever
                # its tag says, and do not open a new span here
                if tag.kind != "O":
                    logger.debug(
                        "absorbed mid-word %s into %s span at token %d of (%s, %d)",
                        tag.name,
                        current[0].name,
                        position,
                        tagged.document,
                        tagged.comment_id,
                    )
                current = (current[0], current[1], position)
                claimed[position] = True
                continue
            close()
        if tag.kind == "B":
            first = position
            if token.is_word_continuation:
                word_start = position
                while word_start > 0 and tokens[word_start].is_word_continuation:
                    word_start -= 1
                if not any(claimed[word_start:position]):
                    # widen back so the span starts at the word boundary
                    first = word_start
                elif runs and runs[-1][2] == position - 1:
                    # earlier fragments of this word belong to the previous
                    # span; merge with it instead of starting mid-word
                    current = (runs[-1][0], runs[-1][1], position)
                    runs.pop()
                    claimed[position] = True
                    continue
            current = (tag.candy_type, first, position)
            for claimed_index in range(first, position + 1):
                claimed[claimed_index] = True
        # orphan I and O tags open nothing
    close()
    spans = [
        SpanAnnotation(tokens[first].start, tokens[last].end, candy_type)
        for candy_type, first, last in runs
    ]
    spans.sort(key=lambda s: (s.start, s.end))
    return spans


# --- interchange format -------------------------------------------------

class InterchangeFormatError(ValueError):
    """A malformed interchange file; carries path and 1-based line number."""

    def __init__(self, path: str | Path, line: int | None, message: str):
        self.path = str(path)
        self.line = line
        location = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{location}: {message}")


def _interchange_record(tagged: TaggedSequence, with_tags: bool = True) -> dict:
    record = {
        "document": tagged.document,
        "comment_id": tagged.comment_id,
        "tokens": [
            [token.start, token.end, token.is_word_continuation] for token in tagged.tokens
        ],
    }
    if with_tags:
        record["tags"] = list(tagged.tag_names())
    return record


def write_interchange(
    sequences: Iterable[TaggedSequence],
    destination: str | Path | IO[str],
    with_tags: bool = True,
) -> None:
    """Write one JSON record per line: document, comment_id, tokens, tags."""
    if hasattr(destination, "write"):
        handle, owned = destination, False
    else:
        handle, owned = open(destination, "w", encoding="utf-8", newline=""), True
    try:
        for tagged in sequences:
            record = _interchange_record(tagged, with_tags=with_tags)
            handle.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")
    finally:
        if owned:
            handle.close()


def _parse_tokens(path, lineno, raw_tokens) -> tuple[TokenOffset, ...]:
    if not isinstance(raw_tokens, list):
        raise InterchangeFormatError(path, lineno, "tokens must be an array")
    tokens: list[TokenOffset] = []
    for index, entry in enumerate(raw_tokens):
        if (
            not isinstance(entry, list)
            or len(entry) != 3
            or not isinstance(entry[0], int)
            or not isinstance(entry[1], int)
            or not isinstance(entry[2], bool)
        ):
            raise InterchangeFormatError(
                path, lineno, f"token {index} must be [start, end, is_word_continuation]"
            )
        tokens.append(TokenOffset(index, entry[0], entry[1], entry[2]))
    try:
        validate_tokens(tokens)
    except ValueError as exc:
        raise InterchangeFormatError(path, lineno, str(exc))
    return tuple(tokens)


def read_interchange(path: str | Path, require_tags: bool = True) -> list[TaggedSequence]:
    """Read interchange records; unknown tag names are rejected.

    With ``require_tags=False`` records may omit the tags field (token-only
    input for the encoder); missing tags are filled with O.
    """
    sequences: list[TaggedSequence] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InterchangeFormatError(path, lineno, f"invalid JSON: {exc}")
            if not isinstance(record, dict):
                raise InterchangeFormatError(path, lineno, "record must be a JSON object")
            document = record.get("document")
            comment_id = record.get("comment_id")
            if not isinstance(document, str) or not isinstance(comment_id, int):
                raise InterchangeFormatError(
                    path, lineno, "document must be a string and comment_id an integer"
                )
            tokens = _parse_tokens(path, lineno, record.get("tokens"))
            raw_tags = record.get("tags")
            if raw_tags is None:
                if require_tags:
                    raise InterchangeFormatError(path, lineno, "missing tags field")
                tags = tuple(_O_TAG for _ in tokens)
            else:
                if not isinstance(raw_tags, list) or not all(
                    isinstance(name, str) for name in raw_tags
                ):
                    raise InterchangeFormatError(path, lineno, "tags must be an array of strings")
                if len(raw_tags) != len(tokens):
                    raise InterchangeFormatError(
                        path, lineno, f"{len(raw_tags)} tags for {len(tokens)} tokens"
                    )
                try:
                    tags = tuple(BioTag.parse(name) for name in raw_tags)
                except ValueError as exc:
                    raise InterchangeFormatError(path, lineno, str(exc))
            sequences.append(TaggedSequence(document, comment_id, tokens, tags))
    return sequences
