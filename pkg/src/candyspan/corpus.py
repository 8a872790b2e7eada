"""Corpus model and TSV input/output for candy-speech span annotations.

A corpus is a list of :class:`AnnotatedComment`. Each comment is keyed by
``(document, comment_id)`` and carries a binary candy-speech flag plus zero
or more character-level spans. All character offsets count Unicode scalar
values (Python string indices), never bytes, and spans are half-open
``[start, end)`` intervals.

On disk a corpus is three TSV files:

* comments: ``document<TAB>comment_id<TAB>comment`` -- tabs, newlines,
  carriage returns and backslashes inside the text are escaped as ``\\t``,
  ``\\n``, ``\\r`` and ``\\\\`` so one row is always one line.
* labels: ``document<TAB>comment_id<TAB>flausch`` with flausch in {yes, no}.
* spans: ``document<TAB>comment_id<TAB>type<TAB>start<TAB>end`` where type
  is the candy type written with spaces (e.g. ``affection declaration``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import IO, Iterable, Sequence


class CandyType(Enum):
    """The ten candy-speech span types.

    Enum member names use underscores; ``value`` holds the spelling used in
    the spans TSV (spaces instead of underscores). Enumeration order is the
    canonical order used for label ids and tie-breaking.
    """

    positive_feedback = "positive feedback"
    compliment = "compliment"
    affection_declaration = "affection declaration"
    encouragement = "encouragement"
    gratitude = "gratitude"
    agreement = "agreement"
    ambiguous = "ambiguous"
    implicit = "implicit"
    group_membership = "group membership"
    sympathy = "sympathy"

    @classmethod
    def from_label(cls, label: str) -> "CandyType":
        """Parse a type from either spelling; raise ValueError if unknown."""
        normalized = label.strip()
        for member in cls:
            if normalized == member.value or normalized == member.name:
                return member
        raise ValueError(f"unknown candy type: {label!r}")

    @property
    def order(self) -> int:
        return _TYPE_ORDER[self]


_TYPE_ORDER = {member: i for i, member in enumerate(CandyType)}


@dataclass(frozen=True)
class Comment:
    """One comment: source document id, integer comment id, text."""

    document: str
    comment_id: int
    text: str

    @property
    def key(self) -> tuple[str, int]:
        return (self.document, self.comment_id)


@dataclass(frozen=True)
class SpanAnnotation:
    """One candy-speech span, half-open [start, end) in character offsets."""

    start: int
    end: int
    candy_type: CandyType

    @property
    def sort_key(self) -> tuple[int, int, int]:
        return (self.start, self.end, self.candy_type.order)

    @property
    def triplet(self) -> tuple[int, int, CandyType]:
        return (self.start, self.end, self.candy_type)

    def overlaps(self, other: "SpanAnnotation") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class AnnotatedComment:
    """A comment together with its binary label and sorted spans.

    ``replica`` is 0 for parsed comments; oversampling assigns positive
    ordinals to duplicated comments so (document, comment_id, replica)
    stays unique.
    """

    comment: Comment
    is_candy: bool
    spans: tuple[SpanAnnotation, ...]
    replica: int = 0

    @property
    def key(self) -> tuple[str, int]:
        return self.comment.key

    @property
    def full_key(self) -> tuple[str, int, int]:
        return (self.comment.document, self.comment.comment_id, self.replica)


Corpus = list[AnnotatedComment]


@dataclass(frozen=True)
class DedupReport:
    """Outcome of deduplication.

    ``removed_count`` counts removed comments; ``duplicate_group_count``
    counts text groups that were collapsed (both counts are exposed because
    duplicates can be tallied either way). ``retained_conflicts`` lists text
    groups whose members carry differing labels; those comments are never
    removed.
    """

    removed_count: int
    duplicate_group_count: int
    retained_conflicts: tuple[tuple[str, tuple[tuple[str, int], ...]], ...]

    @property
    def retained_conflict_comment_count(self) -> int:
        return sum(len(members) for _, members in self.retained_conflicts)


@dataclass(frozen=True)
class CorpusStats:
    """Aggregate corpus counters.

    Two span means are reported because the denominator (all comments vs
    candy comments only) is a modelling choice; pick whichever fits.
    """

    comment_count: int
    candy_comment_count: int
    span_count: int
    mean_spans_per_comment: Fraction
    mean_spans_per_candy_comment: Fraction
    overlapping_span_count: int
    overlapping_span_fraction: Fraction

    def to_record(self) -> dict:
        return {
            "comment_count": self.comment_count,
            "candy_comment_count": self.candy_comment_count,
            "span_count": self.span_count,
            "mean_spans_per_comment": float(self.mean_spans_per_comment),
            "mean_spans_per_candy_comment": float(self.mean_spans_per_candy_comment),
            "overlapping_span_count": self.overlapping_span_count,
            "overlapping_span_fraction": float(self.overlapping_span_fraction),
        }


@dataclass(frozen=True)
class Violation:
    """One invariant violation, as data (never raised)."""

    code: str
    document: str
    comment_id: int
    message: str

    def to_record(self) -> dict:
        return {
            "code": self.code,
            "document": self.document,
            "comment_id": self.comment_id,
            "message": self.message,
        }


class CorpusFormatError(ValueError):
    """A malformed input file; carries the file path and 1-based line number."""

    def __init__(self, path: str | Path, line: int | None, message: str):
        self.path = str(path)
        self.line = line
        location = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{location}: {message}")


# --- text escaping -----------------------------------------------------

_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def escape_text(text: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def unescape_text(raw: str) -> str:
    out: list[str] = []
    i = 0
    n = len(raw)
    while i < n:
        ch = raw[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= n:
            raise ValueError("dangling backslash at end of field")
        marker = raw[i + 1]
        if marker not in _UNESCAPES:
            raise ValueError(f"unknown escape sequence \\{marker}")
        out.append(_UNESCAPES[marker])
        i += 2
    return "".join(out)


# --- TSV parsing -------------------------------------------------------

_COMMENTS_HEADER = ["document", "comment_id", "comment"]
_LABELS_HEADER = ["document", "comment_id", "flausch"]
_SPANS_HEADER = ["document", "comment_id", "type", "start", "end"]


def _read_rows(path: str | Path, header: list[str]):
    """Yield (line_number, columns) for each data row, checking the header."""
    with open(path, encoding="utf-8") as handle:
        first = handle.readline()
        if first == "":
            raise CorpusFormatError(path, 1, "empty file, expected header row")
        if first.rstrip("\n").split("\t") != header:
            raise CorpusFormatError(
                path, 1, f"bad header, expected {chr(9).join(header)!r}"
            )
        for lineno, line in enumerate(handle, start=2):
            line = line.rstrip("\n")
            if line == "":
                continue
            columns = line.split("\t")
            if len(columns) != len(header):
                raise CorpusFormatError(
                    path,
                    lineno,
                    f"expected {len(header)} tab-separated columns, got {len(columns)}",
                )
            yield lineno, columns


def _parse_comment_id(path, lineno, raw: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise CorpusFormatError(path, lineno, f"comment_id is not an integer: {raw!r}")
    if value < 0:
        raise CorpusFormatError(path, lineno, f"comment_id must be non-negative: {value}")
    return value


def parse_corpus(
    comments_file: str | Path,
    labels_file: str | Path | None = None,
    spans_file: str | Path | None = None,
) -> Corpus:
    """Parse a corpus from its TSV files.

    Spans are joined onto comments by (document, comment_id) and sorted by
    (start, end, type order). When ``labels_file`` is omitted, ``is_candy``
    is derived as "has at least one span". Every format problem raises
    :class:`CorpusFormatError` naming the file and line.
    """
    comments: dict[tuple[str, int], Comment] = {}
    order: list[tuple[str, int]] = []
    for lineno, (document, raw_id, raw_text) in _read_rows(comments_file, _COMMENTS_HEADER):
        comment_id = _parse_comment_id(comments_file, lineno, raw_id)
        try:
            text = unescape_text(raw_text)
        except ValueError as exc:
            raise CorpusFormatError(comments_file, lineno, str(exc))
        if text == "":
            raise CorpusFormatError(comments_file, lineno, "comment text is empty")
        key = (document, comment_id)
        if key in comments:
            raise CorpusFormatError(
                comments_file, lineno, f"duplicate (document, comment_id): {key}"
            )
        comments[key] = Comment(document, comment_id, text)
        order.append(key)

    labels: dict[tuple[str, int], bool] = {}
    if labels_file is not None:
        for lineno, (document, raw_id, flausch) in _read_rows(labels_file, _LABELS_HEADER):
            comment_id = _parse_comment_id(labels_file, lineno, raw_id)
            key = (document, comment_id)
            if key not in comments:
                raise CorpusFormatError(
                    labels_file, lineno, f"label for unknown comment {key}"
                )
            if key in labels:
                raise CorpusFormatError(labels_file, lineno, f"duplicate label row for {key}")
            if flausch not in ("yes", "no"):
                raise CorpusFormatError(
                    labels_file, lineno, f"flausch must be 'yes' or 'no', got {flausch!r}"
                )
            labels[key] = flausch == "yes"
        missing = [key for key in order if key not in labels]
        if missing:
            raise CorpusFormatError(
                labels_file, None, f"missing label rows for {len(missing)} comments, first: {missing[0]}"
            )

    spans: dict[tuple[str, int], list[SpanAnnotation]] = {key: [] for key in order}
    if spans_file is not None:
        for lineno, (document, raw_id, type_label, raw_start, raw_end) in _read_rows(
            spans_file, _SPANS_HEADER
        ):
            comment_id = _parse_comment_id(spans_file, lineno, raw_id)
            key = (document, comment_id)
            if key not in comments:
                raise CorpusFormatError(spans_file, lineno, f"span for unknown comment {key}")
            try:
                candy_type = CandyType.from_label(type_label)
            except ValueError as exc:
                raise CorpusFormatError(spans_file, lineno, str(exc))
            try:
                start = int(raw_start)
                end = int(raw_end)
            except ValueError:
                raise CorpusFormatError(
                    spans_file, lineno, f"span offsets are not integers: {raw_start!r}, {raw_end!r}"
                )
            text_length = len(comments[key].text)
            if not (0 <= start < end <= text_length):
                raise CorpusFormatError(
                    spans_file,
                    lineno,
                    f"span [{start}, {end}) out of bounds for comment {key} "
                    f"of length {text_length}",
                )
            spans[key].append(SpanAnnotation(start, end, candy_type))

    corpus: Corpus = []
    for key in order:
        comment_spans = tuple(
            sorted(spans[key], key=lambda s: (s.start, s.end, s.candy_type.order))
        )
        if labels_file is not None:
            is_candy = labels[key]
        else:
            is_candy = bool(comment_spans)
        corpus.append(AnnotatedComment(comments[key], is_candy, comment_spans))
    return corpus


def read_spans_tsv(path: str | Path) -> dict[tuple[str, int], list[SpanAnnotation]]:
    """Read a spans TSV keyed by (document, comment_id), without text bounds.

    Used for scoring, where only the triplets matter; offsets are checked
    for 0 <= start < end but not against any comment text.
    """
    spans: dict[tuple[str, int], list[SpanAnnotation]] = {}
    for lineno, (document, raw_id, type_label, raw_start, raw_end) in _read_rows(
        path, _SPANS_HEADER
    ):
        comment_id = _parse_comment_id(path, lineno, raw_id)
        try:
            candy_type = CandyType.from_label(type_label)
        except ValueError as exc:
            raise CorpusFormatError(path, lineno, str(exc))
        try:
            start = int(raw_start)
            end = int(raw_end)
        except ValueError:
            raise CorpusFormatError(
                path, lineno, f"span offsets are not integers: {raw_start!r}, {raw_end!r}"
            )
        if start < 0 or start >= end:
            raise CorpusFormatError(path, lineno, f"bad span range [{start}, {end})")
        spans.setdefault((document, comment_id), []).append(
            SpanAnnotation(start, end, candy_type)
        )
    return spans


def read_labels_tsv(path: str | Path) -> dict[tuple[str, int], bool]:
    """Read a labels TSV into a (document, comment_id) -> is_candy mapping."""
    labels: dict[tuple[str, int], bool] = {}
    for lineno, (document, raw_id, flausch) in _read_rows(path, _LABELS_HEADER):
        comment_id = _parse_comment_id(path, lineno, raw_id)
        key = (document, comment_id)
        if key in labels:
            raise CorpusFormatError(path, lineno, f"duplicate label row for {key}")
        if flausch not in ("yes", "no"):
            raise CorpusFormatError(
                path, lineno, f"flausch must be 'yes' or 'no', got {flausch!r}"
            )
        labels[key] = flausch == "yes"
    return labels


# --- TSV writing -------------------------------------------------------

def _open_out(destination: str | Path | IO[str]):
    if hasattr(destination, "write"):
        return destination, False
    return open(destination, "w", encoding="utf-8", newline=""), True


def _write_rows(destination, header: list[str], rows: Iterable[list[str]]) -> None:
    handle, owned = _open_out(destination)
    try:
        handle.write("\t".join(header) + "\n")
        for row in rows:
            # the document id column is written verbatim, so it must not
            # contain the separators (text is covered by escaping)
            if any(ch in row[0] for ch in "\t\n\r"):
                raise ValueError(f"document id contains control characters: {row[0]!r}")
            handle.write("\t".join(row) + "\n")
    finally:
        if owned:
            handle.close()


def write_comments_tsv(corpus: Corpus, destination: str | Path | IO[str]) -> None:
    _write_rows(
        destination,
        _COMMENTS_HEADER,
        (
            [ac.comment.document, str(ac.comment.comment_id), escape_text(ac.comment.text)]
            for ac in corpus
        ),
    )


def write_labels_tsv(corpus: Corpus, destination: str | Path | IO[str]) -> None:
    _write_rows(
        destination,
        _LABELS_HEADER,
        (
            [ac.comment.document, str(ac.comment.comment_id), "yes" if ac.is_candy else "no"]
            for ac in corpus
        ),
    )


def write_spans_tsv(corpus: Corpus, destination: str | Path | IO[str]) -> None:
    def rows():
        for ac in corpus:
            for span in ac.spans:
                yield [
                    ac.comment.document,
                    str(ac.comment.comment_id),
                    span.candy_type.value,
                    str(span.start),
                    str(span.end),
                ]

    _write_rows(destination, _SPANS_HEADER, rows())


def write_corpus(
    corpus: Corpus,
    comments_file: str | Path,
    labels_file: str | Path,
    spans_file: str | Path,
) -> None:
    write_comments_tsv(corpus, comments_file)
    write_labels_tsv(corpus, labels_file)
    write_spans_tsv(corpus, spans_file)


def write_label_rows(
    rows: Iterable[tuple[str, int, bool]], destination: str | Path | IO[str]
) -> None:
    """Write (document, comment_id, is_candy) rows as a labels TSV."""
    _write_rows(
        destination,
        _LABELS_HEADER,
        ([document, str(comment_id), "yes" if candy else "no"] for document, comment_id, candy in rows),
    )


def write_span_rows(
    rows: Iterable[tuple[str, int, SpanAnnotation]], destination: str | Path | IO[str]
) -> None:
    """Write (document, comment_id, span) rows as a spans TSV."""
    _write_rows(
        destination,
        _SPANS_HEADER,
        (
            [document, str(comment_id), span.candy_type.value, str(span.start), str(span.end)]
            for document, comment_id, span in rows
        ),
    )


def write_violations(violations: Sequence[Violation], destination: str | Path | IO[str]) -> None:
    """Write violations as line-delimited JSON records."""
    handle, owned = _open_out(destination)
    try:
        for violation in violations:
            handle.write(json.dumps(violation.to_record(), ensure_ascii=False) + "\n")
    finally:
        if owned:
            handle.close()


# --- operations --------------------------------------------------------

def _label_signature(ac: AnnotatedComment) -> tuple:
    return (ac.is_candy, tuple(sorted(span.sort_key for span in ac.spans)))


def deduplicate(corpus: Corpus) -> tuple[Corpus, DedupReport]:
    """Collapse exact duplicates; retain all comments of conflicting groups.

    Comments sharing text *and* labels collapse to the member with the
    smallest (document, comment_id). If a text occurs with two or more
    distinct label sets, none of its comments are removed; the group is
    reported in ``retained_conflicts`` instead.
    """
    by_text: dict[str, list[AnnotatedComment]] = {}
    for ac in corpus:
        by_text.setdefault(ac.comment.text, []).append(ac)

    keep: set[tuple[str, int, int]] = set()
    removed = 0
    collapsed_groups = 0
    conflicts: list[tuple[str, tuple[tuple[str, int], ...]]] = []
    for text, group in by_text.items():
        if len(group) == 1:
            keep.add(group[0].full_key)
            continue
        signatures = {_label_signature(ac) for ac in group}
        if len(signatures) == 1:
            winner = min(group, key=lambda ac: ac.key)
            keep.add(winner.full_key)
            removed += len(group) - 1
            collapsed_groups += 1
        else:
            keep.update(ac.full_key for ac in group)
            conflicts.append((text, tuple(sorted(ac.key for ac in group))))

    deduped = [ac for ac in corpus if ac.full_key in keep]
    conflicts.sort(key=lambda item: item[1])
    report = DedupReport(
        removed_count=removed,
        duplicate_group_count=collapsed_groups,
        retained_conflicts=tuple(conflicts),
    )
    return deduped, report


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Count comments, spans and same-comment span overlaps.

    A span counts as overlapping when it shares at least one character
    position with another span of the same comment; each member of an
    overlapping pair is counted once.
    """
    comment_count = len(corpus)
    candy_count = sum(1 for ac in corpus if ac.is_candy)
    span_count = 0
    overlapping = 0
    for ac in corpus:
        spans = ac.spans
        span_count += len(spans)
        for i, span in enumerate(spans):
            if any(span.overlaps(other) for j, other in enumerate(spans) if j != i):
                overlapping += 1

    def ratio(numerator: int, denominator: int) -> Fraction:
        return Fraction(numerator, denominator) if denominator else Fraction(0)

    return CorpusStats(
        comment_count=comment_count,
        candy_comment_count=candy_count,
        span_count=span_count,
        mean_spans_per_comment=ratio(span_count, comment_count),
        mean_spans_per_candy_comment=ratio(span_count, candy_count),
        overlapping_span_count=overlapping,
        overlapping_span_fraction=ratio(overlapping, span_count),
    )


def validate(corpus: Corpus) -> list[Violation]:
    """Check every corpus invariant; return violations as data.

    Codes: DUPLICATE_KEY, NEGATIVE_COMMENT_ID, EMPTY_TEXT, EMPTY_SPAN,
    SPAN_OUT_OF_BOUNDS, UNSORTED_SPANS, LABEL_SPAN_MISMATCH.
    """
    violations: list[Violation] = []
    seen: set[tuple[str, int, int]] = set()
    for ac in corpus:
        document = ac.comment.document
        comment_id = ac.comment.comment_id

        def report(code: str, message: str) -> None:
            violations.append(Violation(code, document, comment_id, message))

        if ac.full_key in seen:
            report("DUPLICATE_KEY", f"(document, comment_id, replica) occurs twice: {ac.full_key}")
        seen.add(ac.full_key)
        if comment_id < 0:
            report("NEGATIVE_COMMENT_ID", f"comment_id is negative: {comment_id}")
        if ac.comment.text == "":
            report("EMPTY_TEXT", "comment text is empty")
        text_length = len(ac.comment.text)
        for span in ac.spans:
            if span.start >= span.end:
                report(
                    "EMPTY_SPAN",
                    f"span [{span.start}, {span.end}) has no characters",
                )
            if span.start < 0 or span.end > text_length:
                report(
                    "SPAN_OUT_OF_BOUNDS",
                    f"span [{span.start}, {span.end}) outside text of length {text_length}",
                )
        ordered = sorted(ac.spans, key=lambda s: (s.start, s.end))
        if list(ac.spans) != ordered:
            report("UNSORTED_SPANS", "spans are not sorted by (start, end)")
        if ac.is_candy != bool(ac.spans):
            label = "yes" if ac.is_candy else "no"
            report(
                "LABEL_SPAN_MISMATCH",
                f"is_candy={label} but comment has {len(ac.spans)} spans",
            )
    return violations


def replicate(ac: AnnotatedComment, replica: int) -> AnnotatedComment:
    """Copy a comment under a new replica ordinal (used by oversampling)."""
    return replace(ac, replica=replica)
