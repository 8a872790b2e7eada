"""Strict span-level and binary comment-level scoring.

Strict scoring treats a predicted span as correct only when its
(start, end, type) triplet equals a gold triplet of the same comment.
Duplicate identical triplets within one comment collapse to one, so a
predictor cannot inflate true positives by repetition. Aggregation is
micro (global counts); per-type counts are also reported.

Precision, recall and F1 are exact :class:`~fractions.Fraction` values,
defined as 0 when their denominator is 0. Rendering to text always uses
four decimal places with round-half-even.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import IO, Iterable, Mapping, Sequence

from .corpus import CandyType, SpanAnnotation

logger = logging.getLogger(__name__)

Key = tuple[str, int]

_ZERO = Fraction(0)


class KeyMismatchError(ValueError):
    """Gold and predicted label files do not cover the same comments."""


@dataclass(frozen=True)
class ClassCounts:
    """Counts and derived metrics for one class (or the micro total)."""

    true_positives: int
    false_positives: int
    false_negatives: int
    precision: Fraction
    recall: Fraction
    f1: Fraction

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "ClassCounts":
        precision = Fraction(tp, tp + fp) if tp + fp else _ZERO
        recall = Fraction(tp, tp + fn) if tp + fn else _ZERO
        if precision + recall:
            f1 = 2 * precision * recall / (precision + recall)
        else:
            f1 = _ZERO
        return cls(tp, fp, fn, precision, recall, f1)


@dataclass(frozen=True)
class EvalReport:
    """Micro-aggregated counts plus a per-type breakdown (empty for binary)."""

    overall: ClassCounts
    per_type: Mapping[CandyType, ClassCounts]

    @property
    def f1(self) -> Fraction:
        return self.overall.f1

    @property
    def precision(self) -> Fraction:
        return self.overall.precision

    @property
    def recall(self) -> Fraction:
        return self.overall.recall


def format_metric(value: Fraction) -> str:
    """Render an exact rational to 4 decimal places, round-half-even."""
    with localcontext() as context:
        context.prec = 40
        quotient = Decimal(value.numerator) / Decimal(value.denominator)
        return str(quotient.quantize(Decimal("0.0001"), rounding=ROUND_HALF_EVEN))


def _triplet_sets(
    spans_by_key: Mapping[Key, Iterable[SpanAnnotation]],
) -> dict[Key, frozenset[tuple[int, int, CandyType]]]:
    return {
        key: frozenset(span.triplet for span in spans)
        for key, spans in spans_by_key.items()
    }


def strict_span_f1(
    gold: Mapping[Key, Iterable[SpanAnnotation]],
    pred: Mapping[Key, Iterable[SpanAnnotation]],
) -> EvalReport:
    """Score predicted spans against gold spans with strict triplet equality.

    Predictions for comments absent from ``gold`` count as false positives
    and are reported once via a logging warning.
    """
    gold_sets = _triplet_sets(gold)
    pred_sets = _triplet_sets(pred)

    unknown = sorted(set(pred_sets) - set(gold_sets))
    if unknown:
        logger.warning(
            "%d predicted comments are not in the gold corpus (first: %s); "
            "their spans count as false positives",
            len(unknown),
            unknown[0],
        )

    tp: dict[CandyType, int] = {t: 0 for t in CandyType}
    fp: dict[CandyType, int] = {t: 0 for t in CandyType}
    fn: dict[CandyType, int] = {t: 0 for t in CandyType}
    for key in set(gold_sets) | set(pred_sets):
        gold_set = gold_sets.get(key, frozenset())
        pred_set = pred_sets.get(key, frozenset())
        for _, _, candy_type in gold_set & pred_set:
            tp[candy_type] += 1
        for _, _, candy_type in pred_set - gold_set:
            fp[candy_type] += 1
        for _, _, candy_type in gold_set - pred_set:
            fn[candy_type] += 1

    per_type = {t: ClassCounts.from_counts(tp[t], fp[t], fn[t]) for t in CandyType}
    overall = ClassCounts.from_counts(
        sum(tp.values()), sum(fp.values()), sum(fn.values())
    )
    return EvalReport(overall=overall, per_type=per_type)


def positive_f1(
    gold: Mapping[Key, bool], pred: Mapping[Key, bool]
) -> EvalReport:
    """Binary precision/recall/F1 with candy (True) as the positive class.

    Both mappings must cover exactly the same comments; a missing or extra
    prediction raises :class:`KeyMismatchError`.
    """
    missing = sorted(set(gold) - set(pred))
    extra = sorted(set(pred) - set(gold))
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"{len(missing)} comments lack predictions (first: {missing[0]})")
        if extra:
            parts.append(f"{len(extra)} predictions have no gold label (first: {extra[0]})")
        raise KeyMismatchError("; ".join(parts))

    tp = fp = fn = 0
    for key, gold_label in gold.items():
        pred_label = pred[key]
        if pred_label and gold_label:
            tp += 1
        elif pred_label and not gold_label:
            fp += 1
        elif not pred_label and gold_label:
            fn += 1
    return EvalReport(overall=ClassCounts.from_counts(tp, fp, fn), per_type={})


def derive_binary(
    pred_spans: Mapping[Key, Iterable[SpanAnnotation]],
    all_keys: Sequence[Key],
) -> dict[Key, bool]:
    """Label a comment candy iff it has at least one predicted span."""
    known = set(all_keys)
    unknown = sorted(set(pred_spans) - known)
    if unknown:
        logger.warning(
            "%d predicted comments are outside the key universe (first: %s); ignored",
            len(unknown),
            unknown[0],
        )
    non_empty = {key for key, spans in pred_spans.items() if any(True for _ in spans)}
    return {key: key in non_empty for key in all_keys}


# --- report output -------------------------------------------------------

def _record(scope: str, counts: ClassCounts) -> dict:
    return {
        "scope": scope,
        "true_positives": counts.true_positives,
        "false_positives": counts.false_positives,
        "false_negatives": counts.false_negatives,
        "precision": format_metric(counts.precision),
        "recall": format_metric(counts.recall),
        "f1": format_metric(counts.f1),
    }


def report_records(report: EvalReport) -> list[dict]:
    """One structured record per scope: 'overall' first, then each type."""
    records = [_record("overall", report.overall)]
    for candy_type, counts in report.per_type.items():
        records.append(_record(candy_type.name, counts))
    return records


def write_report_records(report: EvalReport, destination: IO[str]) -> None:
    for record in report_records(report):
        destination.write(json.dumps(record, ensure_ascii=False) + "\n")


def render_table(report: EvalReport) -> str:
    """Human-readable fixed-width table of the report."""
    rows = report_records(report)
    headers = ["scope", "TP", "FP", "FN", "precision", "recall", "f1"]
    cells = [
        [
            row["scope"],
            str(row["true_positives"]),
            str(row["false_positives"]),
            str(row["false_negatives"]),
            row["precision"],
            row["recall"],
            row["f1"],
        ]
        for row in rows
    ]
    widths = [
        max(len(headers[column]), *(len(row[column]) for row in cells))
        for column in range(len(headers))
    ]
    lines = [
        "  ".join(headers[i].ljust(widths[i]) for i in range(len(headers))).rstrip(),
        "  ".join("-" * widths[i] for i in range(len(headers))),
    ]
    for row in cells:
        lines.append(
            "  ".join(
                row[i].ljust(widths[i]) if i == 0 else row[i].rjust(widths[i])
                for i in range(len(headers))
            ).rstrip()
        )
    return "\n".join(lines)
