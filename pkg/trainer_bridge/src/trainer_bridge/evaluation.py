"""The bridge's own span decoding and strict F1.

Kept deliberately independent of the toolkit's implementation: the
acceptance check compares this internal evaluation against the toolkit's
scorer on the same emitted files, so the two must not share code.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import Mapping, Sequence

Span = tuple[int, int, str]  # (start, end, type name)


def decode_spans(
    tokens: Sequence[tuple[int, int, bool]], tag_names: Sequence[str]
) -> list[Span]:
    """Basic BIO parsing: B plus same-type I runs; stray I tags are dropped."""
    spans: list[Span] = []
    run_type: str | None = None
    run_first = run_last = -1
    for i, name in enumerate(tag_names):
        kind, _, candy_type = name.partition("-")
        continues = kind == "I" and run_type == candy_type
        if continues:
            run_last = i
            continue
        if run_type is not None:
            spans.append((tokens[run_first][0], tokens[run_last][1], run_type))
            run_type = None
        if kind == "B":
            run_type = candy_type
            run_first = run_last = i
    if run_type is not None:
        spans.append((tokens[run_first][0], tokens[run_last][1], run_type))
    return spans


@dataclass(frozen=True)
class StrictScore:
    true_positives: int
    false_positives: int
    false_negatives: int

    @property
    def precision(self) -> Fraction:
        total = self.true_positives + self.false_positives
        return Fraction(self.true_positives, total) if total else Fraction(0)

    @property
    def recall(self) -> Fraction:
        total = self.true_positives + self.false_negatives
        return Fraction(self.true_positives, total) if total else Fraction(0)

    @property
    def f1(self) -> Fraction:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else Fraction(0)


def strict_score(
    gold: Mapping[tuple[str, int], Sequence[Span]],
    pred: Mapping[tuple[str, int], Sequence[Span]],
) -> StrictScore:
    """Micro strict F1 over (comment key, start, end, type) tuples."""
    gold_items = {
        (key, *span) for key, spans in gold.items() for span in set(spans)
    }
    pred_items = {
        (key, *span) for key, spans in pred.items() for span in set(spans)
    }
    return StrictScore(
        true_positives=len(gold_items & pred_items),
        false_positives=len(pred_items - gold_items),
        false_negatives=len(gold_items - pred_items),
    )


def four_places(value: Fraction) -> str:
    """Render to 4 decimals, round-half-even (matches the toolkit's reports)."""
    with localcontext() as context:
        context.prec = 40
        quotient = Decimal(value.numerator) / Decimal(value.denominator)
        return str(quotient.quantize(Decimal("0.0001"), rounding=ROUND_HALF_EVEN))
