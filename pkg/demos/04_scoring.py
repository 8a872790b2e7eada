"""Strict span scoring, binary scoring and span-to-binary derivation.

Also shows the equivalent shell pipeline built from the candyspan CLI.
Run with: python demos/04_scoring.py
"""

from candyspan import (
    CandyType,
    SpanAnnotation,
    derive_binary,
    positive_f1,
    render_table,
    strict_span_f1,
)


def main():
    gold = {
        ("vid-1", 1): [
            SpanAnnotation(0, 15, CandyType.gratitude),
            SpanAnnotation(20, 28, CandyType.compliment),
        ],
        ("vid-1", 2): [],
        ("vid-2", 1): [SpanAnnotation(3, 9, CandyType.encouragement)],
    }
    pred = {
        ("vid-1", 1): [
            SpanAnnotation(0, 15, CandyType.gratitude),     # exact match
            SpanAnnotation(20, 29, CandyType.compliment),   # off by one: no credit
        ],
        ("vid-2", 1): [SpanAnnotation(3, 9, CandyType.gratitude)],  # wrong type
    }

    report = strict_span_f1(gold, pred)
    print("strict span scoring (exact start, end and type):\n")
    print(render_table(report))

    # a comment is candy as soon as any span of any type was predicted
    keys = list(gold)
    derived = derive_binary(pred, keys)
    print("\nderived binary labels:", {k: ("yes" if v else "no") for k, v in derived.items()})

    gold_binary = {key: bool(spans) for key, spans in gold.items()}
    binary_report = positive_f1(gold_binary, derived)
    print(f"positive F1 of the derived labels: {binary_report.f1} "
          f"(= {float(binary_report.f1):.4f})")

    print(
        "\nthe same pipeline as shell commands:\n"
        "  candyspan encode --comments c.tsv --spans gold.tsv --tokens tok.jsonl --out train.jsonl\n"
        "  candyspan decode --pred model_output.jsonl --mode basic --out pred.tsv\n"
        "  candyspan score-spans --gold gold.tsv --pred pred.tsv\n"
        "  candyspan derive-binary --pred pred.tsv --comments c.tsv --out pred_labels.tsv\n"
        "  candyspan score-binary --gold labels.tsv --pred pred_labels.tsv"
    )


if __name__ == "__main__":
    main()
