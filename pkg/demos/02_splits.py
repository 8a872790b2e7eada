"""Stratified folds, early-stopping holdouts and 1:1 oversampling.

All three operations are deterministic functions of (corpus, seed): their
randomness comes from a Philox counter-based generator keyed per stratum,
so re-runs and re-ordered inputs give identical assignments.
Run with: python demos/02_splits.py
"""

from collections import Counter

from candyspan import (
    AnnotatedComment,
    CandyType,
    Comment,
    SpanAnnotation,
    holdout_split,
    make_folds,
    oversample_binary,
    stratum_key,
)


def comment(i: int, candy: bool) -> AnnotatedComment:
    spans = (SpanAnnotation(0, 4, CandyType.compliment),) if candy else ()
    return AnnotatedComment(Comment("vid", i, "toll gemacht"), candy, spans)


def main():
    # 12 candy comments vs 28 without: a 30/70 class balance
    corpus = [comment(i, candy=i < 12) for i in range(40)]

    folds = make_folds(corpus, k=5, mode="binary", seed=42)
    print("5-fold assignment, stratified by the binary label:")
    table = Counter()
    for ac in corpus:
        table[(folds.assignment[ac.key], stratum_key(ac, "binary").value)] += 1
    for fold in range(5):
        print(f"  fold {fold}: candy={table[(fold, 'yes')]}  non-candy={table[(fold, 'no')]}")

    train, holdout = holdout_split(corpus, fraction=0.10, mode="binary", seed=42)
    print(f"\n10% holdout: {len(train)} train / {len(holdout)} holdout")
    print("  holdout strata:", Counter(stratum_key(ac, "binary").value for ac in holdout))

    balanced = oversample_binary(train, seed=42)
    before = Counter("candy" if ac.is_candy else "plain" for ac in train)
    after = Counter("candy" if ac.is_candy else "plain" for ac in balanced)
    print(f"\noversampling the training portion: {dict(before)} -> {dict(after)}")
    replicas = [ac for ac in balanced if ac.replica > 0]
    print(f"  {len(replicas)} replicas, e.g. {replicas[0].full_key} copies {replicas[0].key}")

    again = oversample_binary(train, seed=42)
    print(f"  deterministic: {balanced == again}")


if __name__ == "__main__":
    main()
