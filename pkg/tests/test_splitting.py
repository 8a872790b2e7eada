import io
import random
from collections import Counter

import pytest

from candyspan import (
    CandyType,
    InfeasibleSplitError,
    holdout_split,
    make_folds,
    oversample_binary,
    stratum_key,
    write_fold_tsv,
)
from candyspan.splitting import BINARY, FIRST_SPAN_TYPE, StratumKey

from conftest import TYPES, make_comment


def mixed_corpus(candy: int, plain: int, document="d"):
    corpus = []
    for i in range(candy):
        corpus.append(make_comment(document, i, f"nett {i}", [(0, 4, CandyType.compliment)]))
    for i in range(plain):
        corpus.append(make_comment(document, candy + i, f"meh {i}"))
    return corpus


def random_corpus(rng: random.Random, minimum=5, maximum=60):
    corpus = []
    for i in range(rng.randint(minimum, maximum)):
        if rng.random() < 0.4:
            spans = [
                (0, 3, rng.choice(TYPES))
                for _ in range(rng.randint(1, 3))
            ]
            corpus.append(make_comment("doc", i, "abcdef", spans))
        else:
            corpus.append(make_comment("doc", i, "abcdef"))
    return corpus


class TestStratumKey:
    def test_binary_no(self):
        assert stratum_key(make_comment("d", 1, "x"), BINARY) == StratumKey(BINARY, "no")

    def test_binary_yes(self):
        ac = make_comment("d", 1, "xxxx", [(0, 2, CandyType.gratitude)])
        assert stratum_key(ac, BINARY).value == "yes"

    def test_first_span_type_uses_smallest_start(self):
        ac = make_comment(
            "d",
            1,
            "x" * 25,
            [(10, 20, CandyType.gratitude), (0, 5, CandyType.compliment)],
        )
        assert stratum_key(ac, FIRST_SPAN_TYPE).value == "compliment"

    def test_first_span_type_without_spans_is_none(self):
        assert stratum_key(make_comment("d", 1, "x"), FIRST_SPAN_TYPE).value == "none"

    def test_none_value_rejected_in_binary_mode(self):
        with pytest.raises(ValueError):
            StratumKey(BINARY, "none")


class TestMakeFolds:
    def test_balanced_binary_example(self):
        corpus = mixed_corpus(candy=5, plain=5)
        folds = make_folds(corpus, k=5, mode=BINARY, seed=42)
        by_fold = Counter()
        candy_keys = {ac.key for ac in corpus if ac.is_candy}
        for key, fold in folds.assignment.items():
            by_fold[(fold, key in candy_keys)] += 1
        for fold in range(5):
            assert by_fold[(fold, True)] == 1
            assert by_fold[(fold, False)] == 1

    def test_k_larger_than_corpus(self):
        with pytest.raises(InfeasibleSplitError):
            make_folds([make_comment("d", 1, "x")], k=2, mode=BINARY, seed=0)

    def test_k_below_two(self):
        with pytest.raises(InfeasibleSplitError):
            make_folds(mixed_corpus(2, 2), k=1, mode=BINARY, seed=0)

    def test_deterministic(self):
        corpus = mixed_corpus(7, 9)
        first = make_folds(corpus, k=3, mode=BINARY, seed=99)
        second = make_folds(corpus, k=3, mode=BINARY, seed=99)
        assert first == second

    def test_input_order_invariance(self):
        corpus = mixed_corpus(7, 9)
        shuffled = list(corpus)
        random.Random(5).shuffle(shuffled)
        assert (
            make_folds(corpus, 4, BINARY, 7).assignment
            == make_folds(shuffled, 4, BINARY, 7).assignment
        )

    def test_every_comment_assigned_once(self):
        corpus = mixed_corpus(11, 13)
        folds = make_folds(corpus, k=5, mode=BINARY, seed=1)
        assert set(folds.assignment) == {ac.key for ac in corpus}

    def test_per_stratum_balance_random(self):
        rng = random.Random(23)
        for _ in range(50):
            corpus = random_corpus(rng)
            mode = rng.choice([BINARY, FIRST_SPAN_TYPE])
            folds = make_folds(corpus, k=5, mode=mode, seed=rng.randrange(2**32))
            per_stratum = {}
            for ac in corpus:
                value = stratum_key(ac, mode).value
                per_stratum.setdefault(value, Counter())[folds.assignment[ac.key]] += 1
            for counts in per_stratum.values():
                filled = [counts[f] for f in range(5)]
                assert max(filled) - min(filled) <= 1

    def test_duplicate_keys_rejected(self):
        ac = make_comment("d", 1, "x")
        with pytest.raises(InfeasibleSplitError, match="unique"):
            make_folds([ac, ac], k=2, mode=BINARY, seed=0)

    def test_fold_tsv_is_sorted_and_stable(self):
        corpus = mixed_corpus(4, 4)
        folds = make_folds(corpus, k=2, mode=BINARY, seed=3)
        first, second = io.StringIO(), io.StringIO()
        write_fold_tsv(folds, first)
        write_fold_tsv(folds, second)
        assert first.getvalue() == second.getvalue()
        lines = first.getvalue().splitlines()
        assert lines[0] == "document\tcomment_id\tfold"
        assert lines[1:] == sorted(lines[1:], key=lambda l: (l.split("\t")[0], int(l.split("\t")[1])))


class TestHoldoutSplit:
    def test_ninety_ten(self):
        corpus = mixed_corpus(50, 50)
        train, holdout = holdout_split(corpus, 0.1, BINARY, seed=42)
        assert len(train) == 90
        assert len(holdout) == 10

    def test_two_singleton_strata_split_one_one(self):
        corpus = [
            make_comment("d", 1, "nett", [(0, 4, CandyType.compliment)]),
            make_comment("d", 2, "meh"),
        ]
        train, holdout = holdout_split(corpus, 0.5, BINARY, seed=0)
        assert len(train) == 1 and len(holdout) == 1

    def test_partition_property(self):
        rng = random.Random(17)
        for _ in range(1000):
            corpus = random_corpus(rng, minimum=2, maximum=40)
            fraction = rng.choice([0.1, 0.2, 0.3, 0.5])
            if round(fraction * len(corpus)) in (0, len(corpus)):
                continue
            mode = rng.choice([BINARY, FIRST_SPAN_TYPE])
            train, holdout = holdout_split(corpus, fraction, mode, seed=rng.randrange(2**32))
            train_keys = {ac.key for ac in train}
            holdout_keys = {ac.key for ac in holdout}
            assert train_keys | holdout_keys == {ac.key for ac in corpus}
            assert not train_keys & holdout_keys
            assert train and holdout

    def test_stratum_with_two_members_keeps_one_in_train(self):
        rng = random.Random(3)
        for _ in range(100):
            corpus = random_corpus(rng, minimum=4, maximum=30)
            if round(0.5 * len(corpus)) in (0, len(corpus)):
                continue
            train, _ = holdout_split(corpus, 0.5, BINARY, seed=rng.randrange(2**32))
            train_strata = Counter(stratum_key(ac, BINARY).value for ac in train)
            corpus_strata = Counter(stratum_key(ac, BINARY).value for ac in corpus)
            for value, size in corpus_strata.items():
                if size >= 2:
                    assert train_strata[value] >= 1

    def test_infeasible_fraction(self):
        with pytest.raises(InfeasibleSplitError):
            holdout_split(mixed_corpus(5, 5), 0.001, BINARY, seed=0)

    def test_fraction_bounds(self):
        with pytest.raises(InfeasibleSplitError):
            holdout_split(mixed_corpus(5, 5), 1.5, BINARY, seed=0)

    def test_deterministic_and_order_invariant(self):
        corpus = mixed_corpus(20, 30)
        shuffled = list(corpus)
        random.Random(9).shuffle(shuffled)
        holdout_a = {ac.key for ac in holdout_split(corpus, 0.2, BINARY, 5)[1]}
        holdout_b = {ac.key for ac in holdout_split(shuffled, 0.2, BINARY, 5)[1]}
        assert holdout_a == holdout_b


class TestOversample:
    def test_already_balanced_unchanged(self):
        corpus = mixed_corpus(3, 3)
        assert oversample_binary(corpus, seed=0) == corpus

    def test_two_to_six(self):
        corpus = mixed_corpus(2, 6)
        result = oversample_binary(corpus, seed=42)
        assert len(result) == 12
        candy = [ac for ac in result if ac.is_candy]
        plain = [ac for ac in result if not ac.is_candy]
        assert len(candy) == len(plain) == 6
        originals = {ac.key for ac in corpus if ac.is_candy}
        replicas = [ac for ac in result if ac.replica > 0]
        assert len(replicas) == 4
        assert all(ac.key in originals for ac in replicas)

    def test_replica_keys_unique(self):
        result = oversample_binary(mixed_corpus(2, 9), seed=7)
        full_keys = [ac.full_key for ac in result]
        assert len(full_keys) == len(set(full_keys))

    def test_deterministic(self):
        corpus = mixed_corpus(3, 10)
        assert oversample_binary(corpus, seed=11) == oversample_binary(corpus, seed=11)

    def test_never_alters_existing_comments(self):
        corpus = mixed_corpus(2, 8)
        result = oversample_binary(corpus, seed=1)
        assert result[: len(corpus)] == corpus
        for ac in result[len(corpus):]:
            source = next(c for c in corpus if c.key == ac.key)
            assert ac.comment == source.comment
            assert ac.spans == source.spans

    def test_majority_candy_returned_unchanged(self):
        corpus = mixed_corpus(6, 2)
        assert oversample_binary(corpus, seed=0) == corpus

    def test_missing_class_rejected(self):
        with pytest.raises(ValueError, match="class"):
            oversample_binary(mixed_corpus(0, 4), seed=0)
        with pytest.raises(ValueError, match="class"):
            oversample_binary(mixed_corpus(4, 0), seed=0)
