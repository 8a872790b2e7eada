import io
import random

import pytest

from candyspan import (
    BioTag,
    CandyType,
    InterchangeFormatError,
    SpanAnnotation,
    TaggedSequence,
    TokenOffset,
    decode_basic,
    decode_extended,
    encode_bio,
    label_registry,
    read_interchange,
    tag_id,
    tag_name,
    write_interchange,
)
from candyspan.biocodec import validate_tokens

from conftest import TYPES, whitespace_tokens


def seq(tokens, tag_names, document="d", comment_id=1):
    return TaggedSequence(
        document,
        comment_id,
        tuple(tokens),
        tuple(BioTag.parse(name) for name in tag_names),
    )


def triplets(spans):
    return [(s.start, s.end, s.candy_type) for s in spans]


class TestLabelRegistry:
    def test_o_is_id_zero(self):
        assert label_registry()[0] == "O"
        assert tag_name(0) == "O"

    def test_first_type_pair(self):
        assert tag_name(1) == "B-positive_feedback"
        assert tag_name(2) == "I-positive_feedback"

    def test_size_is_21(self):
        assert len(label_registry()) == 21

    def test_bijection(self):
        for i, name in enumerate(label_registry()):
            assert tag_id(name) == i
            assert tag_name(i) == name

    def test_exactly_21_distinct_tags(self):
        assert len({BioTag.parse(name) for name in label_registry()}) == 21

    def test_unknown_names_rejected(self):
        for name in ["B-sarcasm", "X-compliment", "B", "", "o", "B-positive feedback"]:
            with pytest.raises(ValueError):
                BioTag.parse(name)

    def test_tag_id_unknown(self):
        with pytest.raises(ValueError):
            tag_id("B-nope")
        with pytest.raises(ValueError):
            tag_name(21)


class TestTokenValidation:
    def test_first_token_must_not_continue(self):
        with pytest.raises(ValueError, match="continuation"):
            validate_tokens([TokenOffset(0, 0, 3, True)])

    def test_overlapping_tokens_rejected(self):
        with pytest.raises(ValueError):
            validate_tokens([TokenOffset(0, 0, 4), TokenOffset(1, 3, 6)])

    def test_empty_token_rejected(self):
        with pytest.raises(ValueError):
            validate_tokens([TokenOffset(0, 2, 2)])

    def test_bad_index_rejected(self):
        with pytest.raises(ValueError):
            validate_tokens([TokenOffset(1, 0, 2)])


class TestEncode:
    def test_no_spans_all_outside(self):
        text = "alles ganz normal"
        result = encode_bio(text, [], whitespace_tokens(text))
        assert result.tagged.tag_names() == ("O", "O", "O")
        assert result.dropped_spans == ()

    def test_whole_text_gratitude_span(self):
        text = "Danke dafür! :)"
        result = encode_bio(
            text, [SpanAnnotation(0, 15, CandyType.gratitude)], whitespace_tokens(text)
        )
        assert result.tagged.tag_names() == ("B-gratitude", "I-gratitude", "I-gratitude")

    def test_overlapping_spans_split_between_tokens(self):
        spans = [
            SpanAnnotation(0, 5, CandyType.compliment),
            SpanAnnotation(3, 8, CandyType.gratitude),
        ]
        tokens = [TokenOffset(0, 0, 3), TokenOffset(1, 4, 8)]
        result = encode_bio("x" * 8, spans, tokens)
        assert result.tagged.tag_names() == ("B-compliment", "B-gratitude")
        assert result.dropped_spans == ()

    def test_overlapping_spans_on_single_token_drop_loser(self):
        spans = [
            SpanAnnotation(0, 5, CandyType.compliment),
            SpanAnnotation(3, 8, CandyType.gratitude),
        ]
        result = encode_bio("x" * 8, spans, [TokenOffset(0, 0, 8)])
        assert result.tagged.tag_names() == ("B-compliment",)
        assert result.dropped_spans == (1,)

    def test_span_without_any_token_is_dropped(self):
        text = "ab  cd"
        tokens = [TokenOffset(0, 0, 2), TokenOffset(1, 4, 6)]
        result = encode_bio(text, [SpanAnnotation(2, 4, CandyType.implicit)], tokens)
        assert result.tagged.tag_names() == ("O", "O")
        assert result.dropped_spans == (0,)

    def test_token_beyond_text_rejected(self):
        with pytest.raises(ValueError, match="beyond"):
            encode_bio("abc", [], [TokenOffset(0, 0, 9)])

    def test_span_beyond_text_rejected(self):
        with pytest.raises(ValueError, match="out of bounds"):
            encode_bio("abc", [SpanAnnotation(0, 9, CandyType.compliment)], [TokenOffset(0, 0, 3)])

    def test_document_and_comment_id_pass_through(self):
        result = encode_bio("ab", [], [TokenOffset(0, 0, 2)], document="vid", comment_id=7)
        assert result.tagged.key == ("vid", 7)


class TestDecodeBasic:
    def test_all_outside(self):
        tokens = [TokenOffset(0, 0, 2), TokenOffset(1, 3, 5), TokenOffset(2, 6, 8)]
        assert decode_basic(seq(tokens, ["O", "O", "O"])) == []

    def test_two_runs(self):
        tokens = [
            TokenOffset(0, 0, 2),
            TokenOffset(1, 3, 7),
            TokenOffset(2, 8, 9),
            TokenOffset(3, 10, 16),
        ]
        tagged = seq(tokens, ["B-compliment", "I-compliment", "O", "B-gratitude"])
        assert triplets(decode_basic(tagged)) == [
            (0, 7, CandyType.compliment),
            (10, 16, CandyType.gratitude),
        ]

    def test_orphan_inside_tags_discarded(self):
        tokens = [TokenOffset(0, 0, 2), TokenOffset(1, 3, 5)]
        assert decode_basic(seq(tokens, ["I-compliment", "I-compliment"])) == []

    def test_type_mismatched_inside_tag_discarded(self):
        tokens = [TokenOffset(0, 0, 2), TokenOffset(1, 3, 5), TokenOffset(2, 6, 9)]
        tagged = seq(tokens, ["B-compliment", "I-gratitude", "I-compliment"])
        # the mismatched I ends the run; the trailing I is then orphaned
        assert triplets(decode_basic(tagged)) == [(0, 2, CandyType.compliment)]

    def test_adjacent_b_tags_open_new_spans(self):
        tokens = [TokenOffset(0, 0, 2), TokenOffset(1, 3, 5)]
        tagged = seq(tokens, ["B-compliment", "B-compliment"])
        assert triplets(decode_basic(tagged)) == [
            (0, 2, CandyType.compliment),
            (3, 5, CandyType.compliment),
        ]

    def test_output_sorted_and_disjoint(self):
        rng = random.Random(13)
        registry = label_registry()
        for _ in range(200):
            tokens = []
            position = 0
            for index in range(rng.randint(1, 12)):
                length = rng.randint(1, 4)
                tokens.append(TokenOffset(index, position, position + length))
                position += length + rng.randint(0, 2)
            tags = [rng.choice(registry) for _ in tokens]
            spans = decode_basic(seq(tokens, tags))
            for earlier, later in zip(spans, spans[1:]):
                assert (earlier.start, earlier.end) <= (later.start, later.end)
                assert earlier.end <= later.start

    def test_span_type_matches_opening_b(self):
        tokens = [TokenOffset(0, 0, 2), TokenOffset(1, 3, 5)]
        tagged = seq(tokens, ["B-sympathy", "I-sympathy"])
        (span,) = decode_basic(tagged)
        assert span.candy_type is CandyType.sympathy


class TestDecodeExtended:
    def test_no_continuations_identical_to_basic(self):
        tokens = [
            TokenOffset(0, 0, 2),
            TokenOffset(1, 3, 7),
            TokenOffset(2, 8, 9),
            TokenOffset(3, 10, 16),
        ]
        tagged = seq(tokens, ["B-compliment", "I-compliment", "O", "B-gratitude"])
        assert decode_extended(tagged) == decode_basic(tagged)

    def test_mid_word_b_does_not_open_a_new_span(self):
        tokens = [TokenOffset(0, 0, 4), TokenOffset(1, 4, 6, True)]
        tagged = seq(tokens, ["B-compliment", "B-compliment"])
        assert triplets(decode_extended(tagged)) == [(0, 6, CandyType.compliment)]

    def test_untagged_continuation_absorbed_at_span_end(self):
        tokens = [
            TokenOffset(0, 0, 5),
            TokenOffset(1, 6, 11),
            TokenOffset(2, 11, 13, True),
        ]
        tagged = seq(tokens, ["B-compliment", "I-compliment", "O"])
        assert triplets(decode_extended(tagged)) == [(0, 13, CandyType.compliment)]

    def test_mid_word_b_of_other_type_absorbed(self):
        tokens = [TokenOffset(0, 0, 4), TokenOffset(1, 4, 6, True)]
        tagged = seq(tokens, ["B-compliment", "B-gratitude"])
        assert triplets(decode_extended(tagged)) == [(0, 6, CandyType.compliment)]

    def test_span_starting_mid_word_widens_to_word_start(self):
        tokens = [TokenOffset(0, 0, 5), TokenOffset(1, 5, 9, True)]
        tagged = seq(tokens, ["O", "B-gratitude"])
        assert triplets(decode_extended(tagged)) == [(0, 9, CandyType.gratitude)]

    def test_multi_piece_word_fully_absorbed(self):
        tokens = [
            TokenOffset(0, 0, 3),
            TokenOffset(1, 3, 5, True),
            TokenOffset(2, 5, 8, True),
            TokenOffset(3, 9, 12),
        ]
        tagged = seq(tokens, ["B-agreement", "O", "B-implicit", "O"])
        assert triplets(decode_extended(tagged)) == [(0, 8, CandyType.agreement)]

    def test_orphan_inside_still_discarded(self):
        tokens = [TokenOffset(0, 0, 3), TokenOffset(1, 3, 5, True)]
        tagged = seq(tokens, ["O", "I-compliment"])
        assert decode_extended(tagged) == []

    def test_word_continuation_with_matching_inside_tag(self):
        tokens = [TokenOffset(0, 0, 3), TokenOffset(1, 3, 6, True)]
        tagged = seq(tokens, ["B-compliment", "I-compliment"])
        assert triplets(decode_extended(tagged)) == [(0, 6, CandyType.compliment)]


class TestRoundTrip:
    def test_word_aligned_spans_round_trip(self):
        text = "Die Tipps in dem Video sind echt hilfreich."
        tokens = whitespace_tokens(text)
        spans = [SpanAnnotation(0, len(text), CandyType.positive_feedback)]
        result = encode_bio(text, spans, tokens)
        assert triplets(decode_basic(result.tagged)) == triplets(spans)

    def test_two_adjacent_same_type_spans_stay_separate(self):
        text = "toll toll"
        tokens = whitespace_tokens(text)
        spans = [
            SpanAnnotation(0, 4, CandyType.compliment),
            SpanAnnotation(5, 9, CandyType.compliment),
        ]
        result = encode_bio(text, spans, tokens)
        assert result.tagged.tag_names() == ("B-compliment", "B-compliment")
        assert triplets(decode_basic(result.tagged)) == triplets(spans)


class TestInterchange:
    def make_sequences(self):
        return [
            seq(
                [TokenOffset(0, 0, 5), TokenOffset(1, 5, 7, True), TokenOffset(2, 8, 10)],
                ["B-compliment", "I-compliment", "O"],
                document="vid-1",
                comment_id=3,
            ),
            seq([TokenOffset(0, 0, 4)], ["O"], document="vid-2", comment_id=0),
        ]

    def test_write_read_round_trip(self, tmp_path):
        path = tmp_path / "preds.jsonl"
        sequences = self.make_sequences()
        write_interchange(sequences, path)
        assert read_interchange(path) == sequences

    def test_unknown_tag_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(
            '{"document":"d","comment_id":1,"tokens":[[0,2,false]],"tags":["B-nope"]}\n'
        )
        with pytest.raises(InterchangeFormatError, match="unknown tag"):
            read_interchange(path)

    def test_length_mismatch_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(
            '{"document":"d","comment_id":1,"tokens":[[0,2,false]],"tags":["O","O"]}\n'
        )
        with pytest.raises(InterchangeFormatError, match="tags for"):
            read_interchange(path)

    def test_bad_token_shape_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"document":"d","comment_id":1,"tokens":[[0,2]],"tags":["O"]}\n')
        with pytest.raises(InterchangeFormatError):
            read_interchange(path)

    def test_first_token_continuation_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"document":"d","comment_id":1,"tokens":[[0,2,true]],"tags":["O"]}\n')
        with pytest.raises(InterchangeFormatError, match="continuation"):
            read_interchange(path)

    def test_missing_tags_require_flag(self, tmp_path):
        path = tmp_path / "tokens.jsonl"
        path.write_text('{"document":"d","comment_id":1,"tokens":[[0,2,false]]}\n')
        with pytest.raises(InterchangeFormatError, match="missing tags"):
            read_interchange(path)
        (record,) = read_interchange(path, require_tags=False)
        assert record.tag_names() == ("O",)

    def test_invalid_json_names_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"document":"d","comment_id":1,"tokens":[[0,2,false]],"tags":["O"]}\n{oops\n')
        with pytest.raises(InterchangeFormatError) as excinfo:
            read_interchange(path)
        assert excinfo.value.line == 2

    def test_tags_written_with_registry_names(self):
        buffer = io.StringIO()
        write_interchange(self.make_sequences(), buffer)
        registry = set(label_registry())
        for line in buffer.getvalue().splitlines():
            import json

            record = json.loads(line)
            assert set(record["tags"]) <= registry
