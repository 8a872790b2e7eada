"""Character spans <-> BIO tags, and what the two decoders do differently.

Token offsets come from the caller (here: a whitespace tokenizer and a fake
WordPiece split), so the codec works with any tokenizer that reports
character offsets. Run with: python demos/03_span_tags.py
"""

import re

from candyspan import (
    BioTag,
    CandyType,
    SpanAnnotation,
    TaggedSequence,
    TokenOffset,
    decode_basic,
    decode_extended,
    encode_bio,
    label_registry,
)


def whitespace_tokens(text):
    return [
        TokenOffset(i, m.start(), m.end()) for i, m in enumerate(re.finditer(r"\S+", text))
    ]


def show(spans):
    return [(s.start, s.end, s.candy_type.name) for s in spans]


def main():
    print(f"label registry ({len(label_registry())} tags):")
    print(" ", ", ".join(label_registry()[:5]), "...")

    text = "Die Tipps sind echt hilfreich. Danke dafür! :)"
    spans = [
        SpanAnnotation(0, 30, CandyType.positive_feedback),
        SpanAnnotation(31, 46, CandyType.gratitude),
    ]
    tokens = whitespace_tokens(text)
    result = encode_bio(text, spans, tokens, document="vid", comment_id=1)
    print(f"\n{text!r}")
    for token, name in zip(tokens, result.tagged.tag_names()):
        print(f"  [{token.start:2d},{token.end:2d}) {text[token.start:token.end]!r:16} {name}")

    print("\ndecode_basic reproduces the word-aligned spans exactly:")
    print(" ", show(decode_basic(result.tagged)))

    # overlapping spans cannot be expressed in single-label BIO tags; the
    # encoder reports what it had to drop
    clash = [
        SpanAnnotation(0, 9, CandyType.compliment),
        SpanAnnotation(4, 9, CandyType.gratitude),
    ]
    nested = encode_bio("toll toll", clash, whitespace_tokens("toll toll"))
    print(f"\noverlap handling: tags={nested.tagged.tag_names()} dropped={nested.dropped_spans}")

    # subword tokens: "tollen" split as "toll" + "##en"; the model starts a
    # new span on the continuation piece, which basic decoding keeps as two
    # spans but extended decoding repairs into one word-aligned span
    pieces = (
        TokenOffset(0, 0, 4),            # toll
        TokenOffset(1, 4, 6, True),      # ##en
        TokenOffset(2, 7, 12),           # gemacht
    )
    tags = (
        BioTag("B", CandyType.compliment),
        BioTag("B", CandyType.compliment),
        BioTag("O"),
    )
    tagged = TaggedSequence("vid", 2, pieces, tags)
    print("\nmid-word B tag on 'toll ##en gemacht':")
    print("  basic:   ", show(decode_basic(tagged)))
    print("  extended:", show(decode_extended(tagged)))

    # trailing untagged continuation: the span may not end inside a word
    pieces = (
        TokenOffset(0, 0, 5),            # super
        TokenOffset(1, 6, 11),           # schön
        TokenOffset(2, 11, 13, True),    # ##er
    )
    tags = (
        BioTag("B", CandyType.compliment),
        BioTag("I", CandyType.compliment),
        BioTag("O"),
    )
    tagged = TaggedSequence("vid", 3, pieces, tags)
    print("\nuntagged continuation after 'super schön ##er':")
    print("  basic:   ", show(decode_basic(tagged)))
    print("  extended:", show(decode_extended(tagged)))


if __name__ == "__main__":
    main()
