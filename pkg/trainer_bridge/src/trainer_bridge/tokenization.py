"""WordPiece tokenization with character offsets and continuation flags.

The toolkit is tokenizer-agnostic but requires character offsets for every
token; a tokenizer that cannot report an offset mapping is unusable here
and is rejected with a hard error. ``is_word_continuation`` is derived from
the word ids of the encoding: a token continues the previous word when both
belong to the same pre-tokenized word.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

from tokenizers import Tokenizer, models, pre_tokenizers, trainers

from .formats import Record

PAD_TOKEN = "[PAD]"
UNK_TOKEN = "[UNK]"


def train_tokenizer(texts: Iterable[str], vocab_size: int, path: str | Path) -> Tokenizer:
    """Train a WordPiece tokenizer on the given texts and save it."""
    tokenizer = Tokenizer(models.WordPiece(unk_token=UNK_TOKEN))
    tokenizer.pre_tokenizer = pre_tokenizers.Whitespace()
    trainer = trainers.WordPieceTrainer(
        vocab_size=vocab_size, special_tokens=[PAD_TOKEN, UNK_TOKEN]
    )
    tokenizer.train_from_iterator(texts, trainer)
    tokenizer.save(str(path))
    return tokenizer


def load_tokenizer(path: str | Path) -> Tokenizer:
    return Tokenizer.from_file(str(path))


def pad_id(tokenizer: Tokenizer) -> int:
    identifier = tokenizer.token_to_id(PAD_TOKEN)
    if identifier is None:
        raise ValueError(f"tokenizer lacks the {PAD_TOKEN} token")
    return identifier


def encode_text(tokenizer: Tokenizer, text: str):
    """Tokenize one text into (ids, offset/continuation token entries).

    Returns ``(input_ids, tokens)`` where tokens is a tuple of
    (start, end, is_word_continuation) in Unicode character offsets.
    """
    encoding = tokenizer.encode(text)
    offsets = getattr(encoding, "offsets", None)
    word_ids = getattr(encoding, "word_ids", None)
    if offsets is None or word_ids is None:
        raise RuntimeError(
            "tokenizer does not expose an offset mapping; the interchange "
            "format requires character offsets for every token"
        )
    tokens = []
    previous_word = None
    for (start, end), word in zip(offsets, word_ids):
        continuation = previous_word is not None and word is not None and word == previous_word
        tokens.append((start, end, continuation))
        previous_word = word
    return list(encoding.ids), tuple(tokens)


def tokenize_comments(
    tokenizer: Tokenizer, comments: Iterable, max_length: int | None = None
) -> list[Record]:
    """Token records (no tags) for a list of CommentRow, ready for encoding."""
    records: list[Record] = []
    for comment in comments:
        _, tokens = encode_text(tokenizer, comment.text)
        if max_length is not None and len(tokens) > max_length:
            tokens = tokens[:max_length]
        records.append(Record(comment.document, comment.comment_id, tokens))
    return records
