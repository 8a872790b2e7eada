"""Prediction: comments TSV in, tagged interchange records out."""

from __future__ import annotations

import logging
from pathlib import Path

import torch

from .formats import TAG_NAMES, Record, read_comments_tsv, write_interchange
from .modeling import load_checkpoint
from .tokenization import encode_text, load_tokenizer, pad_id

logger = logging.getLogger("trainer_bridge")


def predict(
    checkpoint_dir: str | Path,
    comments_file: str | Path,
    out_file: str | Path,
    batch_size: int = 32,
    max_length: int = 128,
) -> list[Record]:
    """Tag every comment with the checkpoint's argmax labels.

    Token offsets and continuation flags come from the tokenizer saved with
    the checkpoint; the output file is written atomically.
    """
    checkpoint_dir = Path(checkpoint_dir)
    model = load_checkpoint(checkpoint_dir)
    tokenizer = load_tokenizer(checkpoint_dir / "tokenizer.json")
    padding_id = pad_id(tokenizer)
    limit = min(max_length, int(model.config.max_position_embeddings))

    comments = read_comments_tsv(comments_file)
    encoded = []
    truncated = 0
    for comment in comments:
        input_ids, tokens = encode_text(tokenizer, comment.text)
        if len(tokens) > limit:
            truncated += 1
            input_ids = input_ids[:limit]
            tokens = tokens[:limit]
        encoded.append((comment, input_ids, tokens))
    if truncated:
        logger.warning("truncated %d comments to %d tokens", truncated, limit)

    records: list[Record] = []
    model.eval()
    with torch.no_grad():
        for begin in range(0, len(encoded), batch_size):
            batch = encoded[begin : begin + batch_size]
            width = max((len(ids) for _, ids, _ in batch), default=0)
            if width == 0:
                for comment, _, tokens in batch:
                    records.append(Record(comment.document, comment.comment_id, tokens, ()))
                continue
            input_ids = torch.full((len(batch), width), padding_id, dtype=torch.long)
            attention = torch.zeros((len(batch), width), dtype=torch.long)
            for row, (_, ids, _) in enumerate(batch):
                if ids:
                    input_ids[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
                    attention[row, : len(ids)] = 1
            best = model(input_ids=input_ids, attention_mask=attention).logits.argmax(dim=-1)
            for row, (comment, ids, tokens) in enumerate(batch):
                tags = tuple(TAG_NAMES[int(i)] for i in best[row, : len(ids)])
                records.append(Record(comment.document, comment.comment_id, tokens, tags))

    write_interchange(records, out_file)
    return records
