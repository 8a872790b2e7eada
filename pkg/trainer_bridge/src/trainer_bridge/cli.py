"""Command-line entry point: tokenize, init-encoder, train, predict.

Every subcommand takes ``--settings``, a key = value file (see settings.py
for the keys). Typical offline flow:

    trainer-bridge tokenize     --settings s.txt --out tokens.jsonl
    candyspan encode --comments c.tsv --spans gold.tsv --tokens tokens.jsonl --out train.jsonl
    trainer-bridge init-encoder --settings s.txt
    trainer-bridge train        --settings s.txt --train train.jsonl \
                                --holdout holdout.jsonl --checkpoint ckpt/
    trainer-bridge predict      --settings s.txt --checkpoint ckpt/ \
                                --comments c.tsv --out preds.jsonl
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .formats import read_comments_tsv, write_interchange
from .modeling import create_tiny_encoder
from .prediction import predict
from .settings import load_settings
from .tokenization import load_tokenizer, tokenize_comments, train_tokenizer
from .training import train_span_model

logger = logging.getLogger("trainer_bridge")


def _cmd_tokenize(args) -> int:
    settings = load_settings(args.settings)
    comments_file = args.comments or settings.comments_file
    if not comments_file:
        raise ValueError("no comments file (use --comments or settings comments_file)")
    comments = read_comments_tsv(comments_file)
    tokenizer_path = Path(settings.tokenizer_path)
    if tokenizer_path.exists():
        tokenizer = load_tokenizer(tokenizer_path)
        logger.info("loaded tokenizer from %s", tokenizer_path)
    else:
        tokenizer = train_tokenizer(
            (c.text for c in comments), settings.tokenizer_vocab_size, tokenizer_path
        )
        logger.info("trained tokenizer (%d entries) -> %s", tokenizer.get_vocab_size(), tokenizer_path)
    records = tokenize_comments(tokenizer, comments, max_length=settings.max_length)
    write_interchange(records, args.out)
    logger.info("wrote %d token records -> %s", len(records), args.out)
    return 0


def _cmd_init_encoder(args) -> int:
    settings = load_settings(args.settings)
    tokenizer = load_tokenizer(settings.tokenizer_path)
    create_tiny_encoder(
        settings.encoder_path,
        vocab_size=tokenizer.get_vocab_size(),
        max_positions=max(settings.max_length, 64),
        seed=settings.seed,
    )
    logger.info("wrote tiny encoder -> %s", settings.encoder_path)
    return 0


def _cmd_train(args) -> int:
    settings = load_settings(args.settings)
    result = train_span_model(args.train, args.holdout, settings, args.checkpoint)
    logger.info(
        "finished after %d steps; best holdout strict F1 %.4f; checkpoint %s",
        result.steps,
        float(result.best_f1),
        result.checkpoint_dir,
    )
    return 0


def _cmd_predict(args) -> int:
    settings = load_settings(args.settings)
    records = predict(
        args.checkpoint,
        args.comments,
        args.out,
        batch_size=settings.batch_size,
        max_length=settings.max_length,
    )
    logger.info("wrote %d prediction records -> %s", len(records), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trainer-bridge",
        description="Reference token classifier speaking the candyspan file formats.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    tokenize = subparsers.add_parser("tokenize", help="emit token offset records for a comments TSV")
    tokenize.add_argument("--settings", required=True)
    tokenize.add_argument("--comments", help="comments TSV (default: settings comments_file)")
    tokenize.add_argument("--out", required=True)
    tokenize.set_defaults(handler=_cmd_tokenize)

    init_encoder = subparsers.add_parser(
        "init-encoder", help="create a tiny random local encoder for offline runs"
    )
    init_encoder.add_argument("--settings", required=True)
    init_encoder.set_defaults(handler=_cmd_init_encoder)

    train = subparsers.add_parser("train", help="fine-tune the span tagging model")
    train.add_argument("--settings", required=True)
    train.add_argument("--train", required=True, help="tagged interchange file")
    train.add_argument("--holdout", required=True, help="tagged interchange file for early stopping")
    train.add_argument("--checkpoint", required=True, help="output checkpoint directory")
    train.set_defaults(handler=_cmd_train)

    pred = subparsers.add_parser("predict", help="tag a comments TSV with a trained checkpoint")
    pred.add_argument("--settings", required=True)
    pred.add_argument("--checkpoint", required=True)
    pred.add_argument("--comments", required=True)
    pred.add_argument("--out", required=True)
    pred.set_defaults(handler=_cmd_predict)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
