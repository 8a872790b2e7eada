"""Command-line front-end composing the toolkit into a pipeline.

Subcommands: validate, dedup, stats, split, encode, decode, score-spans,
score-binary, derive-binary. Exit codes: 0 on success, 1 on data errors
(malformed files, infeasible splits, key mismatches), 2 on usage errors.
Every run prints the resolved configuration as one JSON line on stderr.
Structured output goes to --out when given, else to stdout; human-readable
tables and warnings go to stderr so pipelines stay clean.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import biocodec, corpus, metrics, splitting

BASIC = "basic"
EXTENDED = "extended"


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings of one CLI run; defaults mirror the pipeline defaults."""

    seed: int = 42
    fold_count: int = 5
    holdout_fraction: float = 0.10
    stratify_mode: str = splitting.BINARY
    postprocessing: str = BASIC

    def to_record(self) -> dict:
        return {
            "seed": self.seed,
            "fold_count": self.fold_count,
            "holdout_fraction": self.holdout_fraction,
            "stratify_mode": self.stratify_mode,
            "postprocessing": self.postprocessing,
        }


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    defaults = RunConfig()
    return RunConfig(
        seed=getattr(args, "seed", None) if getattr(args, "seed", None) is not None else defaults.seed,
        fold_count=getattr(args, "k", None) or defaults.fold_count,
        holdout_fraction=getattr(args, "fraction", None) or defaults.holdout_fraction,
        stratify_mode=(
            args.mode
            if getattr(args, "mode", None) in splitting.STRATIFY_MODES
            else defaults.stratify_mode
        ),
        postprocessing=(
            args.mode if getattr(args, "mode", None) in (BASIC, EXTENDED) else defaults.postprocessing
        ),
    )


def _out_stream(args: argparse.Namespace):
    if getattr(args, "out", None) is None:
        return sys.stdout, False
    return open(args.out, "w", encoding="utf-8", newline=""), True


def _parse_corpus_args(args: argparse.Namespace) -> corpus.Corpus:
    return corpus.parse_corpus(
        args.comments,
        labels_file=getattr(args, "labels", None),
        spans_file=getattr(args, "spans", None),
    )


def _cmd_validate(args) -> int:
    parsed = _parse_corpus_args(args)
    violations = corpus.validate(parsed)
    handle, owned = _out_stream(args)
    try:
        corpus.write_violations(violations, handle)
    finally:
        if owned:
            handle.close()
    print(f"{len(violations)} violations in {len(parsed)} comments", file=sys.stderr)
    return 0


def _cmd_dedup(args) -> int:
    parsed = _parse_corpus_args(args)
    deduped, report = corpus.deduplicate(parsed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus.write_corpus(
        deduped,
        out_dir / "comments.tsv",
        out_dir / "labels.tsv",
        out_dir / "spans.tsv",
    )
    summary = {
        "removed_count": report.removed_count,
        "duplicate_group_count": report.duplicate_group_count,
        "retained_conflict_group_count": len(report.retained_conflicts),
        "retained_conflict_comment_count": report.retained_conflict_comment_count,
        "output_comment_count": len(deduped),
    }
    print(json.dumps(summary, ensure_ascii=False))
    for text, members in report.retained_conflicts:
        record = {
            "conflict_text": text,
            "members": [{"document": d, "comment_id": c} for d, c in members],
        }
        print(json.dumps(record, ensure_ascii=False))
    return 0


def _cmd_stats(args) -> int:
    parsed = _parse_corpus_args(args)
    stats = corpus.corpus_stats(parsed)
    handle, owned = _out_stream(args)
    try:
        handle.write(json.dumps(stats.to_record(), ensure_ascii=False) + "\n")
    finally:
        if owned:
            handle.close()
    return 0


def _cmd_split(args) -> int:
    parsed = _parse_corpus_args(args)
    config = _resolve_config(args)
    handle, owned = _out_stream(args)
    try:
        if args.k is not None:
            folds = splitting.make_folds(parsed, args.k, config.stratify_mode, config.seed)
            splitting.write_fold_tsv(folds, handle)
        else:
            train, holdout = splitting.holdout_split(
                parsed, args.fraction, config.stratify_mode, config.seed
            )
            holdout_keys = {ac.key for ac in holdout}
            handle.write("document\tcomment_id\tsplit\n")
            for key in sorted(ac.key for ac in parsed):
                side = "holdout" if key in holdout_keys else "train"
                handle.write(f"{key[0]}\t{key[1]}\t{side}\n")
    finally:
        if owned:
            handle.close()
    return 0


def _cmd_encode(args) -> int:
    parsed = corpus.parse_corpus(args.comments, spans_file=getattr(args, "spans", None))
    by_key = {ac.key: ac for ac in parsed}
    token_records = biocodec.read_interchange(args.tokens, require_tags=False)
    encoded: list[biocodec.TaggedSequence] = []
    skipped = set(by_key)
    for record in token_records:
        if record.key not in by_key:
            raise corpus.CorpusFormatError(
                args.tokens, None, f"tokens for unknown comment {record.key}"
            )
        skipped.discard(record.key)
        annotated = by_key[record.key]
        result = biocodec.encode_bio(
            annotated.comment.text,
            annotated.spans,
            record.tokens,
            document=record.document,
            comment_id=record.comment_id,
        )
        if result.dropped_spans:
            warning = {
                "document": record.document,
                "comment_id": record.comment_id,
                "dropped_spans": list(result.dropped_spans),
            }
            print(json.dumps(warning, ensure_ascii=False), file=sys.stderr)
        encoded.append(result.tagged)
    if skipped:
        print(
            f"warning: {len(skipped)} comments have no token record and were skipped",
            file=sys.stderr,
        )
    handle, owned = _out_stream(args)
    try:
        biocodec.write_interchange(encoded, handle)
    finally:
        if owned:
            handle.close()
    return 0


def _cmd_decode(args) -> int:
    config = _resolve_config(args)
    decode = biocodec.decode_basic if config.postprocessing == BASIC else biocodec.decode_extended
    sequences = biocodec.read_interchange(args.pred)

    def rows():
        for tagged in sequences:
            for span in decode(tagged):
                yield (tagged.document, tagged.comment_id, span)

    handle, owned = _out_stream(args)
    try:
        corpus.write_span_rows(rows(), handle)
    finally:
        if owned:
            handle.close()
    return 0


def _write_report(report: metrics.EvalReport, args) -> None:
    handle, owned = _out_stream(args)
    try:
        metrics.write_report_records(report, handle)
    finally:
        if owned:
            handle.close()
    print(metrics.render_table(report), file=sys.stderr)


def _cmd_score_spans(args) -> int:
    gold = corpus.read_spans_tsv(args.gold)
    pred = corpus.read_spans_tsv(args.pred)
    _write_report(metrics.strict_span_f1(gold, pred), args)
    return 0


def _cmd_score_binary(args) -> int:
    gold = corpus.read_labels_tsv(args.gold)
    pred = corpus.read_labels_tsv(args.pred)
    _write_report(metrics.positive_f1(gold, pred), args)
    return 0


def _cmd_derive_binary(args) -> int:
    parsed = corpus.parse_corpus(args.comments)
    keys = [ac.key for ac in parsed]
    pred = corpus.read_spans_tsv(args.pred)
    labels = metrics.derive_binary(pred, keys)
    handle, owned = _out_stream(args)
    try:
        corpus.write_label_rows(
            ((document, comment_id, labels[(document, comment_id)]) for document, comment_id in keys),
            handle,
        )
    finally:
        if owned:
            handle.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="candyspan",
        description="Candy-speech span detection toolkit: corpus handling, "
        "splits, BIO encoding/decoding and strict scoring.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text, **flags):
        sub = subparsers.add_parser(name, help=help_text)
        sub.set_defaults(handler=handler)
        for flag, options in flags.items():
            sub.add_argument(f"--{flag}", **options)
        return sub

    corpus_flags = {
        "comments": {"required": True, "help": "comments TSV"},
        "labels": {"help": "labels TSV (optional)"},
        "spans": {"help": "spans TSV (optional)"},
    }
    add(
        "validate",
        _cmd_validate,
        "report corpus invariant violations as JSON lines",
        **corpus_flags,
        out={"help": "output path (default: stdout)"},
    )
    add(
        "dedup",
        _cmd_dedup,
        "remove exact duplicates, keep conflicting groups",
        **corpus_flags,
        out={"required": True, "help": "output directory for the deduplicated TSVs"},
    )
    add(
        "stats",
        _cmd_stats,
        "print corpus statistics as one JSON line",
        **corpus_flags,
        out={"help": "output path (default: stdout)"},
    )
    split = add(
        "split",
        _cmd_split,
        "stratified k-fold assignment or train/holdout split",
        **corpus_flags,
        k={"type": int, "help": "number of cross-validation folds"},
        fraction={"type": float, "help": "holdout fraction in (0, 1)"},
        mode={
            "choices": splitting.STRATIFY_MODES,
            "default": splitting.BINARY,
            "help": "stratification key",
        },
        seed={"type": int, "default": 42, "help": "64-bit RNG seed"},
        out={"help": "output path (default: stdout)"},
    )
    add(
        "encode",
        _cmd_encode,
        "turn gold spans plus a tokens file into tagged interchange records",
        comments={"required": True, "help": "comments TSV"},
        spans={"help": "spans TSV (optional; omit for all-O tags)"},
        tokens={"required": True, "help": "interchange file with token offsets"},
        out={"help": "output path (default: stdout)"},
    )
    add(
        "decode",
        _cmd_decode,
        "parse predicted tags into a spans TSV",
        pred={"required": True, "help": "interchange file with predicted tags"},
        mode={"choices": (BASIC, EXTENDED), "default": BASIC, "help": "postprocessing rules"},
        out={"help": "output path (default: stdout)"},
    )
    add(
        "score-spans",
        _cmd_score_spans,
        "strict span-level F1 of predictions against gold",
        gold={"required": True, "help": "gold spans TSV"},
        pred={"required": True, "help": "predicted spans TSV"},
        out={"help": "output path for JSON records (default: stdout)"},
    )
    add(
        "score-binary",
        _cmd_score_binary,
        "positive-class F1 of binary predictions against gold",
        gold={"required": True, "help": "gold labels TSV"},
        pred={"required": True, "help": "predicted labels TSV"},
        out={"help": "output path for JSON records (default: stdout)"},
    )
    add(
        "derive-binary",
        _cmd_derive_binary,
        "derive yes/no labels from predicted spans",
        pred={"required": True, "help": "predicted spans TSV"},
        comments={"required": True, "help": "comments TSV naming every comment"},
        out={"help": "output path (default: stdout)"},
    )
    split.set_defaults(_needs_split_check=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "_needs_split_check", False):
        if (args.k is None) == (args.fraction is None):
            parser.error("split needs exactly one of --k or --fraction")
    config = _resolve_config(args)
    print(f"config: {json.dumps(config.to_record())}", file=sys.stderr)
    try:
        return args.handler(args)
    except (
        corpus.CorpusFormatError,
        biocodec.InterchangeFormatError,
        splitting.InfeasibleSplitError,
        metrics.KeyMismatchError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
