"""Fine-tuning loop for the 21-way token classification head.

Training minimizes token-level cross-entropy with AdamW, gradient clipping
and a linear warmup/decay schedule. Every ``eval_interval_steps`` optimizer
steps the holdout strict F1 is computed via the bridge's own basic decoder;
the best-scoring weights are kept and training stops once the score has not
improved for ``early_stopping_patience_evals`` consecutive evaluations.
"""

from __future__ import annotations

import json
import logging
import shutil
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import torch
from transformers import get_linear_schedule_with_warmup

from . import evaluation
from .formats import (
    TAG_IDS,
    TAG_NAMES,
    Record,
    read_comments_tsv,
    read_interchange,
)
from .modeling import load_token_classifier
from .settings import TrainSettings
from .tokenization import encode_text, load_tokenizer, pad_id

logger = logging.getLogger("trainer_bridge")

IGNORE_INDEX = -100


@dataclass
class Example:
    key: tuple[str, int]
    input_ids: list[int]
    label_ids: list[int]
    tokens: tuple[tuple[int, int, bool], ...]
    gold_spans: list[evaluation.Span]


@dataclass
class TrainingResult:
    checkpoint_dir: Path
    best_f1: Fraction
    evaluations: list[dict]
    steps: int


def _model_max_length(model, settings: TrainSettings) -> int:
    return min(settings.max_length, int(model.config.max_position_embeddings))


def build_examples(
    records: list[Record],
    texts: dict[tuple[str, int], str],
    tokenizer,
    max_length: int,
    source: str,
) -> list[Example]:
    """Re-tokenize the comment texts and align them with the tagged records.

    The records must have been produced with the same tokenizer (via the
    bridge's tokenize step); any offset mismatch is an error, not something
    to silently repair.
    """
    examples: list[Example] = []
    truncated = 0
    for record in records:
        if record.tags is None:
            raise ValueError(f"{source}: record {record.key} has no tags")
        if record.key not in texts:
            raise ValueError(f"{source}: no comment text for {record.key}")
        input_ids, tokens = encode_text(tokenizer, texts[record.key])
        if len(tokens) > max_length:
            truncated += 1
            input_ids = input_ids[:max_length]
            tokens = tokens[:max_length]
        expected = record.tokens
        tags = record.tags
        if len(expected) > len(tokens):
            # the record was built with a larger limit; truncate it too
            truncated += 1
            expected = expected[: len(tokens)]
            tags = tags[: len(tokens)]
        if tokens[: len(expected)] != expected:
            raise ValueError(
                f"{source}: token offsets for {record.key} do not match the "
                "current tokenizer; re-run the tokenize step"
            )
        input_ids = input_ids[: len(expected)]
        tokens = tokens[: len(expected)]
        label_ids = [TAG_IDS[name] for name in tags]
        examples.append(
            Example(
                key=record.key,
                input_ids=input_ids,
                label_ids=label_ids,
                tokens=tokens,
                gold_spans=evaluation.decode_spans(tokens, tags),
            )
        )
    if truncated:
        logger.warning("%s: truncated %d sequences to %d tokens", source, truncated, max_length)
    return examples


def _batches(examples: list[Example], order: list[int], batch_size: int):
    for begin in range(0, len(order), batch_size):
        yield [examples[i] for i in order[begin : begin + batch_size]]


def _collate(batch: list[Example], padding_id: int):
    width = max(len(example.input_ids) for example in batch)
    input_ids = torch.full((len(batch), width), padding_id, dtype=torch.long)
    attention = torch.zeros((len(batch), width), dtype=torch.long)
    labels = torch.full((len(batch), width), IGNORE_INDEX, dtype=torch.long)
    for row, example in enumerate(batch):
        length = len(example.input_ids)
        input_ids[row, :length] = torch.tensor(example.input_ids, dtype=torch.long)
        attention[row, :length] = 1
        labels[row, :length] = torch.tensor(example.label_ids, dtype=torch.long)
    return input_ids, attention, labels


def predict_tags(model, examples: list[Example], padding_id: int, batch_size: int):
    """Argmax tag names per example, batched; empty examples stay empty."""
    model.eval()
    results: dict[tuple[str, int], tuple[str, ...]] = {}
    filled = [example for example in examples if example.input_ids]
    with torch.no_grad():
        for begin in range(0, len(filled), batch_size):
            batch = filled[begin : begin + batch_size]
            input_ids, attention, _ = _collate(batch, padding_id)
            logits = model(input_ids=input_ids, attention_mask=attention).logits
            best = logits.argmax(dim=-1)
            for row, example in enumerate(batch):
                length = len(example.input_ids)
                results[example.key] = tuple(
                    TAG_NAMES[int(identifier)] for identifier in best[row, :length]
                )
    for example in examples:
        if not example.input_ids:
            results[example.key] = ()
    return results


def evaluate_strict(model, examples: list[Example], padding_id: int, batch_size: int):
    predicted = predict_tags(model, examples, padding_id, batch_size)
    gold = {example.key: example.gold_spans for example in examples}
    pred = {
        example.key: evaluation.decode_spans(example.tokens, predicted[example.key])
        for example in examples
    }
    return evaluation.strict_score(gold, pred)


def train_span_model(
    train_file: str | Path,
    holdout_file: str | Path,
    settings: TrainSettings,
    checkpoint_dir: str | Path,
) -> TrainingResult:
    if not settings.comments_file:
        raise ValueError("settings.comments_file must point at the comments TSV")
    torch.manual_seed(settings.seed)

    tokenizer = load_tokenizer(settings.tokenizer_path)
    padding_id = pad_id(tokenizer)
    model = load_token_classifier(settings.encoder_path)
    max_length = _model_max_length(model, settings)

    texts = {row.key: row.text for row in read_comments_tsv(settings.comments_file)}
    train_examples = build_examples(
        read_interchange(train_file), texts, tokenizer, max_length, str(train_file)
    )
    holdout_examples = build_examples(
        read_interchange(holdout_file), texts, tokenizer, max_length, str(holdout_file)
    )
    trainable = [example for example in train_examples if example.input_ids]
    if not trainable and settings.max_epochs > 0:
        raise ValueError(f"{train_file}: no non-empty training sequences")

    steps_per_epoch = max(1, (len(trainable) + settings.batch_size - 1) // settings.batch_size)
    total_steps = steps_per_epoch * settings.max_epochs
    optimizer = torch.optim.AdamW(
        model.parameters(),
        lr=settings.peak_learning_rate,
        weight_decay=settings.weight_decay,
    )
    scheduler = get_linear_schedule_with_warmup(
        optimizer, settings.warmup_steps(total_steps), total_steps
    )

    generator = torch.Generator().manual_seed(settings.seed)
    evaluations: list[dict] = []
    best_f1 = Fraction(-1)
    best_state = None
    evals_since_best = 0
    step = 0
    stop = False

    def run_eval(loss_value: float | None) -> None:
        nonlocal best_f1, best_state, evals_since_best, stop
        score = evaluate_strict(model, holdout_examples, padding_id, settings.batch_size)
        entry = {
            "step": step,
            "loss": loss_value,
            "holdout_f1": float(score.f1),
            "true_positives": score.true_positives,
            "false_positives": score.false_positives,
            "false_negatives": score.false_negatives,
        }
        evaluations.append(entry)
        logger.info(
            "step %d loss %s holdout strict F1 %.4f (tp=%d fp=%d fn=%d)",
            step,
            f"{loss_value:.4f}" if loss_value is not None else "n/a",
            float(score.f1),
            score.true_positives,
            score.false_positives,
            score.false_negatives,
        )
        if score.f1 > best_f1:
            best_f1 = score.f1
            best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}
            evals_since_best = 0
        else:
            evals_since_best += 1
            if evals_since_best >= settings.early_stopping_patience_evals:
                logger.info("early stopping after %d evaluations without improvement", evals_since_best)
                stop = True

    for epoch in range(settings.max_epochs):
        order = torch.randperm(len(trainable), generator=generator).tolist()
        model.train()
        for batch in _batches(trainable, order, settings.batch_size):
            input_ids, attention, labels = _collate(batch, padding_id)
            output = model(input_ids=input_ids, attention_mask=attention, labels=labels)
            output.loss.backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(), settings.gradient_clip_norm)
            optimizer.step()
            scheduler.step()
            optimizer.zero_grad()
            step += 1
            if step % settings.eval_interval_steps == 0:
                run_eval(float(output.loss.detach()))
                model.train()
            if stop:
                break
        if stop:
            break

    # final evaluation so short runs (or max_epochs=0) still report a score
    run_eval(None)
    if best_state is not None:
        model.load_state_dict(best_state)

    checkpoint_dir = Path(checkpoint_dir)
    checkpoint_dir.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(checkpoint_dir)
    shutil.copyfile(settings.tokenizer_path, checkpoint_dir / "tokenizer.json")
    with open(checkpoint_dir / "training_log.jsonl", "w", encoding="utf-8") as handle:
        for entry in evaluations:
            handle.write(json.dumps(entry) + "\n")
    return TrainingResult(
        checkpoint_dir=checkpoint_dir,
        best_f1=max(best_f1, Fraction(0)),
        evaluations=evaluations,
        steps=step,
    )
