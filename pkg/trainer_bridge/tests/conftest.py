"""Shared fixtures: a learnable synthetic corpus and a tiny offline pipeline.

The synthetic comments are built from a closed vocabulary. Each candy span
is a two-word phrase whose words are unique to one candy type, so a small
model can memorize the token-to-tag mapping; spans are word-aligned, which
keeps encode/decode exact.
"""

import json
import random
import subprocess
import sys
from pathlib import Path

import pytest

FILLERS = [
    "video", "heute", "mal", "wieder", "ich", "das", "ist", "ein", "und",
    "so", "hier", "dann", "wir", "schauen", "gerne",
]
SIG_FIRST = ["batu", "cedo", "fira", "gopa", "hilu", "jemo", "kuri", "lavo", "mipa", "nodu"]
SIG_SECOND = ["pelo", "qira", "rosu", "sabi", "temo", "ulfa", "vena", "wika", "xopi", "yaru"]
TYPE_LABELS = [
    "positive feedback", "compliment", "affection declaration", "encouragement",
    "gratitude", "agreement", "ambiguous", "implicit", "group membership", "sympathy",
]


def make_synthetic_comment(rng: random.Random):
    """One comment text plus its (start, end, type label) spans."""
    items = [[rng.choice(FILLERS)] for _ in range(rng.randint(3, 9))]
    if rng.random() < 0.55:
        for _ in range(rng.randint(1, 2)):
            type_index = rng.randrange(10)
            items.append([SIG_FIRST[type_index], SIG_SECOND[type_index], type_index])
    rng.shuffle(items)
    words: list[str] = []
    phrase_ranges: list[tuple[int, int, int]] = []
    for item in items:
        if len(item) == 3:
            phrase_ranges.append((len(words), len(words) + 1, item[2]))
            words.extend(item[:2])
        else:
            words.extend(item)
    offsets = []
    position = 0
    for word in words:
        offsets.append((position, position + len(word)))
        position += len(word) + 1
    text = " ".join(words)
    spans = [
        (offsets[first][0], offsets[last][1], TYPE_LABELS[type_index])
        for first, last, type_index in phrase_ranges
    ]
    spans.sort()
    return text, spans


def write_synthetic_corpus(directory: Path, count: int, seed: int = 1313):
    rng = random.Random(seed)
    comments_lines = ["document\tcomment_id\tcomment"]
    labels_lines = ["document\tcomment_id\tflausch"]
    spans_lines = ["document\tcomment_id\ttype\tstart\tend"]
    keys = []
    for i in range(count):
        text, spans = make_synthetic_comment(rng)
        keys.append(("toy", i))
        comments_lines.append(f"toy\t{i}\t{text}")
        labels_lines.append(f"toy\t{i}\t{'yes' if spans else 'no'}")
        for start, end, label in spans:
            spans_lines.append(f"toy\t{i}\t{label}\t{start}\t{end}")
    (directory / "comments.tsv").write_text("\n".join(comments_lines) + "\n", encoding="utf-8")
    (directory / "labels.tsv").write_text("\n".join(labels_lines) + "\n", encoding="utf-8")
    (directory / "spans.tsv").write_text("\n".join(spans_lines) + "\n", encoding="utf-8")
    return keys


def candyspan_cli(*args) -> subprocess.CompletedProcess:
    """Invoke the toolkit CLI; the bridge only uses its external interfaces."""
    return subprocess.run(
        [sys.executable, "-m", "candyspan", *args],
        capture_output=True,
        text=True,
    )


def write_settings(path: Path, **values) -> Path:
    path.write_text(
        "".join(f"{key} = {value}\n" for key, value in values.items()), encoding="utf-8"
    )
    return path


@pytest.fixture(scope="session")
def toy_workspace(tmp_path_factory):
    """Synthetic corpus, tokenizer, tiny encoder and tagged training data."""
    from trainer_bridge.cli import main as bridge_main

    workdir = tmp_path_factory.mktemp("toy")
    keys = write_synthetic_corpus(workdir, count=200)

    settings_path = write_settings(
        workdir / "settings.txt",
        comments_file=workdir / "comments.tsv",
        tokenizer_path=workdir / "tokenizer.json",
        encoder_path=workdir / "encoder",
        peak_learning_rate="0.002",
        batch_size=16,
        weight_decay="0.01",
        gradient_clip_norm="1.0",
        warmup="10%",
        eval_interval_steps=25,
        early_stopping_patience_evals=60,
        max_epochs=30,
        max_length=64,
        seed=7,
        tokenizer_vocab_size=1500,
    )

    tokens_path = workdir / "tokens.jsonl"
    assert bridge_main(["tokenize", "--settings", str(settings_path), "--out", str(tokens_path)]) == 0
    assert bridge_main(["init-encoder", "--settings", str(settings_path)]) == 0

    train_path = workdir / "train.jsonl"
    encode = candyspan_cli(
        "encode",
        "--comments", str(workdir / "comments.tsv"),
        "--spans", str(workdir / "spans.tsv"),
        "--tokens", str(tokens_path),
        "--out", str(train_path),
    )
    assert encode.returncode == 0, encode.stderr

    # memorization regime: the holdout is a subset of the training data
    holdout_keys = {("toy", i) for i in range(0, 200, 5)}
    holdout_path = workdir / "holdout.jsonl"
    with open(holdout_path, "w", encoding="utf-8") as handle:
        for line in train_path.read_text(encoding="utf-8").splitlines():
            record = json.loads(line)
            if (record["document"], record["comment_id"]) in holdout_keys:
                handle.write(line + "\n")

    holdout_comments_path = workdir / "holdout_comments.tsv"
    with open(holdout_comments_path, "w", encoding="utf-8") as handle:
        lines = (workdir / "comments.tsv").read_text(encoding="utf-8").splitlines()
        handle.write(lines[0] + "\n")
        for line in lines[1:]:
            document, comment_id, _ = line.split("\t", 2)
            if (document, int(comment_id)) in holdout_keys:
                handle.write(line + "\n")

    return {
        "dir": workdir,
        "settings": settings_path,
        "keys": keys,
        "tokens": tokens_path,
        "train": train_path,
        "holdout": holdout_path,
        "holdout_keys": holdout_keys,
        "holdout_comments": holdout_comments_path,
    }
