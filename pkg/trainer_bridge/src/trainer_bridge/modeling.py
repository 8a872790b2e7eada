"""Encoder handling: load a local pretrained encoder, or create a tiny one.

The classification head's bias is initialized to favor the outside tag, so
an untrained model predicts O almost everywhere instead of random spans.
Paper-scale encoders are configuration presets; the tiny encoder exists so
the whole pipeline runs offline on a laptop CPU.
"""

from __future__ import annotations

from pathlib import Path

import torch
import transformers
from transformers import BertConfig, BertModel, AutoModelForTokenClassification

from .formats import TAG_NAMES, OUTSIDE_ID

transformers.utils.logging.set_verbosity_error()
transformers.utils.logging.disable_progress_bar()

OUTSIDE_BIAS = 4.0


def create_tiny_encoder(
    path: str | Path,
    vocab_size: int,
    hidden_size: int = 64,
    num_layers: int = 2,
    num_heads: int = 2,
    max_positions: int = 192,
    seed: int = 42,
) -> None:
    """Write a small randomly initialized BERT encoder to ``path``."""
    torch.manual_seed(seed)
    config = BertConfig(
        vocab_size=vocab_size,
        hidden_size=hidden_size,
        num_hidden_layers=num_layers,
        num_attention_heads=num_heads,
        intermediate_size=hidden_size * 2,
        max_position_embeddings=max_positions,
    )
    BertModel(config).save_pretrained(path)


def load_token_classifier(encoder_path: str | Path) -> torch.nn.Module:
    """Attach a fresh 21-way token classification head to a local encoder."""
    model = AutoModelForTokenClassification.from_pretrained(
        str(encoder_path),
        num_labels=len(TAG_NAMES),
        id2label={i: name for i, name in enumerate(TAG_NAMES)},
        label2id={name: i for i, name in enumerate(TAG_NAMES)},
    )
    with torch.no_grad():
        model.classifier.bias.zero_()
        model.classifier.bias[OUTSIDE_ID] = OUTSIDE_BIAS
    return model


def load_checkpoint(checkpoint_dir: str | Path) -> torch.nn.Module:
    model = AutoModelForTokenClassification.from_pretrained(str(checkpoint_dir))
    if model.config.num_labels != len(TAG_NAMES):
        raise ValueError(
            f"checkpoint predicts {model.config.num_labels} labels, expected {len(TAG_NAMES)}"
        )
    return model
