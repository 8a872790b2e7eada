"""Reference neural adapter for the candyspan toolkit.

Fine-tunes a locally available encoder with a 21-way token classification
head and exchanges data with the toolkit exclusively through its file
formats: comments TSV in, token/tag interchange records in and out.
"""

from .evaluation import StrictScore, decode_spans, strict_score
from .formats import (
    TAG_NAMES,
    Record,
    read_comments_tsv,
    read_interchange,
    write_interchange,
)
from .prediction import predict
from .settings import PRESETS, TrainSettings, load_settings
from .training import TrainingResult, train_span_model

__version__ = "0.1.0"

__all__ = [
    "PRESETS",
    "Record",
    "StrictScore",
    "TAG_NAMES",
    "TrainSettings",
    "TrainingResult",
    "decode_spans",
    "load_settings",
    "predict",
    "read_comments_tsv",
    "read_interchange",
    "strict_score",
    "train_span_model",
    "write_interchange",
]
