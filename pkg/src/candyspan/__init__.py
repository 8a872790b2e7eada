"""Toolkit for candy-speech span detection pipelines.

Covers everything around the neural model: corpus parsing and cleanup,
stratified splitting and oversampling, character-span <-> BIO-tag
conversion with basic and extended postprocessing, strict span-level and
binary comment-level evaluation, and span-to-binary label derivation.
Model predictions enter and leave through a line-delimited interchange
format, so any tagger that reports token character offsets can plug in.
"""

from .biocodec import (
    BioTag,
    EncodeResult,
    InterchangeFormatError,
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
from .corpus import (
    AnnotatedComment,
    CandyType,
    Comment,
    Corpus,
    CorpusFormatError,
    CorpusStats,
    DedupReport,
    SpanAnnotation,
    Violation,
    corpus_stats,
    deduplicate,
    parse_corpus,
    read_labels_tsv,
    read_spans_tsv,
    validate,
    write_corpus,
    write_violations,
)
from .metrics import (
    ClassCounts,
    EvalReport,
    KeyMismatchError,
    derive_binary,
    format_metric,
    positive_f1,
    render_table,
    report_records,
    strict_span_f1,
)
from .splitting import (
    FoldAssignment,
    InfeasibleSplitError,
    StratumKey,
    holdout_split,
    make_folds,
    oversample_binary,
    stratum_key,
    write_fold_tsv,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotatedComment",
    "BioTag",
    "CandyType",
    "ClassCounts",
    "Comment",
    "Corpus",
    "CorpusFormatError",
    "CorpusStats",
    "DedupReport",
    "EncodeResult",
    "EvalReport",
    "FoldAssignment",
    "InfeasibleSplitError",
    "InterchangeFormatError",
    "KeyMismatchError",
    "SpanAnnotation",
    "StratumKey",
    "TaggedSequence",
    "TokenOffset",
    "Violation",
    "corpus_stats",
    "decode_basic",
    "decode_extended",
    "deduplicate",
    "derive_binary",
    "encode_bio",
    "format_metric",
    "holdout_split",
    "label_registry",
    "make_folds",
    "oversample_binary",
    "parse_corpus",
    "positive_f1",
    "read_interchange",
    "read_labels_tsv",
    "read_spans_tsv",
    "render_table",
    "report_records",
    "strict_span_f1",
    "stratum_key",
    "tag_id",
    "tag_name",
    "validate",
    "write_corpus",
    "write_fold_tsv",
    "write_interchange",
    "write_violations",
]
