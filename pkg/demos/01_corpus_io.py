"""Corpus basics: TSV round trips, validation, deduplication, statistics.

Builds a tiny annotated corpus in a temporary directory, then walks through
the corpus-level operations. Run with: python demos/01_corpus_io.py
"""

import tempfile
from pathlib import Path

from candyspan import (
    corpus_stats,
    deduplicate,
    parse_corpus,
    validate,
    write_corpus,
)


def main():
    workdir = Path(tempfile.mkdtemp(prefix="candyspan-demo-"))
    print(f"working in {workdir}\n")

    # Three TSV files describe a corpus: comments, binary labels and spans.
    # Offsets count Unicode scalar values and spans are half-open [start, end).
    (workdir / "comments.tsv").write_text(
        "document\tcomment_id\tcomment\n"
        "vid-1\t1\tDanke dafür! :)\n"
        "vid-1\t2\tDanke dafür! :)\n"          # exact duplicate of comment 1
        "vid-1\t3\tich schau das jeden tag\n"
        "vid-2\t1\tdu bist die beste\\nwirklich\n"  # escaped newline in text
        "vid-2\t2\tich schau das jeden tag\n",  # same text as vid-1/3, other label
        encoding="utf-8",
    )
    (workdir / "labels.tsv").write_text(
        "document\tcomment_id\tflausch\n"
        "vid-1\t1\tyes\nvid-1\t2\tyes\nvid-1\t3\tno\nvid-2\t1\tyes\nvid-2\t2\tyes\n",
        encoding="utf-8",
    )
    (workdir / "spans.tsv").write_text(
        "document\tcomment_id\ttype\tstart\tend\n"
        "vid-1\t1\tgratitude\t0\t15\n"
        "vid-1\t2\tgratitude\t0\t15\n"
        "vid-2\t1\tcompliment\t0\t17\n"
        "vid-2\t2\tpositive feedback\t0\t22\n",
        encoding="utf-8",
    )

    corpus = parse_corpus(
        workdir / "comments.tsv",
        labels_file=workdir / "labels.tsv",
        spans_file=workdir / "spans.tsv",
    )
    print(f"parsed {len(corpus)} comments")
    for ac in corpus:
        print(f"  {ac.key} candy={ac.is_candy} spans={[(s.start, s.end, s.candy_type.name) for s in ac.spans]}")

    # validation returns violations as data instead of raising
    print("\nviolations:", [v.code for v in validate(corpus)] or "none")

    # deduplication collapses identical (text, label) groups and keeps
    # same-text/different-label groups untouched
    deduped, report = deduplicate(corpus)
    print(
        f"\ndedup removed {report.removed_count} comments "
        f"({report.duplicate_group_count} groups); "
        f"{report.retained_conflict_comment_count} conflicting comments retained"
    )
    for text, members in report.retained_conflicts:
        print(f"  conflict {text!r}: {list(members)}")

    stats = corpus_stats(deduped)
    print("\nstatistics:")
    for key, value in stats.to_record().items():
        print(f"  {key} = {value}")

    # writing and re-parsing is the identity on validated corpora
    write_corpus(
        deduped,
        workdir / "out_comments.tsv",
        workdir / "out_labels.tsv",
        workdir / "out_spans.tsv",
    )
    reparsed = parse_corpus(
        workdir / "out_comments.tsv",
        labels_file=workdir / "out_labels.tsv",
        spans_file=workdir / "out_spans.tsv",
    )
    print(f"\nround trip identical: {reparsed == deduped}")


if __name__ == "__main__":
    main()
