"""File formats shared with the candyspan toolkit.

The bridge talks to the toolkit only through files: comments TSV in, the
line-delimited token/tag interchange format in and out. This module holds
the bridge's own reader/writer for those formats plus the fixed 21-name
tag registry (byte-identical to the toolkit's names).
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

CANDY_TYPES = (
    "positive_feedback",
    "compliment",
    "affection_declaration",
    "encouragement",
    "gratitude",
    "agreement",
    "ambiguous",
    "implicit",
    "group_membership",
    "sympathy",
)

TAG_NAMES: tuple[str, ...] = ("O",) + tuple(
    f"{kind}-{candy_type}" for candy_type in CANDY_TYPES for kind in ("B", "I")
)
TAG_IDS = {name: i for i, name in enumerate(TAG_NAMES)}
OUTSIDE_ID = 0


@dataclass(frozen=True)
class CommentRow:
    document: str
    comment_id: int
    text: str

    @property
    def key(self) -> tuple[str, int]:
        return (self.document, self.comment_id)


@dataclass(frozen=True)
class Record:
    """One interchange record: token offsets and (optionally) tag names."""

    document: str
    comment_id: int
    tokens: tuple[tuple[int, int, bool], ...]
    tags: tuple[str, ...] | None = None

    @property
    def key(self) -> tuple[str, int]:
        return (self.document, self.comment_id)


def _unescape(raw: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= len(raw):
            raise ValueError("dangling backslash")
        marker = raw[i + 1]
        mapped = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(marker)
        if mapped is None:
            raise ValueError(f"unknown escape sequence \\{marker}")
        out.append(mapped)
        i += 2
    return "".join(out)


def read_comments_tsv(path: str | Path) -> list[CommentRow]:
    rows: list[CommentRow] = []
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().rstrip("\n")
        if header.split("\t") != ["document", "comment_id", "comment"]:
            raise ValueError(f"{path}: unexpected comments header {header!r}")
        for lineno, line in enumerate(handle, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            columns = line.split("\t")
            if len(columns) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 columns")
            rows.append(CommentRow(columns[0], int(columns[1]), _unescape(columns[2])))
    return rows


def _check_tokens(path, lineno, tokens) -> tuple[tuple[int, int, bool], ...]:
    previous_end = None
    checked = []
    for i, entry in enumerate(tokens):
        if (
            not isinstance(entry, list)
            or len(entry) != 3
            or not isinstance(entry[0], int)
            or not isinstance(entry[1], int)
            or not isinstance(entry[2], bool)
        ):
            raise ValueError(f"{path}:{lineno}: token {i} malformed")
        start, end, continuation = entry
        if start < 0 or start >= end:
            raise ValueError(f"{path}:{lineno}: bad token range [{start}, {end})")
        if previous_end is not None and start < previous_end:
            raise ValueError(f"{path}:{lineno}: overlapping tokens at {i}")
        if i == 0 and continuation:
            raise ValueError(f"{path}:{lineno}: first token flagged as continuation")
        previous_end = end
        checked.append((start, end, continuation))
    return tuple(checked)


def read_interchange(path: str | Path, require_tags: bool = True) -> list[Record]:
    """Read interchange records; tag names outside the registry are rejected."""
    records: list[Record] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            payload = json.loads(line)
            tokens = _check_tokens(path, lineno, payload.get("tokens", []))
            raw_tags = payload.get("tags")
            tags: tuple[str, ...] | None = None
            if raw_tags is not None:
                if len(raw_tags) != len(tokens):
                    raise ValueError(
                        f"{path}:{lineno}: {len(raw_tags)} tags for {len(tokens)} tokens"
                    )
                for name in raw_tags:
                    if name not in TAG_IDS:
                        raise ValueError(f"{path}:{lineno}: unknown tag name {name!r}")
                tags = tuple(raw_tags)
            elif require_tags:
                raise ValueError(f"{path}:{lineno}: missing tags field")
            records.append(
                Record(payload["document"], payload["comment_id"], tokens, tags)
            )
    return records


def write_interchange(records: Iterable[Record], path: str | Path) -> None:
    """Write records atomically: temp file in the target directory + rename."""
    path = Path(path)
    descriptor, temp_name = tempfile.mkstemp(
        prefix=f".{path.name}.", dir=path.parent or "."
    )
    try:
        with os.fdopen(descriptor, "w", encoding="utf-8", newline="") as handle:
            for record in records:
                payload = {
                    "document": record.document,
                    "comment_id": record.comment_id,
                    "tokens": [list(token) for token in record.tokens],
                }
                if record.tags is not None:
                    payload["tags"] = list(record.tags)
                handle.write(json.dumps(payload, ensure_ascii=False, separators=(",", ":")) + "\n")
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
