"""Corpus CSV loading with the classifier's retention rules.

A row survives when its normalized text is non-empty, its label cell is
non-empty (only when a label column is named), and its content id has
not been seen before. Duplicate ids from the SAME normalized text are
silently skipped, matching the classifier's dedup; the same id from two
DIFFERENT texts is a hash collision and aborts loudly, because silently
overwriting either embedding would corrupt the join.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

from .errors import DataError, IdCollision
from .normalize import doc_id, normalize_text


@dataclass
class Row:
    source_row: int  # 1-based CSV line number, header included
    id: int
    text: str  # normalized


def load_rows(path: str, text_col: str = "text",
              label_col: Optional[str] = "label") -> list[Row]:
    rows: list[Row] = []
    seen: dict[int, str] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if text_col not in fields:
            raise DataError(f"column {text_col!r} not found in {path} (have: {fields})")
        if label_col is not None and label_col not in fields:
            raise DataError(f"column {label_col!r} not found in {path} (have: {fields})")
        for record in reader:
            text = normalize_text(record[text_col] or "")
            if not text:
                continue
            if label_col is not None and not (record[label_col] or "").strip():
                continue
            rid = doc_id(text)
            if rid in seen:
                if seen[rid] != text:
                    raise IdCollision(
                        f"id {rid:016x} produced by two distinct texts:\n"
                        f"  {seen[rid]!r}\n  {text!r}")
                continue
            seen[rid] = text
            rows.append(Row(source_row=reader.line_num, id=rid, text=text))
    return rows
