"""The verify operation: check an EMB1 file against its source corpus.

Coverage means every retained corpus row has a record in the file.
Dimension, id order, finiteness, and exact sizing are enforced by the
format reader; any reader failure is reported rather than raised so a
verification run always ends with a verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .corpus_csv import load_rows
from .emb1 import read_table
from .errors import DataError


@dataclass
class VerifyReport:
    ok: bool
    lines: list[str] = field(default_factory=list)

    def render(self) -> str:
        return "\n".join(self.lines)


def verify(emb_path: str, corpus_path: str, text_col: str = "text",
           label_col: Optional[str] = "label") -> VerifyReport:
    lines: list[str] = []
    try:
        table = read_table(emb_path)
    except DataError as err:
        return VerifyReport(ok=False, lines=[f"invalid table: {err}"])
    rows = load_rows(corpus_path, text_col, label_col)

    present = {rec_id for rec_id, _ in table.records}
    missing = [r for r in rows if r.id not in present]
    for r in missing:
        lines.append(f"missing id {r.id:016x} (source row {r.source_row})")
    extras = len(present) - (len(rows) - len(missing))
    if extras:
        lines.append(f"note: {extras} record(s) not referenced by the corpus")

    covered = len(rows) - len(missing)
    if missing:
        lines.append(f"FAIL, {covered}/{len(rows)} covered")
        return VerifyReport(ok=False, lines=lines)
    lines.append(f"OK, {covered}/{len(rows)} covered "
                 f"(dim {table.dim}, model {table.model_id!r})")
    return VerifyReport(ok=True, lines=lines)
