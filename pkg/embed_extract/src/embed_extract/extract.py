"""The extract operation: corpus CSV in, EMB1 table out."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .corpus_csv import load_rows
from .emb1 import POOLING_TAGS, write_table
from .encoder import DEFAULT_MODEL, embed_batch, load_encoder
from .errors import ConfigError


@dataclass
class ExtractorConfig:
    corpus: str
    out: str
    model_id: str = DEFAULT_MODEL
    pooling: str = "mean"
    max_length: int = 512
    batch_size: int = 16
    text_col: str = "text"
    label_col: Optional[str] = "label"

    def validate(self) -> None:
        if self.pooling not in POOLING_TAGS:
            raise ConfigError(f"unknown pooling {self.pooling!r}; "
                              f"expected one of: {', '.join(sorted(POOLING_TAGS))}")
        if self.max_length < 1:
            raise ConfigError(f"max length must be at least 1, got {self.max_length}")
        if self.batch_size < 1:
            raise ConfigError(f"batch size must be at least 1, got {self.batch_size}")


def extract(config: ExtractorConfig) -> int:
    """Encode every retained corpus row and write the table. Returns the count."""
    config.validate()
    rows = load_rows(config.corpus, config.text_col, config.label_col)
    tokenizer, model = load_encoder(config.model_id)

    table: dict[int, np.ndarray] = {}
    dim = 0
    for start in range(0, len(rows), config.batch_size):
        chunk = rows[start:start + config.batch_size]
        vectors = embed_batch(tokenizer, model, [r.text for r in chunk],
                              config.max_length, config.pooling)
        dim = vectors.shape[1]
        for row, vec in zip(chunk, vectors):
            table[row.id] = vec
    if not table:
        dim = int(model.config.hidden_size)

    write_table(config.out, dim, POOLING_TAGS[config.pooling],
                config.model_id, table)
    return len(table)
