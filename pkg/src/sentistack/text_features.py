"""Sparse lexical features: tokenizer, TF-IDF fitting and transforms.

The weighting is the smoothed variant

    idf(t) = ln((1 + N) / (1 + df(t))) + 1

applied to raw in-document counts, followed by L2 row normalization.
The vocabulary is ordered lexicographically by code point so that
feature indices are reproducible without reference to insertion order.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimMismatch, EmptyVocabulary

# Maximal runs of Unicode letters and digits. \w minus the underscore.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str, ngram_max: int = 1) -> list[str]:
    """Split into unigram tokens, then append joined n-grams up to ngram_max.

    Order is the document order of the unigrams followed by each n-gram
    size in turn; n-grams are contiguous unigram runs joined by a single
    space and never cross the whole-document boundary.
    """
    words = _TOKEN_RE.findall(text)
    if ngram_max <= 1:
        return words
    out = list(words)
    for n in range(2, ngram_max + 1):
        for i in range(len(words) - n + 1):
            out.append(" ".join(words[i:i + n]))
    return out


@dataclass
class TfidfConfig:
    min_df: int = 1
    ngram_max: int = 1


@dataclass
class SparseVector:
    """Sorted-coordinate sparse row."""

    dim: int
    indices: np.ndarray  # int64, strictly increasing
    values: np.ndarray  # float64

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim, dtype=np.float64)
        out[self.indices] = self.values
        return out

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.values ** 2)))


@dataclass
class TfidfModel:
    vocabulary: list[str]  # lexicographically sorted
    idf: np.ndarray  # float64, aligned with vocabulary
    config: TfidfConfig = field(default_factory=TfidfConfig)
    n_documents: int = 0

    @property
    def dim(self) -> int:
        return len(self.vocabulary)

    def index_of(self, token: str) -> int:
        return self._index.get(token, -1)

    def __post_init__(self):
        self._index = {t: i for i, t in enumerate(self.vocabulary)}


def _as_texts(corpus) -> list[str]:
    if hasattr(corpus, "documents"):
        return [d.text for d in corpus.documents]
    return list(corpus)


def fit_tfidf(corpus, config: TfidfConfig | None = None) -> TfidfModel:
    """Fit vocabulary and idf weights on training texts.

    Document frequency counts each token once per document. Tokens below
    min_df are discarded; an empty surviving vocabulary is an error.
    """
    config = config or TfidfConfig()
    texts = _as_texts(corpus)
    n = len(texts)
    df: dict[str, int] = {}
    for text in texts:
        for token in set(tokenize(text, config.ngram_max)):
            df[token] = df.get(token, 0) + 1
    vocab = sorted(t for t, c in df.items() if c >= config.min_df)
    if not vocab:
        raise EmptyVocabulary(
            f"no token met min_df={config.min_df} over {n} documents")
    idf = np.array(
        [math.log((1 + n) / (1 + df[t])) + 1.0 for t in vocab], dtype=np.float64)
    return TfidfModel(vocabulary=vocab, idf=idf, config=config, n_documents=n)


def transform_tfidf(model: TfidfModel, text: str) -> SparseVector:
    """Weight in-vocabulary token counts by idf and L2-normalize.

    Out-of-vocabulary tokens are ignored. A document with no known
    tokens maps to the zero vector (norm 0 stays 0).
    """
    counts: dict[int, int] = {}
    for token in tokenize(text, model.config.ngram_max):
        j = model.index_of(token)
        if j >= 0:
            counts[j] = counts.get(j, 0) + 1
    if not counts:
        return SparseVector(dim=model.dim,
                            indices=np.empty(0, dtype=np.int64),
                            values=np.empty(0, dtype=np.float64))
    indices = np.array(sorted(counts), dtype=np.int64)
    values = np.array([counts[j] for j in indices], dtype=np.float64)
    values *= model.idf[indices]
    norm = np.sqrt(np.sum(values ** 2))
    if norm > 0:
        values /= norm
    return SparseVector(dim=model.dim, indices=indices, values=values)


def transform_many(model: TfidfModel, texts: Iterable[str]) -> list[SparseVector]:
    return [transform_tfidf(model, t) for t in texts]


def sparse_matrix(vectors: Sequence[SparseVector]) -> np.ndarray:
    """Stack sparse rows into a dense float64 matrix."""
    if not vectors:
        return np.zeros((0, 0), dtype=np.float64)
    dim = vectors[0].dim
    out = np.zeros((len(vectors), dim), dtype=np.float64)
    for i, v in enumerate(vectors):
        if v.dim != dim:
            raise DimMismatch(f"row {i} has dim {v.dim}, expected {dim}")
        out[i, v.indices] = v.values
    return out
