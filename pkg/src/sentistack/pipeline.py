"""Feature pipeline: fit on training rows only, transform any document.

A pipeline couples a fitted TF-IDF model with, for the hybrid feature
set, a standardizer over the dense embedding columns. Learners consume
the stacked dense matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import Document, LabeledCorpus, normalize_text
from .embedding_store import (DenseScaler, EmbeddingTable, fit_scaler, fuse,
                              fused_matrix)
from .errors import ConfigError, LengthMismatch
from .text_features import (SparseVector, TfidfConfig, TfidfModel, fit_tfidf,
                            transform_tfidf)

FEATURE_SETS = ("tfidf", "tfidf+emb")


@dataclass
class FeaturePipeline:
    feature_set: str
    tfidf: TfidfModel
    scaler: Optional[DenseScaler] = None
    emb_model_id: str = ""
    emb_pooling: int = 0
    standardize: bool = True

    @property
    def dim(self) -> int:
        dense = self.scaler.dim if self.scaler is not None else 0
        return self.tfidf.dim + dense

    def uses_embeddings(self) -> bool:
        return self.feature_set == "tfidf+emb"


def fit_pipeline(corpus: LabeledCorpus, train_positions: Sequence[int],
                 feature_set: str, tfidf_config: Optional[TfidfConfig] = None,
                 table: Optional[EmbeddingTable] = None,
                 standardize: bool = True) -> FeaturePipeline:
    """Fit TF-IDF (and the dense scaler) on the training rows only.

    With standardize off the dense block passes through raw (identity
    scaler), which reproduces plain block concatenation.
    """
    if feature_set not in FEATURE_SETS:
        raise ConfigError(
            f"unknown feature set {feature_set!r}; expected one of {FEATURE_SETS}")
    train_docs = [corpus.documents[int(i)] for i in train_positions]
    tfidf = fit_tfidf([d.text for d in train_docs], tfidf_config)
    if feature_set == "tfidf":
        return FeaturePipeline(feature_set=feature_set, tfidf=tfidf)
    if table is None:
        raise ConfigError("feature set 'tfidf+emb' requires an embedding table")
    if standardize:
        scaler = fit_scaler(table, [d.id for d in train_docs])
    else:
        scaler = DenseScaler(mean=np.zeros(table.dim), stdev=np.ones(table.dim))
    return FeaturePipeline(feature_set=feature_set, tfidf=tfidf, scaler=scaler,
                           emb_model_id=table.model_id,
                           emb_pooling=int(table.pooling),
                           standardize=standardize)


def matrix_for(pipeline: FeaturePipeline, docs: Sequence[Document],
               table: Optional[EmbeddingTable] = None) -> np.ndarray:
    """Dense feature matrix for already-normalized documents, row-aligned."""
    sparse = [transform_tfidf(pipeline.tfidf, d.text) for d in docs]
    if not pipeline.uses_embeddings():
        out = np.zeros((len(docs), pipeline.tfidf.dim), dtype=np.float64)
        for i, v in enumerate(sparse):
            out[i, v.indices] = v.values
        return out
    if table is None:
        raise ConfigError("this pipeline was fitted with embeddings; none supplied")
    fused = [fuse(s, table.lookup(d.id), pipeline.scaler)
             for s, d in zip(sparse, docs)]
    return fused_matrix(fused)


def row_for(pipeline: FeaturePipeline, text: str,
            embedding: Optional[np.ndarray] = None) -> np.ndarray:
    """Feature row for one raw text (normalized here) plus its embedding."""
    sparse = transform_tfidf(pipeline.tfidf, normalize_text(text))
    if not pipeline.uses_embeddings():
        return sparse.to_dense()
    if embedding is None:
        raise LengthMismatch(
            f"this pipeline needs a dense embedding of dim {pipeline.scaler.dim}")
    return fuse(sparse, embedding, pipeline.scaler).to_dense()
