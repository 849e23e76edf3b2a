"""Dense document embeddings: binary table format, standardization, fusion.

The table file format ("EMB1") is little-endian throughout:

    magic   4 bytes  "EMB1"
    u16     format version (1)
    u16     pooling tag (0 = mean over tokens, 1 = first token)
    u32     embedding dimension
    u32     record count
    u16     model id byte length, then that many UTF-8 bytes
    then count records of [u64 document id][dim float32 values],
    sorted by ascending document id.

Readers validate magic, sortedness, finiteness, and exact payload size,
so a corrupt or truncated file fails loudly instead of training quietly
on garbage.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from .errors import (BadMagic, DataError, DimMismatch, LengthMismatch,
                     MissingEmbedding, NonFinite, Truncated)
from .text_features import SparseVector

MAGIC = b"EMB1"
FORMAT_VERSION = 1
STDEV_FLOOR = 1e-12


class Pooling(IntEnum):
    MEAN = 0
    FIRST_TOKEN = 1


@dataclass
class EmbeddingTable:
    dim: int
    pooling: Pooling
    model_id: str
    rows: dict[int, np.ndarray]  # doc id -> float32 vector of length dim

    def __len__(self) -> int:
        return len(self.rows)

    def lookup(self, doc_id: int) -> np.ndarray:
        try:
            return self.rows[doc_id]
        except KeyError:
            raise MissingEmbedding(f"no embedding for document id {doc_id}") from None

    def add(self, doc_id: int, vector: np.ndarray) -> None:
        vec = np.asarray(vector, dtype=np.float32)
        if vec.shape != (self.dim,):
            raise DimMismatch(f"vector for id {doc_id} has shape {vec.shape}, expected ({self.dim},)")
        if not np.all(np.isfinite(vec)):
            raise NonFinite(f"vector for id {doc_id} contains non-finite values")
        self.rows[doc_id] = vec


def write_embeddings(path: str, table: EmbeddingTable) -> None:
    """Write an EMB1 file atomically (temp file in place, then rename)."""
    model_bytes = table.model_id.encode("utf-8")
    if len(model_bytes) > 0xFFFF:
        raise DataError("model id is longer than 65535 bytes")
    header = MAGIC + struct.pack(
        "<HHIIH", FORMAT_VERSION, int(table.pooling), table.dim,
        len(table.rows), len(model_bytes)) + model_bytes
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        for doc_id in sorted(table.rows):
            vec = np.asarray(table.rows[doc_id], dtype="<f4")
            if vec.shape != (table.dim,):
                raise DimMismatch(
                    f"row for id {doc_id} has shape {vec.shape}, expected ({table.dim},)")
            if not np.all(np.isfinite(vec)):
                raise NonFinite(f"row for id {doc_id} contains non-finite values")
            fh.write(struct.pack("<Q", doc_id))
            fh.write(vec.tobytes())
    os.replace(tmp, path)


def load_embeddings(path: str) -> EmbeddingTable:
    """Read and validate an EMB1 file."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise BadMagic(f"{path}: expected magic {MAGIC!r}, found {blob[:4]!r}")
    fixed_len = 4 + struct.calcsize("<HHIIH")
    if len(blob) < fixed_len:
        raise Truncated(f"{path}: header cut short at {len(blob)} bytes")
    version, pooling_tag, dim, count, model_len = struct.unpack_from("<HHIIH", blob, 4)
    if version != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported format version {version}")
    try:
        pooling = Pooling(pooling_tag)
    except ValueError:
        raise DataError(f"{path}: unknown pooling tag {pooling_tag}") from None
    offset = fixed_len
    if len(blob) < offset + model_len:
        raise Truncated(f"{path}: model id cut short")
    model_id = blob[offset:offset + model_len].decode("utf-8")
    offset += model_len

    record_size = 8 + 4 * dim
    expected = offset + count * record_size
    if len(blob) < expected:
        raise Truncated(
            f"{path}: expected {expected} bytes for {count} records of dim {dim}, "
            f"found {len(blob)}")
    if len(blob) > expected:
        raise DataError(f"{path}: {len(blob) - expected} trailing bytes after payload")

    rows: dict[int, np.ndarray] = {}
    previous = -1
    for i in range(count):
        base = offset + i * record_size
        (doc_id,) = struct.unpack_from("<Q", blob, base)
        if doc_id <= previous:
            raise DataError(
                f"{path}: record {i} id {doc_id} is not strictly ascending")
        previous = doc_id
        vec = np.frombuffer(blob, dtype="<f4", count=dim, offset=base + 8).copy()
        if not np.all(np.isfinite(vec)):
            raise NonFinite(f"{path}: record {i} (id {doc_id}) contains non-finite values")
        rows[doc_id] = vec
    return EmbeddingTable(dim=dim, pooling=pooling, model_id=model_id, rows=rows)


@dataclass
class DenseScaler:
    """Per-dimension standardization fitted on training rows only."""

    mean: np.ndarray  # float64
    stdev: np.ndarray  # float64, floored at STDEV_FLOOR

    @property
    def dim(self) -> int:
        return len(self.mean)

    def transform(self, vector: np.ndarray) -> np.ndarray:
        vec = np.asarray(vector, dtype=np.float64)
        if vec.shape != self.mean.shape:
            raise LengthMismatch(
                f"vector of length {vec.shape} against scaler of dim {self.mean.shape}")
        return (vec - self.mean) / self.stdev


def fit_scaler(table: EmbeddingTable, doc_ids: Iterable[int]) -> DenseScaler:
    """Population mean and stdev over the given (training) document ids."""
    rows = np.stack([table.lookup(i) for i in doc_ids]).astype(np.float64)
    mean = rows.mean(axis=0)
    stdev = rows.std(axis=0)  # ddof=0
    stdev = np.maximum(stdev, STDEV_FLOOR)
    return DenseScaler(mean=mean, stdev=stdev)


@dataclass
class FusedVector:
    """A sparse lexical part next to a standardized dense part."""

    sparse: SparseVector
    dense: np.ndarray  # float64, already standardized

    @property
    def total_dim(self) -> int:
        return self.sparse.dim + len(self.dense)

    def to_dense(self) -> np.ndarray:
        return np.concatenate([self.sparse.to_dense(), self.dense])


def fuse(sparse: SparseVector, dense: np.ndarray, scaler: DenseScaler) -> FusedVector:
    """Standardize the dense part and attach it after the sparse part."""
    vec = np.asarray(dense, dtype=np.float64)
    if vec.shape != scaler.mean.shape:
        raise LengthMismatch(
            f"dense vector of length {len(vec)} against scaler of dim {scaler.dim}")
    return FusedVector(sparse=sparse, dense=scaler.transform(vec))


def fused_matrix(vectors: Sequence[FusedVector]) -> np.ndarray:
    """Stack fused rows into one dense float64 matrix."""
    if not vectors:
        return np.zeros((0, 0), dtype=np.float64)
    total = vectors[0].total_dim
    sparse_dim = vectors[0].sparse.dim
    out = np.zeros((len(vectors), total), dtype=np.float64)
    for i, v in enumerate(vectors):
        if v.total_dim != total or v.sparse.dim != sparse_dim:
            raise DimMismatch(f"row {i} has dim {v.total_dim}, expected {total}")
        out[i, v.sparse.indices] = v.sparse.values
        out[i, sparse_dim:] = v.dense
    return out
