"""The EMB1 embedding-table format, writer and validating reader.

Little-endian throughout:

    magic   4 bytes  "EMB1"
    u16     format version (1)
    u16     pooling tag (0 = mean over tokens, 1 = first token)
    u32     embedding dimension
    u32     record count
    u16     model id byte length, then that many UTF-8 bytes
    then count records of [u64 document id][dim float32 values],
    sorted by strictly ascending document id.

The reader validates everything it can cheaply: magic, version, exact
payload size, id order, finiteness. Files are written atomically.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import BadMagic, DataError, NonFinite, Truncated

MAGIC = b"EMB1"
FORMAT_VERSION = 1
POOLING_TAGS = {"mean": 0, "first": 1}
_HEADER = "<HHIIH"


@dataclass
class Table:
    dim: int
    pooling_tag: int
    model_id: str
    records: list[tuple[int, np.ndarray]]  # ascending id, float32 rows


def write_table(path: str, dim: int, pooling_tag: int, model_id: str,
                rows: dict[int, np.ndarray]) -> None:
    model_bytes = model_id.encode("utf-8")
    if len(model_bytes) > 0xFFFF:
        raise DataError("model id is longer than 65535 bytes")
    header = MAGIC + struct.pack(_HEADER, FORMAT_VERSION, pooling_tag, dim,
                                 len(rows), len(model_bytes)) + model_bytes
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        for rec_id in sorted(rows):
            vec = np.asarray(rows[rec_id], dtype="<f4")
            if vec.shape != (dim,):
                raise DataError(
                    f"row for id {rec_id:016x} has shape {vec.shape}, expected ({dim},)")
            if not np.all(np.isfinite(vec)):
                raise NonFinite(f"row for id {rec_id:016x} contains non-finite values")
            fh.write(struct.pack("<Q", rec_id))
            fh.write(vec.tobytes())
    os.replace(tmp, path)


def read_table(path: str) -> Table:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise BadMagic(f"{path}: expected magic {MAGIC!r}, found {blob[:4]!r}")
    fixed = 4 + struct.calcsize(_HEADER)
    if len(blob) < fixed:
        raise Truncated(f"{path}: header cut short at {len(blob)} bytes")
    version, pooling_tag, dim, count, model_len = struct.unpack_from(_HEADER, blob, 4)
    if version != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported format version {version}")
    if pooling_tag not in POOLING_TAGS.values():
        raise DataError(f"{path}: unknown pooling tag {pooling_tag}")
    offset = fixed
    if len(blob) < offset + model_len:
        raise Truncated(f"{path}: model id cut short")
    model_id = blob[offset:offset + model_len].decode("utf-8")
    offset += model_len

    record_size = 8 + 4 * dim
    expected = offset + count * record_size
    if len(blob) < expected:
        raise Truncated(f"{path}: expected {expected} bytes for {count} records "
                        f"of dim {dim}, found {len(blob)}")
    if len(blob) > expected:
        raise DataError(f"{path}: {len(blob) - expected} trailing bytes after payload")

    records: list[tuple[int, np.ndarray]] = []
    previous = -1
    for i in range(count):
        base = offset + i * record_size
        (rec_id,) = struct.unpack_from("<Q", blob, base)
        if rec_id <= previous:
            raise DataError(f"{path}: record {i} id {rec_id:016x} is not strictly ascending")
        previous = rec_id
        vec = np.frombuffer(blob, dtype="<f4", count=dim, offset=base + 8).copy()
        if not np.all(np.isfinite(vec)):
            raise NonFinite(f"{path}: record {i} (id {rec_id:016x}) contains "
                            f"non-finite values")
        records.append((rec_id, vec))
    return Table(dim=dim, pooling_tag=pooling_tag, model_id=model_id,
                 records=records)
