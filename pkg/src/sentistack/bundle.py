"""Versioned model bundle: manifest plus typed little-endian sections.

Layout:

    magic   4 bytes  "SSB1"
    u16     format version (1)
    u32     manifest byte length, then that many UTF-8 JSON bytes
    payload sections, back to back, in manifest order

The manifest lists every section with name, kind, shape, offset (into
the payload), and byte length. Numeric sections are little-endian f64,
f32, i64, or i32; "json" sections hold UTF-8 JSON for irregular
artifacts like vocabularies. The experiment configuration is itself a
section; its FNV-1a hash sits in the manifest and is verified on load.

Bundles deliberately carry no timestamp unless one is passed in, so a
rerun with identical inputs produces byte-identical output.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import __version__
from .embedding_store import DenseScaler, Pooling
from .errors import BadMagic, DataError, Truncated
from .learners.adaboost import AdaBoostModel
from .learners.gbdt import BaggedModel, GbdtModel
from .learners.knn import KnnModel
from .learners.logreg import BinaryLogRegModel, LogRegModel
from .learners.tree import DecisionTree
from .pipeline import FeaturePipeline
from .rand import fnv1a_64
from .stacking import BASE_KINDS, CseModel, OvrLogReg
from .text_features import TfidfConfig, TfidfModel

MAGIC = b"SSB1"
FORMAT_VERSION = 1

_DTYPES = {"f64": "<f8", "f32": "<f4", "i64": "<i8", "i32": "<i4"}


def canonical_json(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False).encode("utf-8")


def config_hash(config: dict) -> str:
    return f"{fnv1a_64(canonical_json(config)):016x}"


def corpus_fingerprint(doc_ids) -> str:
    """Order-insensitive corpus identity: hash of the sorted id bytes."""
    blob = b"".join(int(i).to_bytes(8, "little") for i in sorted(doc_ids))
    return f"{fnv1a_64(blob):016x}"


class _Writer:
    def __init__(self):
        self.sections: list[dict] = []
        self.blobs: list[bytes] = []
        self.offset = 0

    def _push(self, name: str, kind: str, shape, blob: bytes) -> None:
        self.sections.append({"name": name, "kind": kind, "shape": list(shape),
                              "offset": self.offset, "nbytes": len(blob)})
        self.blobs.append(blob)
        self.offset += len(blob)

    def array(self, name: str, arr: np.ndarray, kind: str) -> None:
        data = np.ascontiguousarray(arr, dtype=_DTYPES[kind])
        self._push(name, kind, data.shape, data.tobytes())

    def obj(self, name: str, payload: Any) -> None:
        self._push(name, "json", (), canonical_json(payload))


class SectionReader:
    def __init__(self, sections: list[dict], payload: bytes):
        self.entries = {s["name"]: s for s in sections}
        self.payload = payload

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def array(self, name: str) -> np.ndarray:
        entry = self.entries[name]
        dtype = _DTYPES[entry["kind"]]
        flat = np.frombuffer(self.payload, dtype=dtype,
                             count=entry["nbytes"] // np.dtype(dtype).itemsize,
                             offset=entry["offset"])
        return flat.reshape(entry["shape"]).copy()

    def obj(self, name: str) -> Any:
        entry = self.entries[name]
        raw = self.payload[entry["offset"]:entry["offset"] + entry["nbytes"]]
        return json.loads(raw.decode("utf-8"))


# -- tree (de)serialization --------------------------------------------------


def _write_trees(w: _Writer, prefix: str, trees: list[DecisionTree]) -> None:
    counts = np.array([t.n_nodes for t in trees], dtype=np.int64)
    width = trees[0].value.shape[1] if trees else 0
    w.obj(f"{prefix}/meta", {"n_trees": len(trees), "value_width": width})
    w.array(f"{prefix}/node_counts", counts, "i64")
    if trees:
        w.array(f"{prefix}/feature", np.concatenate([t.feature for t in trees]), "i32")
        w.array(f"{prefix}/threshold", np.concatenate([t.threshold for t in trees]), "f64")
        w.array(f"{prefix}/left", np.concatenate([t.left for t in trees]), "i32")
        w.array(f"{prefix}/right", np.concatenate([t.right for t in trees]), "i32")
        w.array(f"{prefix}/value", np.vstack([t.value for t in trees]), "f64")


def _read_trees(r: SectionReader, prefix: str) -> list[DecisionTree]:
    meta = r.obj(f"{prefix}/meta")
    counts = r.array(f"{prefix}/node_counts")
    if meta["n_trees"] == 0:
        return []
    feature = r.array(f"{prefix}/feature")
    threshold = r.array(f"{prefix}/threshold")
    left = r.array(f"{prefix}/left")
    right = r.array(f"{prefix}/right")
    value = r.array(f"{prefix}/value")
    trees = []
    at = 0
    for c in counts:
        c = int(c)
        trees.append(DecisionTree(feature=feature[at:at + c],
                                  threshold=threshold[at:at + c],
                                  left=left[at:at + c], right=right[at:at + c],
                                  value=value[at:at + c]))
        at += c
    return trees


# -- per-kind model sections -------------------------------------------------


def _write_model(w: _Writer, prefix: str, model) -> str:
    if isinstance(model, LogRegModel):
        w.array(f"{prefix}/weights", model.weights, "f64")
        w.array(f"{prefix}/bias", model.bias, "f64")
        w.obj(f"{prefix}/meta", {"c": model.c, "n_iter": model.n_iter,
                                 "converged": model.converged})
        return "logreg"
    if isinstance(model, KnnModel):
        w.array(f"{prefix}/X", model.X, "f64")
        w.array(f"{prefix}/y", model.y, "i64")
        w.obj(f"{prefix}/meta", {"k": model.k, "n_classes": model.n_classes})
        return "knn"
    if isinstance(model, AdaBoostModel):
        _write_trees(w, f"{prefix}/stages", model.stages)
        w.array(f"{prefix}/alphas", model.alphas, "f64")
        w.array(f"{prefix}/stage_errors", model.stage_errors, "f64")
        w.obj(f"{prefix}/meta", {"n_classes": model.n_classes,
                                 "halted_early": model.halted_early})
        return "adaboost"
    if isinstance(model, BaggedModel):
        w.obj(f"{prefix}/meta", {"n_members": len(model.members),
                                 "bootstrap": model.bootstrap, "seed": model.seed,
                                 "n_classes": model.n_classes})
        for m, member in enumerate(model.members):
            _write_gbdt(w, f"{prefix}/member{m}", member)
        return "bagged_gbdt"
    if isinstance(model, CseModel):
        w.obj(f"{prefix}/meta", {"params": model.params, "fold_seed": model.fold_seed,
                                 "fold_k": model.fold_k,
                                 "fold_stratified": model.fold_stratified})
        for kind in BASE_KINDS:
            _write_model(w, f"{prefix}/base/{kind}", model.base_models[kind])
        for k, sub in enumerate(model.meta.models):
            w.array(f"{prefix}/ovr{k}/weights", sub.weights, "f64")
            w.obj(f"{prefix}/ovr{k}/meta", {"bias": sub.bias, "c": sub.c,
                                            "n_iter": sub.n_iter,
                                            "converged": sub.converged})
        return "cse"
    raise TypeError(f"cannot serialize {type(model).__name__}")


def _write_gbdt(w: _Writer, prefix: str, model: GbdtModel) -> None:
    flat = [tree for round_trees in model.trees for tree in round_trees]
    _write_trees(w, f"{prefix}/trees", flat)
    w.array(f"{prefix}/init_scores", model.init_scores, "f64")
    w.array(f"{prefix}/train_loss", model.train_loss, "f64")
    w.obj(f"{prefix}/meta", {"learning_rate": model.learning_rate,
                             "n_rounds": len(model.trees),
                             "n_classes": model.n_classes})


def _read_gbdt(r: SectionReader, prefix: str) -> GbdtModel:
    meta = r.obj(f"{prefix}/meta")
    flat = _read_trees(r, f"{prefix}/trees")
    k = meta["n_classes"]
    rounds = [flat[i:i + k] for i in range(0, len(flat), k)]
    return GbdtModel(init_scores=r.array(f"{prefix}/init_scores"), trees=rounds,
                     learning_rate=meta["learning_rate"],
                     train_loss=r.array(f"{prefix}/train_loss"),
                     n_classes=k)


def _read_model(r: SectionReader, prefix: str, kind: str):
    if kind == "logreg":
        meta = r.obj(f"{prefix}/meta")
        return LogRegModel(weights=r.array(f"{prefix}/weights"),
                           bias=r.array(f"{prefix}/bias"), c=meta["c"],
                           n_iter=meta["n_iter"], converged=meta["converged"])
    if kind == "knn":
        meta = r.obj(f"{prefix}/meta")
        return KnnModel(k=meta["k"], X=r.array(f"{prefix}/X"),
                        y=r.array(f"{prefix}/y"), n_classes=meta["n_classes"])
    if kind == "adaboost":
        meta = r.obj(f"{prefix}/meta")
        return AdaBoostModel(stages=_read_trees(r, f"{prefix}/stages"),
                             alphas=r.array(f"{prefix}/alphas"),
                             stage_errors=r.array(f"{prefix}/stage_errors"),
                             n_classes=meta["n_classes"],
                             halted_early=meta["halted_early"])
    if kind == "bagged_gbdt":
        meta = r.obj(f"{prefix}/meta")
        members = [_read_gbdt(r, f"{prefix}/member{m}")
                   for m in range(meta["n_members"])]
        return BaggedModel(members=members, bootstrap=meta["bootstrap"],
                           seed=meta["seed"], n_classes=meta["n_classes"])
    if kind == "cse":
        meta = r.obj(f"{prefix}/meta")
        bases = {k: _read_model(r, f"{prefix}/base/{k}", k) for k in BASE_KINDS}
        subs = []
        for k in range(3):
            sub_meta = r.obj(f"{prefix}/ovr{k}/meta")
            subs.append(BinaryLogRegModel(
                weights=r.array(f"{prefix}/ovr{k}/weights"), bias=sub_meta["bias"],
                c=sub_meta["c"], n_iter=sub_meta["n_iter"],
                converged=sub_meta["converged"]))
        ovr = OvrLogReg(models=subs, c=subs[0].c if subs else 0.1)
        return CseModel(base_models=bases, meta=ovr, params=meta["params"],
                        fold_seed=meta["fold_seed"], fold_k=meta["fold_k"],
                        fold_stratified=meta["fold_stratified"])
    raise DataError(f"unknown model kind {kind!r} in bundle")


# -- pipeline sections -------------------------------------------------------


def _write_pipeline(w: _Writer, pipeline: FeaturePipeline) -> None:
    w.obj("pipeline/meta", {
        "feature_set": pipeline.feature_set,
        "emb_model_id": pipeline.emb_model_id,
        "emb_pooling": pipeline.emb_pooling,
        "standardize": pipeline.standardize,
        "tfidf": {"min_df": pipeline.tfidf.config.min_df,
                  "ngram_max": pipeline.tfidf.config.ngram_max,
                  "n_documents": pipeline.tfidf.n_documents},
    })
    w.obj("pipeline/vocabulary", pipeline.tfidf.vocabulary)
    w.array("pipeline/idf", pipeline.tfidf.idf, "f64")
    if pipeline.scaler is not None:
        w.array("pipeline/scaler_mean", pipeline.scaler.mean, "f64")
        w.array("pipeline/scaler_stdev", pipeline.scaler.stdev, "f64")


def _read_pipeline(r: SectionReader) -> FeaturePipeline:
    meta = r.obj("pipeline/meta")
    tfidf = TfidfModel(vocabulary=r.obj("pipeline/vocabulary"),
                       idf=r.array("pipeline/idf"),
                       config=TfidfConfig(min_df=meta["tfidf"]["min_df"],
                                          ngram_max=meta["tfidf"]["ngram_max"]),
                       n_documents=meta["tfidf"]["n_documents"])
    scaler = None
    if "pipeline/scaler_mean" in r:
        scaler = DenseScaler(mean=r.array("pipeline/scaler_mean"),
                             stdev=r.array("pipeline/scaler_stdev"))
    return FeaturePipeline(feature_set=meta["feature_set"], tfidf=tfidf,
                           scaler=scaler, emb_model_id=meta["emb_model_id"],
                           emb_pooling=meta["emb_pooling"],
                           standardize=meta.get("standardize", True))


# -- bundle ------------------------------------------------------------------


@dataclass
class ModelBundle:
    model_kind: str
    pipeline: FeaturePipeline
    model: Any
    config: dict = field(default_factory=dict)
    corpus_print: str = ""
    stamp: Optional[str] = None

    @property
    def feature_set(self) -> str:
        return self.pipeline.feature_set


def save_bundle(path: str, bundle: ModelBundle) -> None:
    """Serialize and write atomically (temp file, then rename)."""
    w = _Writer()
    config_blob_name = "config"
    w.obj(config_blob_name, bundle.config)
    _write_pipeline(w, bundle.pipeline)
    kind = _write_model(w, "model", bundle.model)
    if kind != bundle.model_kind:
        raise DataError(
            f"bundle kind {bundle.model_kind!r} does not match payload {kind!r}")
    manifest = {
        "format_version": FORMAT_VERSION,
        "model_kind": bundle.model_kind,
        "feature_set": bundle.feature_set,
        "config_hash": config_hash(bundle.config),
        "corpus_fingerprint": bundle.corpus_print,
        "engine_version": __version__,
        "timestamp": bundle.stamp,
        "sections": w.sections,
    }
    manifest_blob = canonical_json(manifest)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HI", FORMAT_VERSION, len(manifest_blob)))
        fh.write(manifest_blob)
        for blob in w.blobs:
            fh.write(blob)
    os.replace(tmp, path)


def load_bundle(path: str) -> ModelBundle:
    """Read, verify magic, version, and config hash, and rebuild the model."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise BadMagic(f"{path}: expected magic {MAGIC!r}, found {blob[:4]!r}")
    if len(blob) < 10:
        raise Truncated(f"{path}: header cut short")
    version, manifest_len = struct.unpack_from("<HI", blob, 4)
    if version != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported bundle version {version}")
    start = 10
    if len(blob) < start + manifest_len:
        raise Truncated(f"{path}: manifest cut short")
    manifest = json.loads(blob[start:start + manifest_len].decode("utf-8"))
    payload = blob[start + manifest_len:]
    expected = sum(s["nbytes"] for s in manifest["sections"])
    if len(payload) < expected:
        raise Truncated(f"{path}: payload is {len(payload)} bytes, "
                        f"manifest declares {expected}")
    r = SectionReader(manifest["sections"], payload)
    config = r.obj("config")
    if config_hash(config) != manifest["config_hash"]:
        raise DataError(f"{path}: config hash mismatch; bundle is corrupt")
    pipeline = _read_pipeline(r)
    model = _read_model(r, "model", manifest["model_kind"])
    if isinstance(model, CseModel):
        model.pipeline = pipeline
    return ModelBundle(model_kind=manifest["model_kind"], pipeline=pipeline,
                       model=model, config=config,
                       corpus_print=manifest["corpus_fingerprint"],
                       stamp=manifest["timestamp"])
