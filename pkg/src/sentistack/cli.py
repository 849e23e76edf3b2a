"""Command-line entry point and experiment orchestration.

Subcommands: train, evaluate, predict, grid-search, compare, folds.
Configuration comes from an optional JSON file plus flag overrides;
the fully resolved configuration is written next to every output so a
run can be reproduced from its artifacts alone. Exit codes: 0 success,
2 configuration error, 3 data error, 4 training failure.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .bundle import (ModelBundle, canonical_json, config_hash,
                     corpus_fingerprint, load_bundle, save_bundle)
from .corpus import (ColumnSchema, LabeledCorpus, Label, doc_id, load_corpus,
                     make_folds, normalize_text, preprocess, split_corpus)
from .embedding_store import EmbeddingTable, load_embeddings
from .errors import (ConfigError, DataError, FeatureSetMismatch,
                     MissingEmbedding, SentistackError, TrainingError)
from .evaluation import (DEFAULT_CSE_GRID, GridSpec, compute_metrics,
                         grid_search, render_text_report, report_to_dict)
from .models import (MODEL_KINDS, coerce_param_value, predict_labels,
                     predict_proba, resolve_params, train_model, valid_keys)
from .pipeline import FEATURE_SETS, TfidfConfig, fit_pipeline, matrix_for, row_for
from .rand import derive_seed
from .stacking import CseModel

DEFAULT_SEED = 7


@dataclass
class ExperimentConfig:
    corpus: Optional[str] = None
    text_col: str = "text"
    label_col: str = "label"
    embeddings: Optional[str] = None
    features: str = "tfidf"
    model: str = "cse"
    seed: int = DEFAULT_SEED
    test_fraction: float = 0.2
    stratified: bool = True
    folds: int = 5
    min_df: int = 1
    ngram_max: int = 1
    standardize: bool = True
    params: dict = field(default_factory=dict)
    grid: Optional[dict] = None
    grid_metric: str = "accuracy"
    models: Optional[list] = None  # compare: defaults to all five
    feature_sets: Optional[list] = None  # compare: defaults to both
    out_dir: str = "out"
    stamp: bool = False
    macro: bool = False

    def resolved(self) -> dict:
        """Plain dict of everything that affects results, for hashing and audit."""
        return {
            "corpus": self.corpus, "text_col": self.text_col,
            "label_col": self.label_col, "embeddings": self.embeddings,
            "features": self.features, "model": self.model, "seed": self.seed,
            "test_fraction": self.test_fraction, "stratified": self.stratified,
            "folds": self.folds, "min_df": self.min_df,
            "ngram_max": self.ngram_max, "standardize": self.standardize,
            "params": resolve_params(self.model, self.params),
        }


_CONFIG_KEYS = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path} is not valid JSON: {err}") from err
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    for key in data:
        if key not in _CONFIG_KEYS:
            raise ConfigError(
                f"{path}: unknown config key {key!r}; "
                f"valid keys: {', '.join(sorted(_CONFIG_KEYS))}")
    return data


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """File settings first, then flag overrides, then validation."""
    settings: dict[str, Any] = {}
    if getattr(args, "config", None):
        settings.update(_load_config_file(args.config))

    for name in ("corpus", "embeddings", "features", "model", "seed",
                 "test_fraction", "folds", "out_dir", "text_col", "label_col",
                 "min_df", "ngram_max", "grid_metric"):
        value = getattr(args, name.replace("-", "_"), None)
        if value is not None:
            settings[name] = value
    if getattr(args, "stratified", None) is not None:
        settings["stratified"] = args.stratified == "true"
    if getattr(args, "no_standardize", False):
        settings["standardize"] = False
    if getattr(args, "stamp", False):
        settings["stamp"] = True
    if getattr(args, "macro", False):
        settings["macro"] = True

    params = dict(settings.get("params") or {})
    for item in getattr(args, "param", None) or []:
        if "=" not in item:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        params[key.strip()] = coerce_param_value(value)
    settings["params"] = params

    cfg = ExperimentConfig(**settings)
    if cfg.features not in FEATURE_SETS:
        raise ConfigError(
            f"unknown feature set {cfg.features!r}; expected one of {FEATURE_SETS}")
    if cfg.model not in MODEL_KINDS:
        raise ConfigError(
            f"unknown model {cfg.model!r}; expected one of {MODEL_KINDS}")
    if not (0.0 < cfg.test_fraction < 1.0):
        raise ConfigError(f"test-fraction must be in (0, 1), got {cfg.test_fraction}")
    if cfg.folds < 2:
        raise ConfigError(f"folds must be at least 2, got {cfg.folds}")
    if cfg.features == "tfidf+emb" and not cfg.embeddings:
        raise ConfigError("feature set 'tfidf+emb' requires --embeddings")
    resolve_params(cfg.model, cfg.params)  # fail on foreign keys before any compute
    return cfg


# -- small IO helpers --------------------------------------------------------


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_json(path: str, obj: Any) -> None:
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True,
                                   ensure_ascii=False) + "\n")


def _require_corpus(cfg: ExperimentConfig) -> LabeledCorpus:
    if not cfg.corpus:
        raise ConfigError("no corpus given; pass --corpus or set it in the config")
    raw = load_corpus(cfg.corpus, ColumnSchema(cfg.text_col, cfg.label_col))
    return preprocess(raw)


def _load_table(cfg: ExperimentConfig) -> Optional[EmbeddingTable]:
    if cfg.features != "tfidf+emb":
        return None
    return load_embeddings(cfg.embeddings)


def _stamp(cfg: ExperimentConfig) -> Optional[str]:
    if not cfg.stamp:
        return None
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _predictions_rows(corpus: LabeledCorpus, positions, labels, probs) -> str:
    out = ["id\ttrue_label\tpredicted_label\tp_negative\tp_neutral\tp_positive"]
    for row, pos in enumerate(positions):
        d = corpus.documents[int(pos)]
        truth = Label(int(d.label)).name.lower() if d.label is not None else ""
        p = [float(v) for v in probs[row]]
        out.append(f"{d.id:016x}\t{truth}\t{Label(int(labels[row])).name.lower()}"
                   f"\t{p[0]!r}\t{p[1]!r}\t{p[2]!r}")
    return "\n".join(out) + "\n"


# -- subcommands -------------------------------------------------------------


def cmd_train(cfg: ExperimentConfig) -> int:
    corpus = _require_corpus(cfg)
    table = _load_table(cfg)
    split = split_corpus(corpus, cfg.test_fraction, cfg.seed, cfg.stratified)
    pipeline = fit_pipeline(corpus, split.train_indices, cfg.features,
                            TfidfConfig(cfg.min_df, cfg.ngram_max), table,
                            cfg.standardize)
    train_docs = [corpus.documents[int(i)] for i in split.train_indices]
    test_docs = [corpus.documents[int(i)] for i in split.test_indices]
    X_train = matrix_for(pipeline, train_docs, table)
    y = corpus.labels()
    model = train_model(cfg.model, X_train, y[split.train_indices], cfg.params,
                        seed=derive_seed(cfg.seed, "train"))
    if isinstance(model, CseModel):
        model.pipeline = pipeline

    resolved = cfg.resolved()
    os.makedirs(cfg.out_dir, exist_ok=True)
    bundle = ModelBundle(
        model_kind=cfg.model, pipeline=pipeline, model=model, config=resolved,
        corpus_print=corpus_fingerprint(d.id for d in corpus.documents),
        stamp=_stamp(cfg))
    bundle_path = os.path.join(cfg.out_dir, "model.ssb")
    save_bundle(bundle_path, bundle)
    _write_json(os.path.join(cfg.out_dir, "resolved_config.json"),
                {**resolved, "config_hash": config_hash(resolved)})

    report = None
    if len(split.test_indices):
        X_test = matrix_for(pipeline, test_docs, table)
        labels = predict_labels(model, X_test)
        probs = predict_proba(model, X_test)
        report = compute_metrics(y[split.test_indices], labels)
        _atomic_write(os.path.join(cfg.out_dir, "train_report.txt"),
                      render_text_report(report, macro=cfg.macro))
        _write_json(os.path.join(cfg.out_dir, "train_report.json"),
                    {**report_to_dict(report), "config_hash": config_hash(resolved)})
        _atomic_write(os.path.join(cfg.out_dir, "test_predictions.tsv"),
                      _predictions_rows(corpus, split.test_indices, labels, probs))

    print(f"trained {cfg.model} on {len(train_docs)} documents "
          f"({cfg.features}, dim {pipeline.dim})")
    print(f"bundle: {bundle_path}")
    if report is not None:
        print(f"test accuracy: {report.accuracy:.2f} "
              f"({len(test_docs)} held-out documents)")
    return 0


def _bundle_matrix(bundle: ModelBundle, corpus: LabeledCorpus,
                   embeddings_path: Optional[str]):
    """Feature matrix for a loaded bundle, honoring its feature set."""
    table = None
    if bundle.pipeline.uses_embeddings():
        if not embeddings_path:
            raise FeatureSetMismatch(
                "this bundle was trained on tfidf+emb features; pass --embeddings")
        table = load_embeddings(embeddings_path)
    elif embeddings_path:
        print("warning: bundle uses tfidf features only; --embeddings ignored",
              file=sys.stderr)
    return matrix_for(bundle.pipeline, corpus.documents, table)


def cmd_evaluate(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    bundle = load_bundle(args.bundle)
    corpus = _require_corpus(cfg)
    X = _bundle_matrix(bundle, corpus, cfg.embeddings)
    y = corpus.labels()
    labels = predict_labels(bundle.model, X)
    probs = predict_proba(bundle.model, X)
    report = compute_metrics(y, labels)

    os.makedirs(cfg.out_dir, exist_ok=True)
    _atomic_write(os.path.join(cfg.out_dir, "eval_report.txt"),
                  render_text_report(report, macro=cfg.macro))
    _write_json(os.path.join(cfg.out_dir, "eval_report.json"),
                {**report_to_dict(report),
                 "bundle_config_hash": config_hash(bundle.config)})
    _atomic_write(os.path.join(cfg.out_dir, "eval_predictions.tsv"),
                  _predictions_rows(corpus, range(len(corpus)), labels, probs))
    print(render_text_report(report, macro=cfg.macro), end="")
    return 0


def cmd_predict(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    bundle = load_bundle(args.bundle)
    texts: list[str] = []
    if args.text is not None:
        texts.append(args.text)
    else:
        if not args.input:
            raise ConfigError("pass --text or --input")
        schema = ColumnSchema(cfg.text_col, None)
        got = load_corpus(args.input, schema)
        texts.extend(d.text for d in got.documents)

    table = None
    if bundle.pipeline.uses_embeddings():
        if not cfg.embeddings:
            raise FeatureSetMismatch(
                "this bundle was trained on tfidf+emb features; pass --embeddings")
        table = load_embeddings(cfg.embeddings)
    elif cfg.embeddings:
        print("warning: bundle uses tfidf features only; --embeddings ignored",
              file=sys.stderr)

    lines = ["id\tpredicted_label\tp_negative\tp_neutral\tp_positive"]
    for row, raw in enumerate(texts):
        text = normalize_text(raw)
        did = doc_id(text)
        dense = None
        if table is not None:
            try:
                dense = table.lookup(did)
            except MissingEmbedding:
                raise MissingEmbedding(
                    f"input row {row}: no embedding for document id {did:016x}") from None
        X = row_for(bundle.pipeline, text, dense)[None, :]
        label = Label(int(predict_labels(bundle.model, X)[0]))
        dist = [float(v) for v in predict_proba(bundle.model, X)[0]]
        lines.append(f"{did:016x}\t{label.name.lower()}"
                     f"\t{dist[0]!r}\t{dist[1]!r}\t{dist[2]!r}")
    output = "\n".join(lines) + "\n"
    if args.out:
        _atomic_write(args.out, output)
    else:
        sys.stdout.write(output)
    return 0


def cmd_grid_search(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    if args.grid and args.default_grid:
        raise ConfigError("pass either --grid or --default-grid, not both")
    if args.grid:
        grid_dict = _load_grid_file(args.grid)
    elif args.default_grid:
        grid_dict = {k: list(v) for k, v in DEFAULT_CSE_GRID.items()}
    elif cfg.grid:
        grid_dict = cfg.grid
    else:
        raise ConfigError("no grid given; pass --grid FILE or --default-grid")

    corpus = _require_corpus(cfg)
    table = _load_table(cfg)
    split = split_corpus(corpus, cfg.test_fraction, cfg.seed, cfg.stratified)
    pipeline = fit_pipeline(corpus, split.train_indices, cfg.features,
                            TfidfConfig(cfg.min_df, cfg.ngram_max), table,
                            cfg.standardize)
    train_docs = [corpus.documents[int(i)] for i in split.train_indices]
    X = matrix_for(pipeline, train_docs, table)
    y = corpus.labels()[split.train_indices]
    plan = make_folds(y, k=cfg.folds, seed=derive_seed(cfg.seed, "grid-folds"),
                      stratified=cfg.stratified)

    result = grid_search(GridSpec(grid_dict), cfg.model, X, y, plan,
                         seed=derive_seed(cfg.seed, "grid"),
                         base_params=resolve_params(cfg.model, cfg.params),
                         metric=cfg.grid_metric)

    os.makedirs(cfg.out_dir, exist_ok=True)
    keys = list(grid_dict)
    rows = ["cell\t" + "\t".join(keys) + "\tmean_accuracy\tstd_accuracy"
            "\tmean_weighted_f1\tstd_weighted_f1"]
    for i, cell in enumerate(result.cells):
        values = "\t".join(repr(cell.params[k]) for k in keys)
        rows.append(f"{i}\t{values}\t{cell.cv.mean_accuracy!r}"
                    f"\t{cell.cv.std_accuracy!r}\t{cell.cv.mean_weighted_f1!r}"
                    f"\t{cell.cv.std_weighted_f1!r}")
    _atomic_write(os.path.join(cfg.out_dir, "grid_cells.tsv"),
                  "\n".join(rows) + "\n")

    best_config = {**{k: v for k, v in cfg.resolved().items() if k != "params"},
                   "params": {**cfg.params, **result.best.params}}
    _write_json(os.path.join(cfg.out_dir, "best_config.json"), best_config)

    print(f"evaluated {len(result.cells)} cells x {cfg.folds} folds "
          f"({result.metric})")
    print(f"best cell {result.best_index}: {result.best.params} "
          f"score {result.best.score:.4f}"
          + ("  [tie: first in enumeration order kept]" if result.tie else ""))
    print(f"cell table: {os.path.join(cfg.out_dir, 'grid_cells.tsv')}")
    print(f"best config: {os.path.join(cfg.out_dir, 'best_config.json')}")
    return 0


def _load_grid_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path} is not valid JSON: {err}") from err
    if not isinstance(data, dict) or not all(isinstance(v, list) for v in data.values()):
        raise ConfigError(f"{path} must map parameter names to value lists")
    return data


def cmd_compare(cfg: ExperimentConfig) -> int:
    """Train and score every (model, feature set) pair on one shared split."""
    models = cfg.models or list(MODEL_KINDS)
    feature_sets = cfg.feature_sets or list(FEATURE_SETS)
    for kind in models:
        if kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model {kind!r} in comparison list")
    for fs in feature_sets:
        if fs not in FEATURE_SETS:
            raise ConfigError(f"unknown feature set {fs!r} in comparison list")
    if "tfidf+emb" in feature_sets and not cfg.embeddings:
        raise ConfigError("comparison includes 'tfidf+emb'; pass --embeddings")

    corpus = _require_corpus(cfg)
    split = split_corpus(corpus, cfg.test_fraction, cfg.seed, cfg.stratified)
    y = corpus.labels()
    train_docs = [corpus.documents[int(i)] for i in split.train_indices]
    test_docs = [corpus.documents[int(i)] for i in split.test_indices]

    results: dict[tuple[str, str], Any] = {}
    for fs in feature_sets:
        try:
            table = load_embeddings(cfg.embeddings) if fs == "tfidf+emb" else None
            pipeline = fit_pipeline(corpus, split.train_indices, fs,
                                    TfidfConfig(cfg.min_df, cfg.ngram_max), table,
                                    cfg.standardize)
            X_train = matrix_for(pipeline, train_docs, table)
            X_test = matrix_for(pipeline, test_docs, table)
        except SentistackError as err:
            for kind in models:
                results[(kind, fs)] = err
            print(f"warning: feature set {fs} failed: {err}", file=sys.stderr)
            continue
        for kind in models:
            kind_params = {k: v for k, v in cfg.params.items()
                           if k in valid_keys(kind)}
            try:
                model = train_model(kind, X_train, y[split.train_indices],
                                    kind_params, seed=derive_seed(cfg.seed, "train"))
                report = compute_metrics(
                    y[split.test_indices], predict_labels(model, X_test))
                results[(kind, fs)] = report
            except SentistackError as err:
                results[(kind, fs)] = err
                print(f"warning: {kind} on {fs} failed: {err}", file=sys.stderr)

    os.makedirs(cfg.out_dir, exist_ok=True)
    table_rows = ["model\tfeature_set\taccuracy\tweighted_precision"
                  "\tweighted_recall\tweighted_f1\tseed"]
    plot_rows = ["model\tfeature_set\taccuracy"]
    for kind in models:
        for fs in feature_sets:
            got = results[(kind, fs)]
            if isinstance(got, Exception):
                table_rows.append(f"{kind}\t{fs}\tfailed: {got}\t\t\t\t{cfg.seed}")
                continue
            table_rows.append(
                f"{kind}\t{fs}\t{got.accuracy!r}\t{got.weighted_precision!r}"
                f"\t{got.weighted_recall!r}\t{got.weighted_f1!r}\t{cfg.seed}")
            plot_rows.append(f"{kind}\t{fs}\t{got.accuracy!r}")
    _atomic_write(os.path.join(cfg.out_dir, "comparison.tsv"),
                  "\n".join(table_rows) + "\n")
    _atomic_write(os.path.join(cfg.out_dir, "plot_data.tsv"),
                  "\n".join(plot_rows) + "\n")

    header = "model".ljust(14) + "".join(fs.rjust(12) for fs in feature_sets)
    print(header)
    for kind in models:
        cells = []
        for fs in feature_sets:
            got = results[(kind, fs)]
            cells.append("failed".rjust(12) if isinstance(got, Exception)
                         else f"{got.accuracy:.2f}".rjust(12))
        print(kind.ljust(14) + "".join(cells))
    print(f"details: {os.path.join(cfg.out_dir, 'comparison.tsv')}")
    return 0


def cmd_folds(cfg: ExperimentConfig, out: Optional[str]) -> int:
    corpus = _require_corpus(cfg)
    y = corpus.labels()
    plan = make_folds(y, k=cfg.folds, seed=cfg.seed, stratified=cfg.stratified)
    lines = ["position\tid\tlabel\tfold"]
    for pos, d in enumerate(corpus.documents):
        lines.append(f"{pos}\t{d.id:016x}\t{Label(int(d.label)).name.lower()}"
                     f"\t{plan.assignments[pos]}")
    output = "\n".join(lines) + "\n"
    if out:
        _atomic_write(out, output)
    else:
        sys.stdout.write(output)
    return 0


# -- parser ------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--corpus", help="CSV corpus path")
    p.add_argument("--text-col", dest="text_col", help="text column name")
    p.add_argument("--label-col", dest="label_col", help="label column name")
    p.add_argument("--embeddings", help="EMB1 embedding table path")
    p.add_argument("--features", choices=list(FEATURE_SETS))
    p.add_argument("--model", choices=list(MODEL_KINDS))
    p.add_argument("--seed", type=int)
    p.add_argument("--test-fraction", dest="test_fraction", type=float)
    p.add_argument("--folds", type=int)
    p.add_argument("--stratified", choices=["true", "false"],
                   help="stratify splits and folds (default true)")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="hyperparameter override; repeatable")
    p.add_argument("--min-df", dest="min_df", type=int)
    p.add_argument("--ngram-max", dest="ngram_max", type=int)
    p.add_argument("--no-standardize", dest="no_standardize", action="store_true",
                   help="feed raw embedding coordinates to the learners")
    p.add_argument("--macro", action="store_true",
                   help="report macro instead of weighted averages in text output")
    p.add_argument("--stamp", action="store_true",
                   help="record a wall-clock timestamp in the bundle "
                        "(breaks byte-identical reruns)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sentistack",
        description="Three-class sentiment classification experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model and write a bundle")
    _add_common(p)

    p = sub.add_parser("evaluate", help="score a bundle on a labeled corpus")
    p.add_argument("--bundle", required=True)
    _add_common(p)

    p = sub.add_parser("predict", help="label new texts with a bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--input", help="CSV of texts")
    p.add_argument("--text", help="single text to classify")
    p.add_argument("--out", help="output TSV path (default stdout)")
    _add_common(p)

    p = sub.add_parser("grid-search", help="cross-validated hyperparameter search")
    p.add_argument("--grid", help="JSON file mapping parameter names to value lists")
    p.add_argument("--default-grid", action="store_true",
                   help="use the built-in ensemble search space")
    p.add_argument("--grid-metric", dest="grid_metric",
                   choices=["accuracy", "weighted_f1"])
    _add_common(p)

    p = sub.add_parser("compare", help="models x feature sets on one split")
    _add_common(p)

    p = sub.add_parser("folds", help="print the fold assignment for a corpus")
    p.add_argument("--out", help="output TSV path (default stdout)")
    _add_common(p)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "evaluate":
            return cmd_evaluate(args, cfg)
        if args.command == "predict":
            return cmd_predict(args, cfg)
        if args.command == "grid-search":
            return cmd_grid_search(args, cfg)
        if args.command == "compare":
            return cmd_compare(cfg)
        if args.command == "folds":
            return cmd_folds(cfg, args.out)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except DataError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except TrainingError as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
