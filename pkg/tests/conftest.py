"""Shared fixtures: tiny corpora on disk and the bundled benchmark."""

import csv
import pathlib

import numpy as np
import pytest

from sentistack.corpus import ColumnSchema, load_corpus, preprocess
from sentistack.embedding_store import load_embeddings

REPO = pathlib.Path(__file__).resolve().parents[1]
BENCH_CORPUS = REPO / "data" / "benchmark_corpus.csv"
BENCH_EMB = REPO / "data" / "benchmark_embeddings.emb1"


def write_csv(path, rows, header=("text", "label")):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


@pytest.fixture
def tiny_csv(tmp_path):
    """Nine documents, three per class, no preprocessing surprises."""
    rows = [
        ("malo pesimo horrible", "negative"),
        ("terrible malo lento", "negative"),
        ("pesimo defecto roto", "negative"),
        ("normal regular aceptable", "neutral"),
        ("regular corriente normal", "neutral"),
        ("aceptable comun corriente", "neutral"),
        ("bueno excelente genial", "positive"),
        ("perfecto bueno rapido", "positive"),
        ("excelente recomendado perfecto", "positive"),
    ]
    return write_csv(tmp_path / "tiny.csv", rows)


@pytest.fixture
def tiny_corpus(tiny_csv):
    return preprocess(load_corpus(tiny_csv, ColumnSchema()))


@pytest.fixture(scope="session")
def bench_corpus():
    return preprocess(load_corpus(BENCH_CORPUS, ColumnSchema()))


@pytest.fixture(scope="session")
def bench_table():
    return load_embeddings(BENCH_EMB)


def blobs(n_per_class, centers, scale=0.6, seed=0):
    """Gaussian blobs around the given centers; returns (X, y)."""
    rng = np.random.default_rng(seed)
    xs, ys = [], []
    for cls, center in enumerate(centers):
        xs.append(rng.normal(0.0, scale, size=(n_per_class, len(center))) + center)
        ys.append(np.full(n_per_class, cls))
    return np.vstack(xs), np.concatenate(ys)
