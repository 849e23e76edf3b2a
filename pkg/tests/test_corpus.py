"""Corpus loading, preprocessing, splitting, and fold construction."""

import numpy as np
import pytest

from sentistack.corpus import (
    ColumnSchema,
    Document,
    Label,
    LabeledCorpus,
    _apportion,
    doc_id,
    load_corpus,
    make_folds,
    normalize_text,
    parse_label,
    preprocess,
    split_corpus,
)
from sentistack.errors import (
    KTooLarge,
    MissingColumn,
    TooFewPerClass,
    UnknownLabel,
)

from conftest import write_csv


def test_label_aliases():
    assert parse_label("negative") == Label.NEGATIVE
    assert parse_label("negativo") == Label.NEGATIVE
    assert parse_label("Neutral") == Label.NEUTRAL
    assert parse_label("POSITIVO") == Label.POSITIVE
    assert parse_label("  positive ") == Label.POSITIVE


def test_unknown_label_raises():
    with pytest.raises(UnknownLabel):
        parse_label("meh")


def test_normalize_text_lowercases_and_collapses_whitespace():
    assert normalize_text("  Muy   BUENO\tproducto\n") == "muy bueno producto"
    assert normalize_text("ya") == "ya"
    assert normalize_text(" \t ") == ""


def test_doc_id_tracks_normalized_text():
    a = Document.from_text("Muy  bueno", Label.POSITIVE)
    b = Document.from_text("muy bueno", Label.POSITIVE)
    assert doc_id(normalize_text("Muy  bueno")) == doc_id("muy bueno")
    assert a.text != b.text  # raw text preserved until preprocess


def test_load_corpus_reads_text_and_label(tiny_csv):
    corpus = load_corpus(tiny_csv, ColumnSchema())
    assert len(corpus) == 9
    assert corpus.documents[0].label == Label.NEGATIVE
    assert corpus.documents[-1].label == Label.POSITIVE


def test_load_corpus_missing_column(tmp_path):
    path = write_csv(tmp_path / "bad.csv", [("hola", "x")], header=("body", "label"))
    with pytest.raises(MissingColumn):
        load_corpus(path, ColumnSchema())


def test_load_corpus_custom_columns(tmp_path):
    path = write_csv(tmp_path / "cols.csv", [("hola", "positive")],
                     header=("body", "sentiment"))
    corpus = load_corpus(path, ColumnSchema(text_col="body", label_col="sentiment"))
    assert corpus.documents[0].label == Label.POSITIVE


def test_load_corpus_bad_label_reports_line(tmp_path):
    path = write_csv(tmp_path / "bad.csv",
                     [("bien", "positive"), ("mal", "awful")])
    with pytest.raises(UnknownLabel) as err:
        load_corpus(path, ColumnSchema())
    assert "3" in str(err.value)  # header is line 1


def test_preprocess_drops_and_counts(tmp_path):
    rows = [
        ("Muy bueno", "positive"),
        ("muy  BUENO", "positive"),   # duplicate after normalization
        ("   ", "negative"),          # empty after normalization
        ("sin etiqueta", ""),         # unlabeled
        ("malo", "negative"),
    ]
    path = write_csv(tmp_path / "messy.csv", rows)
    corpus = preprocess(load_corpus(path, ColumnSchema()))
    assert len(corpus) == 2
    assert corpus.provenance.dropped_duplicate == 1
    assert corpus.provenance.dropped_empty == 1
    assert corpus.provenance.dropped_unlabeled == 1
    assert [d.text for d in corpus.documents] == ["muy bueno", "malo"]
    # duplicate resolution keeps the first occurrence
    assert corpus.documents[0].label == Label.POSITIVE


def test_preprocess_is_idempotent(tiny_corpus):
    again = preprocess(tiny_corpus)
    assert [d.id for d in again.documents] == [d.id for d in tiny_corpus.documents]
    assert again.provenance.dropped_duplicate == tiny_corpus.provenance.dropped_duplicate


def test_class_counts(tiny_corpus):
    assert tiny_corpus.class_counts().tolist() == [3, 3, 3]


def test_apportion_largest_remainder_pinned_example():
    # counts (4, 4, 2), 20% test of 10 -> 2 seats -> (1, 1, 0)
    assert _apportion(np.array([4, 4, 2]), 2).tolist() == [1, 1, 0]


def test_apportion_ties_go_to_lower_class():
    # equal counts, one seat: class 0 wins the tie
    assert _apportion(np.array([5, 5]), 1).tolist() == [1, 0]


def test_apportion_conserves_total():
    rng = np.random.default_rng(0)
    for _ in range(50):
        counts = rng.integers(1, 30, size=3)
        total = int(rng.integers(0, counts.sum() + 1))
        seats = _apportion(counts, total)
        assert seats.sum() == total
        assert (seats <= counts).all()


def make_corpus(label_counts):
    docs = []
    for cls, count in enumerate(label_counts):
        for i in range(count):
            docs.append(Document.from_text(f"doc {cls} {i}", Label(cls)))
    return LabeledCorpus(documents=docs, provenance=None)


def test_split_pinned_example():
    corpus = make_corpus([4, 4, 2])
    plan = split_corpus(corpus, 0.2, seed=7)
    labels = corpus.labels()
    test_counts = np.bincount(labels[plan.test_indices], minlength=3)
    assert test_counts.tolist() == [1, 1, 0]
    assert len(plan.test_indices) == 2
    assert len(plan.train_indices) == 8


def test_split_indices_sorted_and_disjoint():
    corpus = make_corpus([10, 10, 10])
    plan = split_corpus(corpus, 0.3, seed=3)
    assert (np.diff(plan.train_indices) > 0).all()
    assert (np.diff(plan.test_indices) > 0).all()
    merged = np.concatenate([plan.train_indices, plan.test_indices])
    assert sorted(merged.tolist()) == list(range(30))


def test_split_deterministic_and_seed_sensitive():
    corpus = make_corpus([8, 8, 8])
    a = split_corpus(corpus, 0.25, seed=1)
    b = split_corpus(corpus, 0.25, seed=1)
    c = split_corpus(corpus, 0.25, seed=2)
    assert a.test_indices.tolist() == b.test_indices.tolist()
    assert a.test_indices.tolist() != c.test_indices.tolist()


def test_split_unstratified_still_partitions():
    corpus = make_corpus([6, 6, 6])
    plan = split_corpus(corpus, 0.5, seed=4, stratified=False)
    assert len(plan.test_indices) == 9
    assert plan.stratified is False


def test_split_rejects_bad_fraction():
    corpus = make_corpus([5, 5, 5])
    for frac in (-0.1, 0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            split_corpus(corpus, frac, seed=0)


def test_split_too_few_per_class():
    corpus = make_corpus([5, 1, 5])
    with pytest.raises(TooFewPerClass):
        split_corpus(corpus, 0.2, seed=0)


def test_split_absent_class_is_fine():
    corpus = make_corpus([5, 5, 0])
    plan = split_corpus(corpus, 0.2, seed=0)
    assert len(plan.test_indices) == 2


def test_folds_cover_every_position_once():
    labels = [0] * 7 + [1] * 6 + [2] * 5
    plan = make_folds(labels, 4, seed=9)
    seen = np.concatenate([plan.members(f) for f in range(4)])
    assert sorted(seen.tolist()) == list(range(18))


def test_folds_sizes_within_one():
    labels = [0] * 7 + [1] * 6 + [2] * 5
    plan = make_folds(labels, 4, seed=9)
    sizes = [len(plan.members(f)) for f in range(4)]
    assert max(sizes) - min(sizes) <= 1


def test_folds_per_class_within_one():
    labels = np.array([0] * 7 + [1] * 6 + [2] * 5)
    plan = make_folds(labels, 4, seed=9)
    for cls in range(3):
        counts = [int(np.sum(labels[plan.members(f)] == cls)) for f in range(4)]
        assert max(counts) - min(counts) <= 1


def test_folds_balanced_case_exact():
    # 15 positions, 5 per class, k=5: every fold holds exactly one per class
    labels = np.array([0] * 5 + [1] * 5 + [2] * 5)
    plan = make_folds(labels, 5, seed=2)
    for f in range(5):
        members = plan.members(f)
        assert len(members) == 3
        assert sorted(labels[members].tolist()) == [0, 1, 2]


def test_folds_complement_is_inverse():
    labels = [0, 0, 1, 1, 2, 2]
    plan = make_folds(labels, 3, seed=1)
    for f in range(3):
        union = np.concatenate([plan.members(f), plan.complement(f)])
        assert sorted(union.tolist()) == list(range(6))


def test_folds_k_bounds():
    labels = [0, 1, 2]
    with pytest.raises(KTooLarge):
        make_folds(labels, 4, seed=0)
    with pytest.raises(KTooLarge):
        make_folds(labels, 1, seed=0)


def test_folds_unstratified_ignores_labels():
    labels_a = [0] * 10 + [1] * 10
    labels_b = [1] * 10 + [0] * 10
    pa = make_folds(labels_a, 5, seed=3, stratified=False)
    pb = make_folds(labels_b, 5, seed=3, stratified=False)
    assert pa.assignments.tolist() == pb.assignments.tolist()
