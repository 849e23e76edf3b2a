"""Corpus loading, normalization, splitting, and fold assignment.

A corpus is an ordered list of documents with stable 64-bit content ids.
Ids are the FNV-1a hash of the normalized UTF-8 text, which is what ties
a document to its row in an embedding table file.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Optional, Sequence

import numpy as np

from .errors import KTooLarge, MissingColumn, TooFewPerClass, UnknownLabel
from .rand import fisher_yates, fnv1a_64, stream


class Label(IntEnum):
    NEGATIVE = 0
    NEUTRAL = 1
    POSITIVE = 2


N_CLASSES = 3

_LABEL_ALIASES = {
    "negative": Label.NEGATIVE,
    "negativo": Label.NEGATIVE,
    "neutral": Label.NEUTRAL,
    "positive": Label.POSITIVE,
    "positivo": Label.POSITIVE,
}


def parse_label(text: str, *, row: Optional[int] = None) -> Label:
    """Map a label string to a Label, case-insensitively. Raises UnknownLabel."""
    key = text.strip().lower()
    try:
        return _LABEL_ALIASES[key]
    except KeyError:
        where = f" (row {row})" if row is not None else ""
        known = ", ".join(sorted(_LABEL_ALIASES))
        raise UnknownLabel(f"unknown label {text!r}{where}; expected one of: {known}") from None


def normalize_text(text: str) -> str:
    """Unicode lowercase, then collapse all whitespace runs to single spaces."""
    return " ".join(text.lower().split())


def doc_id(text: str) -> int:
    """Stable content id: FNV-1a over the UTF-8 bytes of the text."""
    return fnv1a_64(text.encode("utf-8"))


@dataclass
class Document:
    id: int
    text: str
    label: Optional[Label] = None

    @classmethod
    def from_text(cls, text: str, label: Optional[Label] = None) -> "Document":
        return cls(id=doc_id(text), text=text, label=label)


@dataclass
class Provenance:
    source: str = ""
    preprocessed: bool = False
    dropped_empty: int = 0
    dropped_unlabeled: int = 0
    dropped_duplicate: int = 0


@dataclass
class LabeledCorpus:
    documents: list[Document] = field(default_factory=list)
    provenance: Provenance = field(default_factory=Provenance)

    def __len__(self) -> int:
        return len(self.documents)

    def texts(self) -> list[str]:
        return [d.text for d in self.documents]

    def labels(self) -> np.ndarray:
        return np.array([int(d.label) for d in self.documents], dtype=np.int64)

    def class_counts(self) -> np.ndarray:
        counts = np.zeros(N_CLASSES, dtype=np.int64)
        for d in self.documents:
            if d.label is not None:
                counts[int(d.label)] += 1
        return counts


@dataclass
class ColumnSchema:
    text_col: str = "text"
    label_col: Optional[str] = "label"


def load_corpus(path: str, schema: Optional[ColumnSchema] = None) -> LabeledCorpus:
    """Read a CSV corpus in file order. No normalization happens here.

    An empty label cell becomes a missing label (dropped later by
    preprocess); a non-empty unrecognized label is a hard error that
    names the offending row.
    """
    schema = schema or ColumnSchema()
    docs: list[Document] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if schema.text_col not in fields:
            raise MissingColumn(f"column {schema.text_col!r} not found in {path} (have: {fields})")
        if schema.label_col is not None and schema.label_col not in fields:
            raise MissingColumn(f"column {schema.label_col!r} not found in {path} (have: {fields})")
        for record in reader:
            text = record[schema.text_col] or ""
            label: Optional[Label] = None
            if schema.label_col is not None:
                raw = (record[schema.label_col] or "").strip()
                if raw:
                    label = parse_label(raw, row=reader.line_num)
            docs.append(Document(id=doc_id(text), text=text, label=label))
    return LabeledCorpus(documents=docs, provenance=Provenance(source=path))


def preprocess(corpus: LabeledCorpus) -> LabeledCorpus:
    """Normalize texts, drop empty and unlabeled rows, drop duplicate ids.

    Duplicates keep the first occurrence. Running this twice is a no-op
    beyond the first run; drop counts accumulate in the provenance.
    """
    prov = replace(corpus.provenance, preprocessed=True)
    seen: set[int] = set()
    kept: list[Document] = []
    for d in corpus.documents:
        text = normalize_text(d.text)
        if not text:
            prov.dropped_empty += 1
            continue
        if d.label is None:
            prov.dropped_unlabeled += 1
            continue
        did = doc_id(text)
        if did in seen:
            prov.dropped_duplicate += 1
            continue
        seen.add(did)
        kept.append(Document(id=did, text=text, label=d.label))
    return LabeledCorpus(documents=kept, provenance=prov)


@dataclass
class SplitPlan:
    train_indices: np.ndarray
    test_indices: np.ndarray
    test_fraction: float
    seed: int
    stratified: bool


def _apportion(counts: np.ndarray, total: int) -> np.ndarray:
    """Largest-remainder apportionment of `total` over classes, ties to the lower index."""
    n = int(counts.sum())
    quotas = counts * (total / n)
    base = np.floor(quotas).astype(np.int64)
    leftover = total - int(base.sum())
    if leftover > 0:
        remainders = quotas - base
        # argsort is stable, so equal remainders resolve to the lower class index
        order = np.argsort(-remainders, kind="stable")
        for c in order[:leftover]:
            base[c] += 1
    return base


def split_corpus(corpus: LabeledCorpus, test_fraction: float, seed: int,
                 stratified: bool = True) -> SplitPlan:
    """Partition document positions into train and test sets.

    The test size is round(test_fraction * N) with half rounding up. A
    stratified split shuffles each class with its own named stream and
    apportions the test quota by largest remainder, so class proportions
    carry over as closely as integer counts allow.
    """
    n = len(corpus)
    if n == 0:
        raise TooFewPerClass("cannot split an empty corpus")
    if not (0.0 < test_fraction < 1.0):
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n_test = int(np.floor(test_fraction * n + 0.5))

    if not stratified:
        rng = stream(seed, "split")
        perm = fisher_yates(n, rng)
        test = sorted(perm[:n_test])
        train = sorted(perm[n_test:])
    else:
        labels = corpus.labels()
        by_class = [np.flatnonzero(labels == c) for c in range(N_CLASSES)]
        counts = np.array([len(ix) for ix in by_class], dtype=np.int64)
        for c in range(N_CLASSES):
            if 0 < counts[c] < 2:
                raise TooFewPerClass(
                    f"stratified split needs at least 2 documents per present class; "
                    f"class {Label(c).name} has {counts[c]}")
        quota = _apportion(counts, n_test)
        test_list: list[int] = []
        train_list: list[int] = []
        for c in range(N_CLASSES):
            members = by_class[c]
            if len(members) == 0:
                continue
            rng = stream(seed, f"split/class{c}")
            perm = fisher_yates(len(members), rng)
            t = int(quota[c])
            test_list.extend(int(members[i]) for i in perm[:t])
            train_list.extend(int(members[i]) for i in perm[t:])
        test = sorted(test_list)
        train = sorted(train_list)

    return SplitPlan(
        train_indices=np.array(train, dtype=np.int64),
        test_indices=np.array(test, dtype=np.int64),
        test_fraction=test_fraction,
        seed=seed,
        stratified=stratified,
    )


@dataclass
class FoldPlan:
    k: int
    assignments: np.ndarray  # fold number per position, aligned with the input indices
    seed: int
    stratified: bool

    def members(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def complement(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def make_folds(labels: Sequence[int], k: int, seed: int, stratified: bool = True) -> FoldPlan:
    """Assign each position to one of k folds.

    Stratified assignment walks the classes in ascending order, shuffles
    each class with its own stream, and deals members round-robin with a
    single counter that runs across class boundaries. That keeps both
    the overall fold sizes and the per-class fold counts within one of
    each other.
    """
    n = len(labels)
    if k < 2:
        raise KTooLarge(f"need at least 2 folds, got {k}")
    if k > n:
        raise KTooLarge(f"cannot make {k} folds from {n} documents")
    assignments = np.full(n, -1, dtype=np.int64)
    if not stratified:
        rng = stream(seed, "folds")
        perm = fisher_yates(n, rng)
        for t, pos in enumerate(perm):
            assignments[pos] = t % k
    else:
        arr = np.asarray(labels, dtype=np.int64)
        t = 0
        for c in range(N_CLASSES):
            members = np.flatnonzero(arr == c)
            if len(members) == 0:
                continue
            rng = stream(seed, f"folds/class{c}")
            perm = fisher_yates(len(members), rng)
            for i in perm:
                assignments[int(members[i])] = t % k
                t += 1
    return FoldPlan(k=k, assignments=assignments, seed=seed, stratified=stratified)
