"""Bundled synthetic benchmark: Spanish-flavored reviews plus pseudo-embeddings.

The proprietary review data the reference experiment used cannot ship,
so the repo carries a deterministic stand-in with the properties that
matter for exercising the engine:

  - three balanced classes of short Spanish-like texts;
  - a "hard" slice whose wording is deliberately ambiguous while its
    dense embedding stays class-informative, which is what gives the
    hybrid feature set its measurable edge over words alone;
  - a small fraction of label flips as irreducible noise so no model
    saturates;
  - pseudo-embeddings keyed by document content id with class-dependent
    means, so regeneration is independent of document order.

Everything derives from splitmix64 streams: regenerating with the same
seed reproduces the shipped files byte for byte.
"""

from __future__ import annotations

import csv
import math
import os

from .corpus import Label, LabeledCorpus, doc_id, normalize_text
from .embedding_store import EmbeddingTable, Pooling, write_embeddings
from .rand import SplitMix64, derive_seed, stream

BENCH_SEED = 615243
BENCH_DIM = 32
BENCH_DOCS = 300
BENCH_MODEL_ID = "benchmark-pseudo-encoder-v1"

HARD_FRACTION = 0.25
FLIP_FRACTION = 0.04

_CLASS_WORDS = {
    Label.NEGATIVE: ["pesimo", "malo", "lento", "sucio", "caro", "espera",
                     "queja", "demora", "molesto", "horrible", "nunca", "frio"],
    Label.NEUTRAL: ["precio", "horario", "ubicacion", "cita", "consulta",
                    "informacion", "normal", "regular", "turno", "llamada",
                    "formulario", "sala"],
    Label.POSITIVE: ["excelente", "bueno", "amable", "rapido", "comodo",
                     "recomendado", "agradable", "eficiente", "limpio",
                     "atento", "perfecto", "facil"],
}

_FILLERS = ["el", "la", "los", "servicio", "atencion", "muy", "de", "y", "con",
            "por", "para", "un", "una", "fue", "esta", "lugar", "personal"]

_LABEL_STRINGS = {
    Label.NEGATIVE: ["negativo", "Negativo", "negative", "NEGATIVO"],
    Label.NEUTRAL: ["neutral", "Neutral", "NEUTRAL", "neutral"],
    Label.POSITIVE: ["positivo", "Positivo", "positive", "POSITIVO"],
}


def _gauss(rng: SplitMix64) -> float:
    u1 = 1.0 - rng.next_unit()  # in (0, 1]
    u2 = rng.next_unit()
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def _other_class(label: Label, rng: SplitMix64) -> Label:
    others = [c for c in Label if c != label]
    return others[rng.next_below(2)]


def _make_text(true_class: Label, hard: bool, rng: SplitMix64) -> str:
    length = 5 + rng.next_below(6)
    class_rate = 0.12 if hard else 0.72
    filler_bar = 0.88 if hard else 0.94
    words = []
    for _ in range(length):
        r = rng.next_unit()
        if r < class_rate:
            bank = _CLASS_WORDS[true_class]
        elif r < filler_bar:
            bank = _FILLERS
        else:
            bank = _CLASS_WORDS[_other_class(true_class, rng)]
        words.append(bank[rng.next_below(len(bank))])
    # cosmetic variation exercises normalization without changing tokens
    if rng.next_unit() < 0.3:
        words[0] = words[0].capitalize()
    joiners = [" "] * (len(words) - 1)
    if rng.next_unit() < 0.1:
        joiners[rng.next_below(len(joiners))] = "   "
    text = words[0]
    for joiner, word in zip(joiners, words[1:]):
        text += joiner + word
    return text


def benchmark_rows(n_docs: int = BENCH_DOCS, seed: int = BENCH_SEED):
    """(raw text, label string, true text class) rows, shuffled document order."""
    rows = []
    seen: set[int] = set()
    for i in range(n_docs):
        true_class = Label(i % 3)
        attempt = 0
        while True:
            rng = stream(seed, f"doc/{i}/try{attempt}")
            hard = rng.next_unit() < HARD_FRACTION
            text = _make_text(true_class, hard, rng)
            did = doc_id(normalize_text(text))
            if did not in seen:
                break
            attempt += 1
        seen.add(did)
        label = true_class
        if rng.next_unit() < FLIP_FRACTION:
            label = _other_class(true_class, rng)
        alias = _LABEL_STRINGS[label][rng.next_below(len(_LABEL_STRINGS[label]))]
        rows.append((text, alias, true_class))
    order_rng = stream(seed, "order")
    from .rand import fisher_yates
    perm = fisher_yates(len(rows), order_rng)
    return [rows[p] for p in perm]


def benchmark_embeddings(corpus: LabeledCorpus, text_classes: dict[int, Label],
                         dim: int = BENCH_DIM, seed: int = BENCH_SEED,
                         mean_scale: float = 3.0,
                         noise_scale: float = 4.5) -> EmbeddingTable:
    """Pseudo-embeddings: class mean plus per-document noise keyed by id."""
    means_rng = stream(seed, "means")
    means = {c: [mean_scale * _gauss(means_rng) for _ in range(dim)]
             for c in Label}
    table = EmbeddingTable(dim=dim, pooling=Pooling.MEAN,
                           model_id=BENCH_MODEL_ID, rows={})
    for d in corpus.documents:
        cls = text_classes[d.id]
        rng = SplitMix64(derive_seed(seed, f"emb/{d.id:016x}"))
        vec = [means[cls][j] + noise_scale * _gauss(rng) for j in range(dim)]
        table.add(d.id, vec)
    return table


def write_benchmark(corpus_path: str, embeddings_path: str,
                    n_docs: int = BENCH_DOCS, seed: int = BENCH_SEED) -> None:
    """Generate and write the CSV corpus and its EMB1 table."""
    rows = benchmark_rows(n_docs, seed)
    os.makedirs(os.path.dirname(os.path.abspath(corpus_path)), exist_ok=True)
    tmp = corpus_path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["text", "label"])
        for text, alias, _ in rows:
            writer.writerow([text, alias])
    os.replace(tmp, corpus_path)

    # embeddings reflect what the text means, not the (possibly flipped) label
    text_classes = {doc_id(normalize_text(text)): cls for text, _, cls in rows}
    from .corpus import ColumnSchema, load_corpus, preprocess
    corpus = preprocess(load_corpus(corpus_path, ColumnSchema()))
    table = benchmark_embeddings(corpus, text_classes, seed=seed)
    write_embeddings(embeddings_path, table)
