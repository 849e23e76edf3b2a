"""Train the stacked ensemble on the bundled benchmark, end to end.

Loads the synthetic review corpus and its pseudo-embedding table, holds
out a stratified test split, fits the hybrid feature pipeline on the
training rows, trains the stacked ensemble, and prints the held-out
classification report plus a few example predictions.

Run from the repository root:  python3 demos/quickstart.py
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from sentistack.corpus import ColumnSchema, load_corpus, preprocess, split_corpus
from sentistack.embedding_store import load_embeddings
from sentistack.evaluation import compute_metrics, render_text_report
from sentistack.models import predict_labels, resolve_params
from sentistack.pipeline import fit_pipeline, matrix_for
from sentistack.rand import derive_seed
from sentistack.stacking import predict_cse, train_cse

DATA = pathlib.Path(__file__).resolve().parents[1] / "data"
SEED = 7


def main():
    corpus = preprocess(load_corpus(str(DATA / "benchmark_corpus.csv"),
                                    ColumnSchema()))
    table = load_embeddings(str(DATA / "benchmark_embeddings.emb1"))
    print(f"corpus: {len(corpus)} documents, class counts "
          f"{corpus.class_counts().tolist()}")

    split = split_corpus(corpus, test_fraction=0.2, seed=SEED, stratified=True)
    pipeline = fit_pipeline(corpus, split.train_indices, "tfidf+emb",
                            table=table)
    print(f"features: tfidf+emb, {pipeline.dim} columns")

    train_docs = [corpus.documents[i] for i in split.train_indices]
    test_docs = [corpus.documents[i] for i in split.test_indices]
    X_train = matrix_for(pipeline, train_docs, table)
    X_test = matrix_for(pipeline, test_docs, table)
    y = corpus.labels()

    model = train_cse(X_train, y[split.train_indices],
                      resolve_params("cse", {}),
                      seed=derive_seed(SEED, "train"))
    model.pipeline = pipeline

    report = compute_metrics(y[split.test_indices],
                             predict_labels(model, X_test))
    print()
    print(render_text_report(report))

    print("sample predictions:")
    for doc in test_docs[:4]:
        label, dist = predict_cse(model, doc.text,
                                  embedding=table.lookup(doc.id))
        shown = " ".join(doc.text.split()[:6])
        print(f"  {label.name:<8} {max(dist):.2f}  {shown} ...")


if __name__ == "__main__":
    main()
