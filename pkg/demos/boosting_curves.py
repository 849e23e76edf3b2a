"""Watch the two boosting learners converge on the benchmark.

Trains the gradient-boosted trees and prints the multinomial log-loss
after every tenth round (it must never rise), then trains the adaptive
booster and shows each decile stage's weighted error against the 2/3
chance line together with its vote weight.

Run from the repository root:  python3 demos/boosting_curves.py
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from sentistack.corpus import ColumnSchema, load_corpus, preprocess
from sentistack.embedding_store import load_embeddings
from sentistack.learners.adaboost import train_adaboost
from sentistack.learners.gbdt import train_gbdt
from sentistack.pipeline import fit_pipeline, matrix_for

DATA = pathlib.Path(__file__).resolve().parents[1] / "data"


def bar(value, scale, width=40):
    return "#" * max(1, int(width * value / scale))


def main():
    corpus = preprocess(load_corpus(str(DATA / "benchmark_corpus.csv"),
                                    ColumnSchema()))
    table = load_embeddings(str(DATA / "benchmark_embeddings.emb1"))
    pipeline = fit_pipeline(corpus, range(len(corpus)), "tfidf+emb",
                            table=table)
    X = matrix_for(pipeline, corpus.documents, table)
    y = corpus.labels()

    print("gradient boosting: train log-loss by round")
    model = train_gbdt(X, y, n_estimators=50)
    top = model.train_loss[0]
    for r in range(0, len(model.train_loss), 10):
        loss = model.train_loss[r]
        print(f"  round {r:>2}  {loss:.4f}  {bar(loss, top)}")
    drop = model.train_loss[0] - model.train_loss[-1]
    print(f"  total drop {drop:.4f} over {len(model.trees)} rounds\n")

    print("adaptive boosting: stage error (| marks the 2/3 chance line)")
    booster = train_adaboost(X, y, n_estimators=50)
    line = int(40 * (2 / 3))
    for s in range(0, len(booster.stages), 5):
        err = booster.stage_errors[s]
        marks = bar(err, 1.0).ljust(line) + "|"
        print(f"  stage {s:>2}  err {err:.3f}  alpha {booster.alphas[s]:5.2f}  {marks}")
    print(f"  every kept stage beats chance; {len(booster.stages)} stages kept")


if __name__ == "__main__":
    main()
