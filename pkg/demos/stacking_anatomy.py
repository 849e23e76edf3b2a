"""Look inside the stacked ensemble: meta-features and meta-model weights.

The meta-model never sees raw features. It sees a 12-column matrix of
out-of-fold class probabilities, one 3-column block per base learner,
and learns one-vs-rest logistic weights over those blocks. This script
builds that matrix for the benchmark, shows a few rows, and then prints
which base learner each one-vs-rest head leans on.

Run from the repository root:  python3 demos/stacking_anatomy.py
"""

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from sentistack.corpus import ColumnSchema, Label, load_corpus, make_folds, preprocess
from sentistack.embedding_store import load_embeddings
from sentistack.models import BASE_KINDS, resolve_params
from sentistack.pipeline import fit_pipeline, matrix_for
from sentistack.rand import derive_seed
from sentistack.stacking import build_meta_features, train_cse

DATA = pathlib.Path(__file__).resolve().parents[1] / "data"
SEED = 7


def main():
    corpus = preprocess(load_corpus(str(DATA / "benchmark_corpus.csv"),
                                    ColumnSchema()))
    table = load_embeddings(str(DATA / "benchmark_embeddings.emb1"))
    pipeline = fit_pipeline(corpus, range(len(corpus)), "tfidf+emb",
                            table=table)
    X = matrix_for(pipeline, corpus.documents, table)
    y = corpus.labels()

    params = resolve_params("cse", {"lgbm__n_estimators": 10,
                                    "bag__n_members": 3,
                                    "adaboost__n_estimators": 20})
    plan = make_folds(y, params["meta__folds"], derive_seed(SEED, "meta-folds"))
    M = build_meta_features(X, y, plan, params, seed=SEED)

    print(f"meta-feature matrix: {M.shape[0]} rows x {M.shape[1]} columns")
    print("column blocks:", "  ".join(f"{k}[{3 * i}:{3 * i + 3}]"
                                      for i, k in enumerate(BASE_KINDS)))
    print()
    header = "".join(f"{k[:10]:>31}" for k in BASE_KINDS)
    print("first rows (each block is one learner's class distribution):")
    print(" " * 12 + header)
    for r in range(4):
        blocks = "".join("  " + " ".join(f"{v:9.3f}" for v in M[r, 3 * b:3 * b + 3])
                         for b in range(len(BASE_KINDS)))
        print(f"  row {r} {Label(y[r]).name[:3]}{blocks}")

    model = train_cse(X, y, params, seed=SEED)
    print()
    print("meta-model weight mass per base learner (one-vs-rest heads):")
    print(" " * 10 + "".join(f"{k:>14}" for k in BASE_KINDS))
    for cls, head in zip(Label, model.meta.models):
        mass = [float(np.abs(head.weights[3 * b:3 * b + 3]).sum())
                for b in range(len(BASE_KINDS))]
        cells = "".join(f"{m:14.3f}" for m in mass)
        print(f"  {cls.name:<8}{cells}")
    print()
    print("larger mass = that head leans harder on that learner's votes")


if __name__ == "__main__":
    main()
