"""From-scratch base learners over dense feature matrices."""

from .adaboost import AdaBoostModel, predict_adaboost, train_adaboost
from .gbdt import (BaggedModel, GbdtModel, predict_bagged, predict_gbdt,
                   train_bagged_gbdt, train_gbdt)
from .knn import KnnModel, predict_knn, predict_knn_labels, train_knn
from .logreg import (LogRegModel, predict_logreg, train_binary_logreg,
                     train_logreg)
from .tree import DecisionTree, TreeGrower

__all__ = [
    "AdaBoostModel", "train_adaboost", "predict_adaboost",
    "GbdtModel", "train_gbdt", "predict_gbdt",
    "BaggedModel", "train_bagged_gbdt", "predict_bagged",
    "KnnModel", "train_knn", "predict_knn", "predict_knn_labels",
    "LogRegModel", "train_logreg", "train_binary_logreg", "predict_logreg",
    "DecisionTree", "TreeGrower",
]
