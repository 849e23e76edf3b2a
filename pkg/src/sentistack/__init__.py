"""Three-class sentiment classification with hybrid sparse/dense features.

The package pairs TF-IDF vectors with precomputed dense document
embeddings and trains four from-scratch learners (softmax regression,
bagged gradient-boosted trees, k-nearest-neighbors, multiclass
AdaBoost) whose out-of-fold predictions feed a one-vs-rest logistic
meta model. Everything is deterministic given a seed.
"""

__version__ = "0.1.0"
