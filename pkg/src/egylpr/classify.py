"""Minimum-distance KNN, one-vs-rest linear SVM and leave-one-out risk."""

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateTrainingSet

EUCLIDEAN = "euclidean"
STANDARDIZED = "standardized"


def _pair(a, b):
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a, b


def euclidean_distance(a, b):
    a, b = _pair(a, b)
    d = a - b
    return float(np.sqrt(np.dot(d, d)))


def standardized_euclidean(a, b, variances):
    """Euclidean distance with each squared difference divided by its variance."""
    a, b = _pair(a, b)
    v = np.asarray(variances, dtype=np.float64).ravel()
    if v.shape != a.shape:
        raise ValueError("variances length does not match the vectors")
    if np.any(~(v > 0)):
        raise ValueError("variances must be > 0")
    d = a - b
    return float(np.sqrt(np.dot(d * d, 1.0 / v)))


# -- KNN -------------------------------------------------------------------

@dataclass(frozen=True)
class KnnModel:
    X: np.ndarray                  # (N, d), one training vector per row
    labels: tuple
    metric: str = EUCLIDEAN
    variances: np.ndarray = None
    k: int = 1
    reject_threshold: float = float("inf")

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[0] == 0:
            raise ValueError("KNN model needs at least one training vector")
        if len(self.labels) != self.X.shape[0]:
            raise ValueError("label count does not match training vectors")
        if self.k < 1 or self.k % 2 == 0:
            raise ValueError(f"k must be odd and >= 1, got {self.k}")
        if self.metric == STANDARDIZED:
            if self.variances is None or self.variances.shape != (self.X.shape[1],):
                raise ValueError("standardized metric needs one variance per dimension")
            if np.any(~(self.variances > 0)):
                raise ValueError("variances must be > 0")
        elif self.metric != EUCLIDEAN:
            raise ValueError(f"unknown metric {self.metric!r}")

    @property
    def dim(self):
        return self.X.shape[1]

    def distances(self, query):
        q = np.asarray(query, dtype=np.float64).ravel()
        if q.shape != (self.dim,):
            raise ValueError(f"query has length {q.shape[0]}, model expects {self.dim}")
        d2 = (self.X - q) ** 2
        if self.metric == STANDARDIZED:
            d2 = d2 / self.variances
        return np.sqrt(d2.sum(axis=1))


def _pairwise(X, metric, variances):
    Y = X / np.sqrt(variances) if metric == STANDARDIZED else X
    sq = (Y * Y).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (Y @ Y.T)
    return np.sqrt(np.clip(d2, 0.0, None))


def knn_fit(X, labels, metric=EUCLIDEAN, k=1, reject_percentile=97.5):
    """Store the training set and derive the reject threshold.

    The threshold is the given percentile of all distances between distinct
    training vectors that share a label.
    """
    X = np.array(X, dtype=np.float64)
    labels = tuple(labels)
    variances = None
    if metric == STANDARDIZED:
        variances = X.var(axis=0, ddof=1) if X.shape[0] > 1 else np.ones(X.shape[1])
        if np.any(~(variances > 0)):
            raise DegenerateTrainingSet("a feature has zero variance")
    threshold = float("inf")
    if reject_percentile is not None and X.shape[0] > 1:
        lab = np.array([str(x) for x in labels])
        same = (lab[:, None] == lab[None, :]) & ~np.eye(len(lab), dtype=bool)
        if same.any():
            d = _pairwise(X, metric, variances if variances is not None else 1.0)
            threshold = float(np.percentile(d[same], reject_percentile))
    return KnnModel(X, labels, metric, variances, k, threshold)


def knn_classify(model, query):
    """(label, distance to the nearest neighbour carrying that label)."""
    d = model.distances(query)
    order = np.argsort(d, kind="stable")[:model.k]
    votes = Counter(model.labels[i] for i in order)
    top = max(votes.values())
    for i in order:           # nearest first: breaks vote ties
        if votes[model.labels[i]] == top:
            return model.labels[i], float(d[i])
    raise AssertionError("unreachable")


# -- SVM -------------------------------------------------------------------

@dataclass(frozen=True)
class SvmModel:
    classes: tuple
    W: np.ndarray                  # (n_classes, d)
    b: np.ndarray                  # (n_classes,)
    reg_c: float
    mean: np.ndarray
    scale: np.ndarray
    epochs: int = 200
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.W.ndim != 2 or self.W.shape[1] == 0:
            raise ValueError("SVM weight matrix must be (classes, d) with d >= 1")
        if self.W.shape[0] != len(self.classes) or self.b.shape != (len(self.classes),):
            raise ValueError("SVM weights do not match the class list")
        if self.mean.shape != (self.W.shape[1],) or self.scale.shape != (self.W.shape[1],):
            raise ValueError("SVM standardization does not match the weight dimension")
        if not (np.all(np.isfinite(self.W)) and np.all(np.isfinite(self.b))):
            raise ValueError("SVM weights must be finite")

    @property
    def dim(self):
        return self.W.shape[1]


def _class_order(labels):
    try:
        return tuple(sorted(set(labels)))
    except TypeError:
        return tuple(sorted(set(labels), key=str))


def svm_train(features, labels, reg_c=1.0, epochs=200):
    """One-vs-rest linear SVMs by kernelized Pegasos on the linear Gram matrix.

    Minimizes mean hinge loss + (1/reg_c)*|w|^2 per class; the bias is an
    appended constant feature. Samples are visited in their given order, so
    training is reproducible bit for bit.
    """
    X = np.asarray(features, dtype=np.float64)
    labels = list(labels)
    if X.ndim != 2 or X.shape[0] != len(labels) or X.shape[1] == 0:
        raise ValueError("features must be (n, d) with one label per row")
    if not reg_c > 0 or epochs < 1:
        raise ValueError("reg_c must be > 0 and epochs >= 1")
    classes = _class_order(labels)
    if len(classes) < 2:
        raise DegenerateTrainingSet("need at least two classes")
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    Z = np.hstack([(X - mean) / scale, np.ones((X.shape[0], 1))])
    gram = Z @ Z.T
    signs = np.array([[1.0 if lab == c else -1.0 for lab in labels] for c in classes])
    lam = 2.0 / reg_c
    alpha = kernels.pegasos_dual(gram, signs, lam, epochs)
    Wa = (alpha * signs) @ Z / (lam * epochs * X.shape[0])
    return SvmModel(classes, Wa[:, :-1].copy(), Wa[:, -1].copy(), float(reg_c), mean, scale, int(epochs))


def svm_decision(model, query):
    q = np.asarray(query, dtype=np.float64).ravel()
    if q.shape != (model.dim,):
        raise ValueError(f"query has length {q.shape[0]}, model expects {model.dim}")
    return model.W @ ((q - model.mean) / model.scale) + model.b


def svm_classify(model, query):
    return model.classes[int(np.argmax(svm_decision(model, query)))]


def svm_margin(model, query):
    """(label, best score minus runner-up score)."""
    s = svm_decision(model, query)
    order = np.argsort(-s, kind="stable")
    margin = float(s[order[0]] - s[order[1]]) if len(s) > 1 else float("inf")
    return model.classes[int(order[0])], margin


def loo_risk(features, labels, trainer=None, classifier=None):
    """Leave-one-out error rate: retrain without each sample, then classify it."""
    trainer = trainer or svm_train
    classifier = classifier or svm_classify
    X = np.asarray(features, dtype=np.float64)
    labels = list(labels)
    n = len(labels)
    if n < 2 or X.shape[0] != n:
        raise ValueError("loo_risk needs at least two labelled samples")
    errors = 0
    for i in range(n):
        rest = [labels[j] for j in range(n) if j != i]
        if len(set(rest)) < 2:
            raise DegenerateTrainingSet(f"fold {i} leaves a single class")
        model = trainer(np.delete(X, i, axis=0), rest)
        if classifier(model, X[i]) != labels[i]:
            errors += 1
    return errors / n
