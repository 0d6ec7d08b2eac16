"""
Evaluation of frozen embeddings: a linear (softmax) probe, k-nearest-neighbour
accuracy and collapse diagnostics.
"""
import logging
from collections import namedtuple
import numpy as np
from scipy.special import softmax
from scipy.spatial import cKDTree
from .embedstats import EmbeddingBatch
from .matrixcore import SymMatrix, sym_eig
from .errors import BatchTooSmall, ConfigError, DegenerateSplit, EmptyTrainSet

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)

PROBE_STEPS = 500
PROBE_LR = 0.5
PROBE_REG = 1e-4
COLLAPSE_TOP_MASS = 0.9
COLLAPSE_STD = 0.01


class ProbeReport(
    namedtuple("ProbeReport", ["top1", "per_class", "seed", "n_train", "n_test"])
):
    """Held-out accuracy of a linear probe."""

    __slots__ = ()

    def to_dict(self):
        return dict(
            top1=float(self.top1),
            per_class={str(k): float(v) for k, v in self.per_class.items()},
            seed=int(self.seed),
            n_train=int(self.n_train),
            n_test=int(self.n_test),
        )


class CollapseReport(
    namedtuple("CollapseReport", ["feature_std", "effective_rank", "top_mass"])
):
    """Per-feature spread and spectral concentration of an embedding batch."""

    __slots__ = ()

    @property
    def mean_std(self):
        return float(np.mean(self.feature_std))

    @property
    def collapsed(self):
        return bool(self.top_mass >= COLLAPSE_TOP_MASS or self.mean_std <= COLLAPSE_STD)

    def to_dict(self):
        return dict(
            feature_std=[float(s) for s in self.feature_std],
            mean_std=self.mean_std,
            effective_rank=float(self.effective_rank),
            top_mass=float(self.top_mass),
            collapsed=self.collapsed,
        )


def _rows(embeddings):
    if isinstance(embeddings, EmbeddingBatch):
        return np.asarray(embeddings.data, dtype=float).T
    return np.asarray(embeddings, dtype=float)


def split_indices(n, split_ratio, seed):
    """Shuffled train/test index split."""
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(np.floor(split_ratio * n))
    return order[:n_train], order[n_train:]


def fit_softmax(x, y, n_classes, reg=PROBE_REG, steps=PROBE_STEPS, lr=PROBE_LR):
    """
    Multinomial logistic regression by full-batch gradient descent with an L2
    penalty on the weights.

    Returns
    --------
    :class:`tuple`
        Weights `(d, n_classes)` and biases.
    """
    n, d = x.shape
    onehot = np.eye(n_classes)[y]
    w = np.zeros((d, n_classes))
    b = np.zeros(n_classes)
    for _ in range(steps):
        p = softmax(x @ w + b, axis=1)
        err = (p - onehot) / n
        w -= lr * (x.T @ err + reg * w)
        b -= lr * err.sum(axis=0)
    return w, b


def linear_probe(
    embeddings,
    labels,
    split_ratio=0.7,
    reg=PROBE_REG,
    seed=0,
    steps=PROBE_STEPS,
    lr=PROBE_LR,
):
    """
    Train a linear classifier on frozen embeddings and report held-out top-1.

    Parameters
    -----------
    embeddings : :class:`numpy.ndarray` | :class:`~mmissl.embedstats.EmbeddingBatch`
        Embeddings as rows `(n, d)` or a :math:`d \\times n` batch.
    labels : :class:`numpy.ndarray`
        Class labels.
    split_ratio : :class:`float`
        Fraction of samples used for training.
    reg : :class:`float`
        L2 coefficient.
    seed : :class:`int`
        Seed of the split.

    Returns
    --------
    :class:`ProbeReport`
    """
    x = _rows(embeddings)
    labels = np.asarray(labels)
    if x.shape[0] != labels.shape[0]:
        raise DegenerateSplit(
            "{} embeddings but {} labels.".format(x.shape[0], labels.shape[0])
        )
    classes, y = np.unique(labels, return_inverse=True)
    train, test = split_indices(x.shape[0], split_ratio, seed)
    if test.size == 0 or np.unique(y[train]).size < 2:
        raise DegenerateSplit(
            "Split leaves {} test samples and {} train classes.".format(
                test.size, np.unique(y[train]).size
            )
        )
    mean = x[train].mean(axis=0)
    std = x[train].std(axis=0)
    std[std == 0] = 1.0
    xs = (x - mean) / std

    w, b = fit_softmax(xs[train], y[train], classes.size, reg=reg, steps=steps, lr=lr)
    pred = np.argmax(xs[test] @ w + b, axis=1)
    correct = pred == y[test]
    per_class = {
        classes[c]: float(np.mean(correct[y[test] == c]))
        for c in np.unique(y[test])
    }
    report = ProbeReport(float(np.mean(correct)), per_class, seed, train.size, test.size)
    logger.debug("Linear probe top-1 {:.3f} on {} samples.".format(report.top1, test.size))
    return report


def knn_accuracy(train_emb, train_labels, test_emb, test_labels, k=5):
    """
    Majority vote over the `k` Euclidean nearest training embeddings; a tied
    vote goes to the tied label whose member is nearest.

    Returns
    --------
    :class:`float`
    """
    train_x, test_x = _rows(train_emb), _rows(test_emb)
    train_labels, test_labels = np.asarray(train_labels), np.asarray(test_labels)
    if train_x.shape[0] == 0:
        raise EmptyTrainSet("No training embeddings.")
    if not 1 <= k <= train_x.shape[0]:
        raise ConfigError("k must lie in [1, {}]; got {}.".format(train_x.shape[0], k))
    _, idx = cKDTree(train_x).query(test_x, k=k)
    idx = np.asarray(idx).reshape(test_x.shape[0], k)
    neighbours = train_labels[idx]
    pred = []
    for row in neighbours:
        values, counts = np.unique(row, return_counts=True)
        tied = set(values[counts == counts.max()])
        pred.append(next(label for label in row if label in tied))
    return float(np.mean(np.asarray(pred) == test_labels))


def collapse_metrics(embeddings):
    """
    Feature spread and effective rank :math:`\\exp H(p)` of the covariance
    spectrum :math:`p = \\lambda / \\sum\\lambda`.

    Parameters
    -----------
    embeddings : :class:`~mmissl.embedstats.EmbeddingBatch`
        Raw (unstandardised) :math:`d \\times m` embeddings.

    Returns
    --------
    :class:`CollapseReport`
    """
    data = np.asarray(embeddings.data, dtype=float)
    d, m = data.shape
    if m < 2:
        raise BatchTooSmall("Collapse metrics need m >= 2, got {}.".format(m))
    centred = data - data.mean(axis=1, keepdims=True)
    std = np.sqrt(np.mean(centred * centred, axis=1))
    values = np.clip(sym_eig(SymMatrix(centred @ centred.T / m)).eigenvalues, 0.0, None)
    total = values.sum()
    if total <= np.finfo(float).tiny:
        return CollapseReport(std, 1.0, 1.0)
    p = values / total
    nz = p[p > 0]
    erank = float(np.exp(-np.sum(nz * np.log(nz))))
    return CollapseReport(std, min(max(erank, 1.0), float(d)), float(p.max()))
