"""
Synthetic datasets (Gaussian class blobs) and the vector augmentations that
produce the two views of every sample.
"""
import logging
from pathlib import Path
import numpy as np
import pandas as pd
from .errors import ConfigError, DimMismatch

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)


class DatasetSpec(object):
    """
    Gaussian blob dataset.

    Parameters
    -----------
    num_classes : :class:`int`
        Number of blobs (>= 2).
    per_class : :class:`int`
        Samples per blob.
    dim : :class:`int`
        Ambient dimension (>= 2).
    spread : :class:`float`
        Radius of the ball the blob centres are drawn from.
    noise : :class:`float`
        Within-class standard deviation.
    seed : :class:`int`
        Seed of the dataset stream.
    """

    def __init__(self, num_classes=4, per_class=250, dim=16, spread=5.0, noise=1.0, seed=0):
        self.num_classes = int(num_classes)
        self.per_class = int(per_class)
        self.dim = int(dim)
        self.spread = float(spread)
        self.noise = float(noise)
        self.seed = int(seed)
        if self.num_classes < 2:
            raise ConfigError("A dataset needs at least two classes.")
        if self.dim < 2:
            raise ConfigError("Ambient dimension must be >= 2.")
        if self.per_class < 1 or self.noise < 0 or self.spread < 0:
            raise ConfigError("per_class must be >= 1; noise and spread >= 0.")

    @property
    def size(self):
        return self.num_classes * self.per_class

    def to_dict(self):
        return dict(
            num_classes=self.num_classes,
            per_class=self.per_class,
            dim=self.dim,
            spread=self.spread,
            noise=self.noise,
            seed=self.seed,
        )


class AugmentSpec(object):
    """
    Parameters of the augmentation distribution shared by both views.

    Parameters
    -----------
    noise_sigma : :class:`float`
        Standard deviation of additive Gaussian noise.
    max_angle : :class:`float`
        Largest rotation angle (radians) in a random plane.
    dropout : :class:`float`
        Probability of zeroing each feature.
    scale_jitter : :class:`float`
        Global scale drawn from :math:`U[1 - s, 1 + s]`.
    """

    def __init__(self, noise_sigma=0.1, max_angle=0.3, dropout=0.1, scale_jitter=0.2):
        self.noise_sigma = float(noise_sigma)
        self.max_angle = float(max_angle)
        self.dropout = float(dropout)
        self.scale_jitter = float(scale_jitter)
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be >= 0.")
        if not 0.0 <= self.dropout <= 1.0:
            raise ConfigError("dropout must lie in [0, 1].")
        if not 0.0 <= self.scale_jitter <= 1.0:
            raise ConfigError("scale_jitter must lie in [0, 1].")
        if self.max_angle < 0:
            raise ConfigError("max_angle must be >= 0.")

    def to_dict(self):
        return dict(
            noise_sigma=self.noise_sigma,
            max_angle=self.max_angle,
            dropout=self.dropout,
            scale_jitter=self.scale_jitter,
        )


def make_dataset(spec, rng=None):
    """
    Gaussian blobs with centres uniform in a ball of radius `spec.spread`.

    Parameters
    -----------
    spec : :class:`DatasetSpec`
    rng : :class:`numpy.random.Generator`, :code:`None`
        Stream to draw from; seeded from `spec.seed` when omitted.

    Returns
    --------
    :class:`tuple`
        Samples of shape `(num_classes * per_class, dim)` and integer labels.
    """
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    direction = rng.standard_normal((spec.num_classes, spec.dim))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = spec.spread * rng.uniform(size=(spec.num_classes, 1)) ** (1.0 / spec.dim)
    centres = direction * radius
    labels = np.repeat(np.arange(spec.num_classes), spec.per_class)
    samples = centres[labels] + spec.noise * rng.standard_normal((spec.size, spec.dim))
    return samples, labels


def _random_planes(m, n, rng):
    u = rng.standard_normal((m, n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    v = rng.standard_normal((m, n))
    v -= np.sum(v * u, axis=1, keepdims=True) * u
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return u, v


def _transform(rows, spec, rng):
    """rotate -> scale -> dropout -> noise, an independent draw per row."""
    x = np.array(rows, dtype=float)
    m, n = x.shape
    if spec.max_angle > 0:
        u, v = _random_planes(m, n, rng)
        theta = rng.uniform(-spec.max_angle, spec.max_angle, size=(m, 1))
        a = np.sum(x * u, axis=1, keepdims=True)
        b = np.sum(x * v, axis=1, keepdims=True)
        c, s = np.cos(theta), np.sin(theta)
        x = x + (c - 1.0) * (a * u + b * v) + s * (a * v - b * u)
    if spec.scale_jitter > 0:
        x = x * rng.uniform(1.0 - spec.scale_jitter, 1.0 + spec.scale_jitter, size=(m, 1))
    if spec.dropout > 0:
        x = np.where(rng.uniform(size=x.shape) < spec.dropout, 0.0, x)
    if spec.noise_sigma > 0:
        x = x + spec.noise_sigma * rng.standard_normal(x.shape)
    return x


def augment_pair(sample, spec, rng):
    """
    Two independent draws of the augmentation applied to one sample.

    Parameters
    -----------
    sample : :class:`numpy.ndarray`
        Vector of length `n` (>= 2 when rotating).
    spec : :class:`AugmentSpec`
    rng : :class:`numpy.random.Generator`

    Returns
    --------
    :class:`tuple` of :class:`numpy.ndarray`
    """
    row = np.asarray(sample, dtype=float).reshape(1, -1)
    return _transform(row, spec, rng)[0], _transform(row, spec, rng)[0]


def augment_batch(samples, spec, rng):
    """
    Two views of every row of `samples`, each row drawn independently.

    Returns
    --------
    :class:`tuple` of :class:`numpy.ndarray`
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2:
        raise DimMismatch("Expected rows of samples, got shape {}.".format(samples.shape))
    return _transform(samples, spec, rng), _transform(samples, spec, rng)


def feature_columns(dim):
    return ["feature_{}".format(i) for i in range(dim)]


def write_dataset_csv(path, samples, labels):
    """
    Write samples as `sample_id, feature_0..feature_{d-1}, label`.

    Returns
    --------
    :class:`pathlib.Path`
    """
    samples = np.asarray(samples, dtype=float)
    df = pd.DataFrame(samples, columns=feature_columns(samples.shape[1]))
    df.insert(0, "sample_id", np.arange(samples.shape[0]))
    df["label"] = np.asarray(labels)
    df.to_csv(str(path), index=False, encoding="utf-8")
    return Path(path)


def load_dataset_csv(path):
    """
    Read a dataset written as `sample_id, feature_0..feature_{d-1}, label`.

    Returns
    --------
    :class:`tuple`
        Samples, labels and sample identifiers.
    """
    df = pd.read_csv(str(path), sep=",", decimal=".", encoding="utf-8")
    features = [c for c in df.columns if c.startswith("feature_")]
    expected = ["sample_id"] + feature_columns(len(features)) + ["label"]
    if list(df.columns) != expected or len(features) < 1:
        raise ConfigError(
            "Dataset {} must have columns {}; found {}.".format(
                path, expected, list(df.columns)
            )
        )
    logger.debug("Loaded {} samples of dimension {} from {}.".format(len(df), len(features), path))
    return (
        df[features].to_numpy(dtype=float),
        df["label"].to_numpy(),
        df["sample_id"].to_numpy(),
    )
