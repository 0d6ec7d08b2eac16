"""
Nonparametric mutual information estimation, used as an oracle for the closed
form expressions.

The Kraskov-Stögbauer-Grassberger (KSG) estimator (type 1) takes, for each
sample, the max-norm distance :math:`\\epsilon_i` to its `k`-th neighbour in the
joint space and counts the marginal neighbours strictly inside that radius:

.. math::

    \\hat{I} = \\psi(k) + \\psi(N) - \\langle \\psi(n_z + 1) + \\psi(n_{z'} + 1) \\rangle.

Estimates are in nats.
"""
import logging
import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma
from ..errors import ConfigError, DimMismatch, NonMonotoneMap, TooFewSamples

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)

DEFAULT_NN = 5
MIN_SAMPLES = 1000


def _as_samples(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    return x


def _count_within(points, radii):
    tree = cKDTree(points)
    counts = tree.query_ball_point(
        points, r=radii, p=np.inf, return_length=True, workers=-1
    )
    return np.asarray(counts) - 1  # exclude the point itself


def mi_knn_estimate(samples_z, samples_zprime, k=DEFAULT_NN, min_samples=MIN_SAMPLES):
    """
    KSG (type 1, max-norm) estimate of :math:`I(Z; Z')` in nats.

    Parameters
    -----------
    samples_z, samples_zprime : :class:`numpy.ndarray`
        Paired samples as rows, shapes `(N, d_z)` and `(N, d_z')`.
    k : :class:`int`
        Number of joint-space neighbours.
    min_samples : :class:`int`
        Smallest accepted `N`.

    Returns
    --------
    :class:`float`
    """
    z, zp = _as_samples(samples_z), _as_samples(samples_zprime)
    if z.shape[0] != zp.shape[0]:
        raise DimMismatch(
            "Unpaired samples: {} vs {} rows.".format(z.shape[0], zp.shape[0])
        )
    N = z.shape[0]
    if N < min_samples:
        raise TooFewSamples("Need at least {} samples, got {}.".format(min_samples, N))
    k = int(k)
    if k < 1 or k >= N:
        raise ConfigError("Neighbour count must lie in [1, N), got {}.".format(k))

    joint = np.hstack([z, zp])
    dist, _ = cKDTree(joint).query(joint, k=k + 1, p=np.inf, workers=-1)
    eps = np.nextafter(dist[:, k], 0.0)  # strictly inside the k-th neighbour
    nz = _count_within(z, eps)
    nzp = _count_within(zp, eps)
    estimate = (
        digamma(k) + digamma(N) - np.mean(digamma(nz + 1) + digamma(nzp + 1))
    )
    logger.debug("KSG estimate {:.5f} nats (N={}, k={}).".format(estimate, N, k))
    return float(estimate)


def check_monotone(x, fx):
    """
    Verify that `fx` is a strictly monotone elementwise image of `x`, column by
    column (increasing or decreasing).

    Raises
    -------
    :class:`~mmissl.errors.NonMonotoneMap`
    """
    x, fx = _as_samples(x), _as_samples(fx)
    if x.shape != fx.shape:
        raise NonMonotoneMap(
            "Map changed the sample shape from {} to {}.".format(x.shape, fx.shape)
        )
    if not np.all(np.isfinite(fx)):
        raise NonMonotoneMap("Map produced non-finite values.")
    for j in range(x.shape[1]):
        order = np.argsort(x[:, j], kind="stable")
        dx = np.diff(x[order, j])
        df = np.diff(fx[order, j])[dx > 0]
        if not (np.all(df > 0) or np.all(df < 0)):
            raise NonMonotoneMap(
                "Map is not strictly monotone on column {}.".format(j)
            )


def mi_invariance_check(samples_z, samples_zprime, map_z, map_zprime, k=DEFAULT_NN):
    """
    Estimate the mutual information before and after strictly monotone
    elementwise maps of each block. Mutual information is invariant under such
    homeomorphisms, so the two estimates should agree to estimator tolerance.

    Parameters
    -----------
    samples_z, samples_zprime : :class:`numpy.ndarray`
        Paired samples as rows.
    map_z, map_zprime : :class:`callable`
        Elementwise maps applied to each block.
    k : :class:`int`
        KSG neighbour count.

    Returns
    --------
    :class:`tuple` of :class:`float`
        Estimates before and after the maps.
    """
    z, zp = _as_samples(samples_z), _as_samples(samples_zprime)
    fz, fzp = _as_samples(map_z(z)), _as_samples(map_zprime(zp))
    check_monotone(z, fz)
    check_monotone(zp, fzp)
    before = mi_knn_estimate(z, zp, k=k)
    after = mi_knn_estimate(fz, fzp, k=k)
    return before, after
