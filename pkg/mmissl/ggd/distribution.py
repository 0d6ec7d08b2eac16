"""
Multivariate generalised Gaussian distribution (GGD),

.. math::

    \\mathcal{GN}(X; \\mu, \\Sigma, \\beta) = \\frac{\\Phi(\\beta, n)}{\\det(\\Sigma)^{1/2}}
    \\exp\\left(-\\frac{1}{2}\\left[(X-\\mu)^T\\Sigma^{-1}(X-\\mu)\\right]^{\\beta}\\right),

    \\Phi(\\beta, n) = \\frac{\\beta\\Gamma(n/2)}{2^{n/(2\\beta)}\\pi^{n/2}\\Gamma(n/(2\\beta))},

where :math:`\\Sigma` is the dispersion matrix and :math:`\\beta > 0` the shape
(:math:`\\beta = 1` is the Gaussian). Mutual information is reported in nats.

Notes
------
    * The quadratic form :math:`q = (X-\\mu)^T\\Sigma^{-1}(X-\\mu)` satisfies
      :math:`q^{\\beta} \\sim \\mathrm{Gamma}(n/(2\\beta), 2)`, hence
      :math:`E[q^{\\beta}] = n/\\beta` (:math:`2n/\\beta` for a joint of
      dimension :math:`2n`). Sampling is exact and rejection free.
    * The covariance is :math:`C = \\Sigma\\, 2^{1/\\beta}\\Gamma((n+2)/(2\\beta))
      / (n\\Gamma(n/(2\\beta)))`.
"""
import logging
import numpy as np
import scipy.linalg
from scipy.special import gammaln
from ..matrixcore import SymMatrix, logdet_exact, random_orthogonal, random_spd
from ..errors import ConfigError, DimMismatch, InvalidShape, NonFinite

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)


def _check_shape(beta):
    beta = float(beta)
    if not beta > 0.0:
        raise InvalidShape("GGD shape must be positive, got {}.".format(beta))
    return beta


class GgdSpec(object):
    """
    Parameters of a multivariate generalised Gaussian.

    Parameters
    -----------
    mean : :class:`numpy.ndarray`
        Location vector of length `n`.
    dispersion : :class:`~mmissl.matrixcore.SymMatrix` | :class:`numpy.ndarray`
        Symmetric positive definite dispersion matrix.
    shape : :class:`float`
        Shape parameter :math:`\\beta > 0`.
    """

    def __init__(self, mean, dispersion, shape=1.0):
        if not isinstance(dispersion, SymMatrix):
            dispersion = SymMatrix(dispersion)
        mean = np.asarray(mean, dtype=float).reshape(-1)
        if mean.size != dispersion.dim:
            raise DimMismatch(
                "Mean of length {} for a {}-dimensional dispersion.".format(
                    mean.size, dispersion.dim
                )
            )
        self.shape = _check_shape(shape)
        self.logdet = logdet_exact(dispersion)  # raises NotPositiveDefinite
        self.mean = mean
        self.dispersion = dispersion
        self.cholesky = scipy.linalg.cholesky(dispersion.entries, lower=True)

    @property
    def dim(self):
        return self.dispersion.dim

    def __repr__(self):
        return "{}(dim={}, shape={})".format(
            self.__class__.__name__, self.dim, self.shape
        )


class JointGgdSpec(object):
    """
    Joint GGD of two `d`-dimensional blocks :math:`\\tilde{Z} = [Z^T, Z'^T]^T`
    with dispersion :math:`[[\\Sigma_{ZZ}, \\Sigma_{ZZ'}], [\\Sigma_{Z'Z},
    \\Sigma_{Z'Z'}]]`.

    Parameters
    -----------
    d : :class:`int`
        Block dimension.
    dispersion : :class:`~mmissl.matrixcore.SymMatrix` | :class:`numpy.ndarray`
        :math:`2d \\times 2d` joint dispersion.
    mean : :class:`numpy.ndarray`, :code:`None`
        Joint mean; zero by default.
    shape : :class:`float`
        Shape parameter shared by the joint.
    """

    def __init__(self, d, dispersion, mean=None, shape=1.0):
        if not isinstance(dispersion, SymMatrix):
            dispersion = SymMatrix(dispersion)
        d = int(d)
        if dispersion.dim != 2 * d:
            raise DimMismatch(
                "Joint dispersion of dim {} for blocks of dim {}.".format(
                    dispersion.dim, d
                )
            )
        if mean is None:
            mean = np.zeros(2 * d)
        self.d = d
        self.joint = GgdSpec(mean, dispersion, shape=shape)

    @property
    def shape(self):
        return self.joint.shape

    @property
    def dispersion(self):
        return self.joint.dispersion

    @property
    def sigma_zz(self):
        return SymMatrix(self.dispersion.entries[: self.d, : self.d])

    @property
    def sigma_zpzp(self):
        return SymMatrix(self.dispersion.entries[self.d :, self.d :])

    @property
    def sigma_cross(self):
        """Off-diagonal block :math:`\\Sigma_{ZZ'}`."""
        return self.dispersion.entries[: self.d, self.d :].copy()

    def with_shape(self, shape):
        """Same dispersion and mean with a different shape parameter."""
        return JointGgdSpec(self.d, self.dispersion, mean=self.joint.mean, shape=shape)

    def split(self, samples):
        """Split joint samples (rows) into the `Z` and `Z'` blocks."""
        samples = np.asarray(samples)
        return samples[:, : self.d], samples[:, self.d :]

    def __repr__(self):
        return "{}(d={}, shape={})".format(self.__class__.__name__, self.d, self.shape)


def log_normaliser(shape, n):
    """
    Log of the GGD normalising constant :math:`\\log\\Phi(\\beta, n)`.

    Parameters
    -----------
    shape : :class:`float`
        Shape :math:`\\beta`.
    n : :class:`int`
        Dimension.

    Returns
    --------
    :class:`float`
    """
    beta = _check_shape(shape)
    return float(
        np.log(beta)
        + gammaln(n / 2.0)
        - n / (2.0 * beta) * np.log(2.0)
        - n / 2.0 * np.log(np.pi)
        - gammaln(n / (2.0 * beta))
    )


def radial_moment(n, shape):
    """
    Expected value of :math:`q^{\\beta}` for an `n`-dimensional GGD, :math:`n/\\beta`.
    For the :math:`2n`-dimensional joint of two views this is :math:`2n/\\beta`.
    """
    return n / _check_shape(shape)


def covariance_scale(n, shape):
    """
    Ratio between covariance and dispersion,
    :math:`2^{1/\\beta}\\Gamma((n+2)/(2\\beta)) / (n\\Gamma(n/(2\\beta)))`.
    Equal to one for the Gaussian.
    """
    beta = _check_shape(shape)
    return float(
        np.exp(
            np.log(2.0) / beta
            + gammaln((n + 2.0) / (2.0 * beta))
            - gammaln(n / (2.0 * beta))
        )
        / n
    )


def dispersion_to_covariance(spec):
    """
    Covariance matrix of a :class:`GgdSpec`.

    Returns
    --------
    :class:`~mmissl.matrixcore.SymMatrix`
    """
    return spec.dispersion * covariance_scale(spec.dim, spec.shape)


def covariance_to_dispersion(covariance, shape):
    """
    Dispersion matrix producing a given covariance at the given shape.

    Returns
    --------
    :class:`~mmissl.matrixcore.SymMatrix`
    """
    if not isinstance(covariance, SymMatrix):
        covariance = SymMatrix(covariance)
    return covariance * (1.0 / covariance_scale(covariance.dim, shape))


def ggd_sample(spec, count, rng):
    """
    Draw samples from a GGD via its radial decomposition
    :math:`X = \\mu + \\sqrt{w}\\,L u`, with `L` the Cholesky factor of the
    dispersion, `u` uniform on the unit sphere and :math:`w = t^{1/\\beta}`,
    :math:`t \\sim \\mathrm{Gamma}(n/(2\\beta), 2)`.

    Parameters
    -----------
    spec : :class:`GgdSpec` | :class:`JointGgdSpec`
        Distribution to sample (a joint is sampled as its :math:`2d` vector).
    count : :class:`int`
        Number of samples.
    rng : :class:`numpy.random.Generator`
        Random stream.

    Returns
    --------
    :class:`numpy.ndarray`
        Array of shape `(count, n)`.
    """
    if isinstance(spec, JointGgdSpec):
        spec = spec.joint
    count = int(count)
    if count < 1:
        raise ConfigError("Sample count must be positive, got {}.".format(count))
    n, beta = spec.dim, spec.shape
    t = rng.gamma(shape=n / (2.0 * beta), scale=2.0, size=count)
    w = t ** (1.0 / beta)
    u = rng.standard_normal((count, n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return spec.mean + np.sqrt(w)[:, np.newaxis] * (u @ spec.cholesky.T)


def quadratic_form(spec, x):
    """:math:`(x-\\mu)^T\\Sigma^{-1}(x-\\mu)` for one vector or rows of `x`."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != spec.dim:
        raise DimMismatch(
            "Points of dim {} for a {}-dimensional GGD.".format(x.shape[1], spec.dim)
        )
    y = scipy.linalg.solve_triangular(spec.cholesky, (x - spec.mean).T, lower=True)
    return np.sum(y * y, axis=0)


def ggd_logpdf(spec, x):
    """
    Log-density of a GGD.

    Parameters
    -----------
    spec : :class:`GgdSpec`
        Distribution.
    x : :class:`numpy.ndarray`
        A single point, or points as rows.

    Returns
    --------
    :class:`float` | :class:`numpy.ndarray`
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFinite("Log-density requested at a non-finite point.")
    q = quadratic_form(spec, x)
    out = (
        log_normaliser(spec.shape, spec.dim)
        - 0.5 * spec.logdet
        - 0.5 * q ** spec.shape
    )
    return float(out[0]) if x.ndim == 1 else out


def ggd_entropy(spec):
    """
    Differential entropy in nats,
    :math:`\\frac{1}{2}\\log\\det\\Sigma - \\log\\Phi(\\beta, n) + n/(2\\beta)`.
    """
    return float(
        0.5 * spec.logdet
        - log_normaliser(spec.shape, spec.dim)
        + radial_moment(spec.dim, spec.shape) / 2.0
    )


def mi_closed_form(joint):
    """
    Mutual information between the two blocks of a joint GGD, in nats,

    .. math::

        I(Z; Z') = \\frac{1}{2}\\log\\frac{\\det\\Sigma_{ZZ}\\det\\Sigma_{Z'Z'}}
        {\\det\\Sigma_{\\tilde{Z}\\tilde{Z}}}.

    Only the dispersion enters; the shape is never read, so the value is
    identical for every shape and unchanged if covariances replace dispersions.

    Parameters
    -----------
    joint : :class:`JointGgdSpec`

    Returns
    --------
    :class:`float`
    """
    return 0.5 * (
        logdet_exact(joint.sigma_zz)
        + logdet_exact(joint.sigma_zpzp)
        - logdet_exact(joint.dispersion)
    )


def random_joint_dispersion(d, rng, coupling=0.6, low=0.5, high=1.5):
    """
    Random SPD joint dispersion with diagonal blocks :math:`A, B` and coupling
    :math:`\\Sigma_{ZZ'} = c\\,A^{1/2} R B^{1/2}` for a random orthogonal `R`;
    positive definite for :math:`|c| < 1`.

    Returns
    --------
    :class:`~mmissl.matrixcore.SymMatrix`
    """
    a = random_spd(d, rng, low=low, high=high).entries
    b = random_spd(d, rng, low=low, high=high).entries
    ra = scipy.linalg.sqrtm(a).real
    rb = scipy.linalg.sqrtm(b).real
    cross = coupling * ra @ random_orthogonal(d, rng) @ rb
    joint = np.block([[a, cross], [cross.T, b]])
    return SymMatrix(joint)
