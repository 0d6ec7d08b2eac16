"""
Truncated Taylor series of the log-determinant,

.. math::

    \\log\\det\\tilde{M} \\approx \\mathrm{tr}\\sum_{k=1}^{p}
        \\frac{(-1)^{k+1}}{k}(\\tilde{M} - I)^k,

valid when the spectral radius of :math:`\\tilde{M} - I` is below one.
"""
import logging
import numpy as np

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)

DEFAULT_ORDER = 4


def _powers(m_tilde, p):
    x = np.asarray(m_tilde, dtype=float)
    x = x - np.eye(x.shape[0])
    power = np.eye(x.shape[0])
    for k in range(1, p + 1):
        yield k, power, x
        power = power @ x


def logdet_taylor(m_tilde, p=DEFAULT_ORDER):
    """
    Truncated trace series for :math:`\\log\\det\\tilde{M}`, accumulated over
    the iterated products :math:`X, X^2, \\ldots, X^p` with :math:`X = \\tilde{M} - I`.

    Parameters
    -----------
    m_tilde : :class:`~mmissl.matrixcore.SymMatrix`
        Rescaled matrix.
    p : :class:`int`
        Truncation order.

    Returns
    --------
    :class:`float`
    """
    total = 0.0
    for k, power, x in _powers(m_tilde, p):
        # tr(X^k) = sum(X^{k-1} * X) for symmetric X
        total += (-1.0) ** (k + 1) * np.sum(power * x) / k
    return float(total)


def logdet_taylor_grad(m_tilde, p=DEFAULT_ORDER):
    """
    Derivative of :func:`logdet_taylor` with respect to :math:`\\tilde{M}`,
    :math:`\\sum_{k=1}^{p} (-1)^{k+1} X^{k-1}`.

    Returns
    --------
    :class:`numpy.ndarray`
    """
    grad = None
    for k, power, _ in _powers(m_tilde, p):
        term = (-1.0) ** (k + 1) * power
        grad = term if grad is None else grad + term
    return grad


def logdet_taylor_with_grad(m_tilde, p=DEFAULT_ORDER):
    """Value and gradient of the truncated series in one pass."""
    total, grad = 0.0, None
    for k, power, x in _powers(m_tilde, p):
        sign = (-1.0) ** (k + 1)
        total += sign * np.sum(power * x) / k
        grad = sign * power if grad is None else grad + sign * power
    return float(total), grad
