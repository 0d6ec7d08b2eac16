"""
Embedding batches and the second-order statistics built from them.

A batch holds `m` embeddings of dimension `d` as the columns of a
:math:`d \\times m` matrix :math:`\\bar{Z}`. After per-feature standardisation
the loss works with the :math:`m \\times m` Gram forms

.. math::

    G_{ZZ} = \\bar{Z}^T\\bar{Z}/m, \\quad G_{Z'Z'} = \\bar{Z}'^T\\bar{Z}'/m, \\quad
    G_{ZZ'} = (\\bar{Z}^T\\bar{Z}' + \\bar{Z}'^T\\bar{Z})/(2m),

whose nonzero eigenvalues are those of the :math:`d \\times d` covariance forms.
The cross term is symmetrised so that every matrix entering the log-determinant
has a real spectrum.
"""
import logging
from collections import namedtuple
import numpy as np
from .matrixcore import SymMatrix, assemble_block, logdet_exact
from .errors import BatchTooSmall, DimMismatch, NotNormalized

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)

NORM_EPS = 1e-5


class EmbeddingBatch(object):
    """
    A :math:`d \\times m` batch of embeddings (one column per sample).

    Parameters
    -----------
    data : :class:`numpy.ndarray`
        Embedding matrix of shape `(d, m)`.
    normalized : :class:`bool`
        Whether rows have been standardised.
    mean, scale : :class:`numpy.ndarray`, :code:`None`
        Per-feature mean and :math:`\\sqrt{\\sigma^2 + \\epsilon}` used for the
        standardisation, kept for the backward pass.
    eps : :class:`float`, :code:`None`
        Variance guard used for the standardisation.
    """

    def __init__(self, data, normalized=False, mean=None, scale=None, eps=None):
        data = np.array(data, dtype=float)
        if data.ndim != 2:
            raise DimMismatch(
                "Embedding batch must be 2D (d, m), got shape {}.".format(data.shape)
            )
        data.setflags(write=False)
        self.data = data
        self.normalized = bool(normalized)
        self.mean = mean
        self.scale = scale
        self.eps = eps

    @classmethod
    def from_rows(cls, rows, **kwargs):
        """Build a batch from samples stored as rows, shape `(m, d)`."""
        return cls(np.asarray(rows, dtype=float).T, **kwargs)

    @property
    def d(self):
        return self.data.shape[0]

    @property
    def m(self):
        return self.data.shape[1]

    def __repr__(self):
        return "{}(d={}, m={}, normalized={})".format(
            self.__class__.__name__, self.d, self.m, self.normalized
        )


class GramSet(namedtuple("GramSet", ["g_zz", "g_zpzp", "g_zzp_sym"])):
    """
    The three :math:`m \\times m` Gram forms of a pair of batches, each a
    :class:`~mmissl.matrixcore.SymMatrix`.
    """

    __slots__ = ()

    def scaled(self, c):
        """Every matrix multiplied by a positive constant `c`."""
        return GramSet(*[g * c for g in self])

    def pooled(self):
        """:math:`(G_{ZZ} + G_{Z'Z'})/2`, the shared diagonal block."""
        return SymMatrix((self.g_zz.entries + self.g_zpzp.entries) / 2.0)


def normalize_batch(raw, eps=NORM_EPS):
    """
    Standardise each feature (row) of a batch: subtract the row mean and divide
    by :math:`\\sqrt{\\sigma^2 + \\epsilon}` (population variance). A constant
    row becomes all-zero.

    Parameters
    -----------
    raw : :class:`EmbeddingBatch`
        Batch to standardise.
    eps : :class:`float`
        Variance guard.

    Returns
    --------
    :class:`EmbeddingBatch`
    """
    x = raw.data
    if x.shape[1] < 2:
        raise BatchTooSmall("Standardisation needs m >= 2, got {}.".format(x.shape[1]))
    mean = x.mean(axis=1, keepdims=True)
    centred = x - mean
    var = np.mean(centred * centred, axis=1, keepdims=True)
    scale = np.sqrt(var + eps)
    return EmbeddingBatch(
        centred / scale, normalized=True, mean=mean, scale=scale, eps=eps
    )


def normalize_backward(normalized, grad):
    """
    Gradient with respect to the raw batch given the gradient with respect to
    the standardised batch, differentiating through the batch statistics.

    Parameters
    -----------
    normalized : :class:`EmbeddingBatch`
        Output of :func:`normalize_batch`.
    grad : :class:`numpy.ndarray`
        Gradient of shape `(d, m)` with respect to `normalized.data`.

    Returns
    --------
    :class:`numpy.ndarray`
    """
    if normalized.scale is None:
        raise NotNormalized("Batch carries no standardisation statistics.")
    y = normalized.data
    g = np.asarray(grad, dtype=float)
    return (
        g
        - g.mean(axis=1, keepdims=True)
        - y * np.mean(g * y, axis=1, keepdims=True)
    ) / normalized.scale


def _sym_product(a, b):
    """:math:`(A^T B + B^T A)/(2m)`, exactly symmetric."""
    p = a.T @ b
    return SymMatrix((p + p.T) / (2.0 * a.shape[1]))


def _check_pair(z, zprime):
    if (z.d, z.m) != (zprime.d, zprime.m):
        raise DimMismatch(
            "Batches differ in shape: {} vs {}.".format(z.data.shape, zprime.data.shape)
        )
    if not (z.normalized and zprime.normalized):
        raise NotNormalized("Gram forms are built from standardised batches.")


def build_gram_set(z, zprime):
    """
    Build the three Gram forms with :math:`1/m` scaling.

    Parameters
    -----------
    z, zprime : :class:`EmbeddingBatch`
        Standardised batches of equal shape.

    Returns
    --------
    :class:`GramSet`
    """
    _check_pair(z, zprime)
    a, b = z.data, zprime.data
    return GramSet(_sym_product(a, a), _sym_product(b, b), _sym_product(a, b))


def covariance_blocks(z, zprime):
    """
    The :math:`d \\times d` pooled covariance
    :math:`C = (\\bar{Z}\\bar{Z}^T + \\bar{Z}'\\bar{Z}'^T)/(2m)` and symmetrised
    cross covariance :math:`X = (\\bar{Z}\\bar{Z}'^T + \\bar{Z}'\\bar{Z}^T)/(2m)`.

    Returns
    --------
    :class:`tuple` of :class:`~mmissl.matrixcore.SymMatrix`
    """
    _check_pair(z, zprime)
    a, b, m = z.data, zprime.data, z.m
    c = SymMatrix((a @ a.T + b @ b.T) / (2.0 * m))
    x = SymMatrix((a @ b.T + b @ a.T) / (2.0 * m))
    return c, x


def block_logdet_check(c, x):
    """
    Log-determinant of the joint covariance :math:`[[C, X], [X, C]]` computed
    directly and through the factorisation :math:`\\log\\det(C+X) + \\log\\det(C-X)`.

    Returns
    --------
    :class:`tuple` of :class:`float`
    """
    c, x = np.asarray(c), np.asarray(x)
    direct = logdet_exact(assemble_block(c, x))
    factored = logdet_exact(SymMatrix(c + x)) + logdet_exact(SymMatrix(c - x))
    return direct, factored


def joint_cov_logdet_check(z, zprime):
    """
    Validate the block factorisation of the joint covariance of two views,
    using the pooled covariance for both diagonal blocks.

    Parameters
    -----------
    z, zprime : :class:`EmbeddingBatch`
        Standardised batches; `m` should exceed `2d` for the joint covariance
        to be positive definite.

    Returns
    --------
    :class:`tuple` of :class:`float`
        Direct and factored log-determinants.
    """
    c, x = covariance_blocks(z, zprime)
    return block_logdet_check(c, x)
