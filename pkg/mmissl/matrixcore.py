"""
Dense symmetric-matrix kernel: construction with symmetry checking, cyclic Jacobi
eigendecomposition, an exact (Cholesky) log-determinant and the block-determinant
factorisation

.. math::

    \\det\\begin{bmatrix} A & B \\\\ B & A \\end{bmatrix} = \\det(A+B)\\det(A-B)

which splits the joint covariance of two views into two half-size determinants.

All routines work in double precision and are pure functions of their inputs.
"""
import logging
from collections import namedtuple
import numpy as np
import scipy.linalg
from .errors import (
    AsymmetricMatrix,
    DimMismatch,
    NonFinite,
    NotPositiveDefinite,
)

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)

JACOBI_TOL = 1e-12
ASYMMETRY_RTOL = 1e-8

Spectrum = namedtuple(
    "Spectrum", ["eigenvalues", "lambda_min", "lambda_max", "eigenvectors"]
)
Spectrum.__doc__ = """
Eigenvalues of a :class:`SymMatrix`, sorted ascending, with their extremes and
the matching orthonormal eigenvectors (as columns).
"""


class SymMatrix(object):
    """
    Immutable real symmetric matrix.

    Parameters
    -----------
    entries : :class:`numpy.ndarray`
        Square array. It is stored as :math:`(M + M^T)/2`.
    rtol : :class:`float`
        Largest tolerated relative asymmetry :math:`\\|M - M^T\\|_F / \\|M\\|_F`
        before construction is refused.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries, rtol=ASYMMETRY_RTOL):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise DimMismatch(
                "Expected a non-empty square matrix, got shape {}.".format(a.shape)
            )
        asym = np.linalg.norm(a - a.T)
        scale = np.linalg.norm(a)
        if np.isfinite(asym) and asym > rtol * scale:
            raise AsymmetricMatrix(
                "Relative asymmetry {:.3e} exceeds {:.1e}.".format(
                    asym / scale, rtol
                )
            )
        a = (a + a.T) / 2.0
        a.setflags(write=False)
        self._entries = a

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim))

    @classmethod
    def diag(cls, values):
        return cls(np.diag(np.asarray(values, dtype=float)))

    @property
    def entries(self):
        """Read-only :class:`numpy.ndarray` of the matrix entries."""
        return self._entries

    @property
    def dim(self):
        return self._entries.shape[0]

    def trace(self):
        return float(np.trace(self._entries))

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._entries
        return self._entries.astype(dtype)

    def __add__(self, other):
        return SymMatrix(self._entries + np.asarray(other))

    def __sub__(self, other):
        return SymMatrix(self._entries - np.asarray(other))

    def __mul__(self, scalar):
        return SymMatrix(self._entries * float(scalar))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, SymMatrix):
            return NotImplemented
        return np.array_equal(self._entries, other._entries)

    def __hash__(self):
        return hash(self._entries.tobytes())

    def __repr__(self):
        return "{}(dim={})".format(self.__class__.__name__, self.dim)


def _as_array(m):
    return m.entries if isinstance(m, SymMatrix) else np.asarray(m, dtype=float)


def _jacobi(a, tol=JACOBI_TOL, max_sweeps=100):
    """
    Cyclic Jacobi rotations on a copy of the symmetric array `a`.

    Returns
    --------
    :class:`tuple`
        Unsorted eigenvalues and the accumulated rotation matrix.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if n == 1 or scale == 0.0:
        return np.diag(a).copy(), v

    for sweep in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2))
        if off <= tol * scale:
            logger.debug("Jacobi converged after {} sweeps (n={}).".format(sweep, n))
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= np.finfo(float).tiny:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                a[:, p] = c * col_p - s * a[:, q]
                a[:, q] = s * col_p + c * a[:, q]
                row_p = a[p, :].copy()
                a[p, :] = c * row_p - s * a[q, :]
                a[q, :] = s * row_p + c * a[q, :]
                a[p, q] = a[q, p] = 0.0

                vec_p = v[:, p].copy()
                v[:, p] = c * vec_p - s * v[:, q]
                v[:, q] = s * vec_p + c * v[:, q]
    else:
        logger.warning(
            "Jacobi iteration stopped after {} sweeps without converging.".format(
                max_sweeps
            )
        )
    return np.diag(a).copy(), v


def sym_eig(m):
    """
    Eigenvalues and eigenvectors of a symmetric matrix by cyclic Jacobi rotations.

    Parameters
    -----------
    m : :class:`SymMatrix`
        Matrix to decompose.

    Returns
    --------
    :class:`Spectrum`
        Ascending eigenvalues, extremes and eigenvectors.
    """
    a = _as_array(m)
    if not np.all(np.isfinite(a)):
        raise NonFinite("Cannot decompose a matrix with NaN/Inf entries.")
    values, vectors = _jacobi(a)
    order = np.argsort(values, kind="stable")
    values, vectors = values[order], vectors[:, order]
    return Spectrum(values, float(values[0]), float(values[-1]), vectors)


def spectral_extremes(m):
    """
    Smallest and largest eigenvalue of a symmetric matrix.

    Returns
    --------
    :class:`tuple` of :class:`float`
    """
    spec = sym_eig(m)
    return spec.lambda_min, spec.lambda_max


def logdet_exact(m):
    """
    Log-determinant of a symmetric positive definite matrix from its Cholesky
    factor, :math:`2\\sum_i \\log L_{ii}`.

    Parameters
    -----------
    m : :class:`SymMatrix`
        Symmetric positive definite matrix.

    Returns
    --------
    :class:`float`
    """
    a = _as_array(m)
    if not np.all(np.isfinite(a)):
        raise NonFinite("Cannot factorise a matrix with NaN/Inf entries.")
    try:
        L = scipy.linalg.cholesky(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError as err:
        raise NotPositiveDefinite(str(err))
    pivots = np.diag(L)
    if np.any(pivots <= 0.0):
        raise NotPositiveDefinite("Nonpositive pivot in Cholesky factor.")
    return float(2.0 * np.sum(np.log(pivots)))


def assemble_block(a, b):
    """
    Assemble the symmetric :math:`2n \\times 2n` matrix :math:`[[A, B], [B, A]]`.

    Returns
    --------
    :class:`SymMatrix`
    """
    a, b = _as_array(a), _as_array(b)
    if a.shape != b.shape:
        raise DimMismatch("Block shapes differ: {} vs {}.".format(a.shape, b.shape))
    return SymMatrix(np.block([[a, b], [b, a]]))


def block_det_factored(a, b):
    """
    Determinant factors of the block matrix :math:`[[A, B], [B, A]]`.

    Parameters
    -----------
    a, b : :class:`SymMatrix`
        Diagonal and off-diagonal blocks of equal dimension.

    Returns
    --------
    :class:`tuple` of :class:`float`
        :math:`(\\det(A+B), \\det(A-B))`; their product is the block determinant.
    """
    a, b = _as_array(a), _as_array(b)
    if a.shape != b.shape:
        raise DimMismatch("Block shapes differ: {} vs {}.".format(a.shape, b.shape))
    return float(np.linalg.det(a + b)), float(np.linalg.det(a - b))


def random_orthogonal(dim, rng):
    """
    Haar-distributed orthogonal matrix from the QR decomposition of a Gaussian
    matrix.

    Parameters
    -----------
    dim : :class:`int`
        Matrix dimension.
    rng : :class:`numpy.random.Generator`
        Random stream.

    Returns
    --------
    :class:`numpy.ndarray`
    """
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def random_spd(dim, rng, low=0.5, high=1.5):
    """
    Random symmetric positive definite matrix with eigenvalues drawn uniformly
    from `[low, high]`, the extremes pinned to `low` and `high` when `dim > 1`.

    Returns
    --------
    :class:`SymMatrix`
    """
    values = rng.uniform(low, high, size=dim)
    if dim > 1:
        values[0], values[-1] = low, high
    q = random_orthogonal(dim, rng)
    return SymMatrix((q * values) @ q.T)


def random_symmetric(dim, rng, scale=1.0):
    """Random symmetric matrix with Gaussian entries."""
    a = rng.standard_normal((dim, dim)) * scale
    return SymMatrix((a + a.T) / 2.0)
