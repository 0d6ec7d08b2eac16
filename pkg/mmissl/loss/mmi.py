"""
Log-determinant mutual information loss between two embedding batches,

.. math::

    \\mathcal{L} = \\log\\det(G_{ZZ} - G_{ZZ'}) - \\log\\det G_{ZZ}
        - \\log\\det G_{Z'Z'},

each log-determinant evaluated as a truncated Taylor series of the rescaled
Gram form. Gradients with respect to both standardised batches are analytic,
with the rescaling centre and scale held constant.
"""
import logging
from collections import namedtuple
from enum import Enum
import numpy as np
from ..matrixcore import SymMatrix
from ..embedstats import build_gram_set
from ..errors import ConfigError, NonFiniteLoss
from .rescale import RescaleState, _rescale_with_alpha, update_rescale_state
from .taylor import logdet_taylor_with_grad

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)


class LossVariant(Enum):
    """Loss configurations of the ablation grid."""

    Full = "Full"
    NoLogdetZ = "NoLogdetZ"
    NoLogdetZprime = "NoLogdetZprime"
    NoBoth = "NoBoth"
    MseAlign = "MseAlign"
    NoMuLambda = "NoMuLambda"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value))
        except ValueError:
            raise ConfigError(
                "Unknown loss variant '{}'; expected one of {}.".format(
                    value, [v.value for v in cls]
                )
            )

    @property
    def uses_term_z(self):
        return self not in (LossVariant.NoLogdetZ, LossVariant.NoBoth)

    @property
    def uses_term_zprime(self):
        return self not in (LossVariant.NoLogdetZprime, LossVariant.NoBoth)

    @property
    def centered(self):
        return self is not LossVariant.NoMuLambda


class LossStates(namedtuple("LossStates", ["align", "z", "zprime"])):
    """One :class:`~mmissl.loss.rescale.RescaleState` per log-determinant term."""

    __slots__ = ()

    @classmethod
    def empty(cls):
        return cls(RescaleState.empty(), RescaleState.empty(), RescaleState.empty())

    def swapped(self):
        return LossStates(self.align, self.zprime, self.z)


LossBreakdown = namedtuple(
    "LossBreakdown",
    ["term_align", "term_z", "term_zprime", "total", "grad_z", "grad_zprime"],
)
LossBreakdown.__doc__ = """
Loss terms, their total :math:`\\mathcal{L}_{align} - \\mathcal{L}_Z -
\\mathcal{L}_{Z'}` and the gradients of the total with respect to both
:math:`d \\times m` standardised batches.
"""


def align_matrix(z, zprime, grams, block="pooled"):
    """
    The first log-determinant argument.

    With `block="pooled"` this is
    :math:`(G_{ZZ} + G_{Z'Z'})/2 - G_{ZZ'} = (\\bar{Z}-\\bar{Z}')^T(\\bar{Z}-\\bar{Z}')/(2m)`,
    symmetric in the two views; with `block="anchor"` it is
    :math:`G_{ZZ} - G_{ZZ'}`.

    Returns
    --------
    :class:`~mmissl.matrixcore.SymMatrix`
    """
    if block == "anchor":
        return SymMatrix(grams.g_zz.entries - grams.g_zzp_sym.entries)
    diff = z.data - zprime.data
    p = diff.T @ diff
    return SymMatrix((p + p.T) / (4.0 * z.m))


def loss_matrices(z, zprime, cfg):
    """
    The Gram set and the three matrices whose extremes are tracked, in the order
    (align, Z, Z').
    """
    grams = build_gram_set(z, zprime)
    return grams, (align_matrix(z, zprime, grams, cfg.align_block), grams.g_zz, grams.g_zpzp)


def update_loss_states(states, z, zprime, cfg):
    """
    Advance the three tracking states with this batch's matrices. With
    `cfg.shared_tracking` the extremes of :math:`G_{ZZ}` are used for every term.

    Returns
    --------
    :class:`LossStates`
    """
    _, mats = loss_matrices(z, zprime, cfg)
    if cfg.shared_tracking:
        shared = update_rescale_state(states.z, mats[1], cfg)
        return LossStates(shared, shared, shared)
    return LossStates(
        *[update_rescale_state(s, m, cfg) for s, m in zip(states, mats)]
    )


def exact_loss_states(z, zprime, cfg):
    """States holding the exact extremes of this batch's matrices."""
    _, mats = loss_matrices(z, zprime, cfg)
    if cfg.shared_tracking:
        shared = RescaleState.exact(mats[1])
        return LossStates(shared, shared, shared)
    return LossStates(*[RescaleState.exact(m) for m in mats])


def _term(m, state, cfg, variant):
    mtilde, alpha = _rescale_with_alpha(
        m, state, cfg, center=variant.centered, lazy_init=False
    )
    value, grad = logdet_taylor_with_grad(mtilde, cfg.taylor_order)
    return value, grad / alpha


def _check_finite(name, value):
    if not np.isfinite(value):
        raise NonFiniteLoss(name, "Loss term '{}' evaluated to {}.".format(name, value))


def mmi_loss(z, zprime, states, cfg, variant=LossVariant.Full):
    """
    Evaluate the loss and its gradients for a pair of standardised batches.

    Parameters
    -----------
    z, zprime : :class:`~mmissl.embedstats.EmbeddingBatch`
        Standardised :math:`d \\times m` batches of the two views.
    states : :class:`LossStates`
        Tracking states already updated for this batch.
    cfg : :class:`~mmissl.loss.rescale.RescaleConfig`
        Rescaling parameters.
    variant : :class:`LossVariant`
        Which terms enter the loss.

    Returns
    --------
    :class:`LossBreakdown`
    """
    variant = LossVariant.parse(variant)
    grams, (m_align, m_z, m_zp) = loss_matrices(z, zprime, cfg)
    a, b, m = z.data, zprime.data, z.m
    grad_z = np.zeros_like(a)
    grad_zp = np.zeros_like(b)

    if variant is LossVariant.MseAlign:
        diff = a - b
        term_align = float(np.sum(diff * diff) / m)
        grad_z += 2.0 * diff / m
        grad_zp -= 2.0 * diff / m
    else:
        term_align, g = _term(m_align, states.align, cfg, variant)
        if cfg.align_block == "anchor":
            grad_z += (2.0 * a - b) @ g / m
            grad_zp -= a @ g / m
        else:
            dg = (a - b) @ g / m
            grad_z += dg
            grad_zp -= dg
    _check_finite("align", term_align)

    term_z = term_zp = 0.0
    if variant.uses_term_z:
        term_z, g = _term(m_z, states.z, cfg, variant)
        _check_finite("z", term_z)
        grad_z -= 2.0 * a @ g / m
    if variant.uses_term_zprime:
        term_zp, g = _term(m_zp, states.zprime, cfg, variant)
        _check_finite("zprime", term_zp)
        grad_zp -= 2.0 * b @ g / m

    total = term_align - term_z - term_zp
    _check_finite("total", total)
    return LossBreakdown(term_align, term_z, term_zp, total, grad_z, grad_zp)
