"""
Spectral rescaling of a symmetric matrix with tracked eigenvalue extremes.

The affine map

.. math::

    \\tilde{M} = (M - \\mu_\\lambda I)/\\alpha + I, \\quad
    \\mu_\\lambda = (\\hat\\lambda_{min} + \\hat\\lambda_{max})/2, \\quad
    \\alpha = \\beta(\\mu_\\lambda - \\hat\\lambda_{min})

confines the spectrum to :math:`[1 - 1/\\beta, 1 + 1/\\beta]` when the tracked
extremes are exact, so that the Taylor series of :math:`\\log\\det\\tilde{M}`
converges. Equivalently :math:`\\alpha\\tilde{M} = M + (\\alpha - \\mu_\\lambda)I`
is a diagonal loading of `M` followed by a global scale.
"""
import logging
from collections import namedtuple
import numpy as np
from ..matrixcore import SymMatrix, spectral_extremes
from ..errors import ConfigError, Uninitialized

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)

SPREAD_FLOOR = 1e-12
ALIGN_BLOCKS = ("pooled", "anchor")


class RescaleConfig(object):
    """
    Parameters of the rescaled truncated log-determinant.

    Parameters
    -----------
    rescale_beta : :class:`float`
        Spectral contraction :math:`\\beta > 1`.
    taylor_order : :class:`int`
        Number of terms `p` in the trace series.
    track_interval : :class:`int`
        Refresh the tracked extremes every `track_interval` batches.
    ema_rho : :class:`float`
        Moving average coefficient in :math:`[0, 1)`.
    shared_tracking : :class:`bool`
        Use the extremes of :math:`G_{ZZ}` for all three loss terms.
    align_block : :class:`str`
        `"pooled"` aligns :math:`(G_{ZZ}+G_{Z'Z'})/2` with the cross term,
        `"anchor"` uses :math:`G_{ZZ}` alone.
    """

    def __init__(
        self,
        rescale_beta=5.0,
        taylor_order=4,
        track_interval=100,
        ema_rho=0.99,
        shared_tracking=False,
        align_block="pooled",
    ):
        self.rescale_beta = float(rescale_beta)
        self.taylor_order = int(taylor_order)
        self.track_interval = int(track_interval)
        self.ema_rho = float(ema_rho)
        self.shared_tracking = bool(shared_tracking)
        self.align_block = str(align_block)
        self.validate()

    def validate(self):
        if not self.rescale_beta > 1.0:
            raise ConfigError(
                "rescale_beta must exceed 1 so that ||M~ - I|| <= 1/beta < 1 and "
                "the log-det series converges; got {}.".format(self.rescale_beta)
            )
        if self.taylor_order < 1:
            raise ConfigError("taylor_order must be >= 1.")
        if self.track_interval < 1:
            raise ConfigError("track_interval must be >= 1.")
        if not 0.0 <= self.ema_rho < 1.0:
            raise ConfigError("ema_rho must lie in [0, 1); got {}.".format(self.ema_rho))
        if self.align_block not in ALIGN_BLOCKS:
            raise ConfigError(
                "align_block must be one of {}; got '{}'.".format(
                    ALIGN_BLOCKS, self.align_block
                )
            )

    def to_dict(self):
        return dict(
            rescale_beta=self.rescale_beta,
            taylor_order=self.taylor_order,
            track_interval=self.track_interval,
            ema_rho=self.ema_rho,
            shared_tracking=self.shared_tracking,
            align_block=self.align_block,
        )

    def __eq__(self, other):
        return isinstance(other, RescaleConfig) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return "{}({})".format(
            self.__class__.__name__,
            ", ".join("{}={!r}".format(k, v) for k, v in self.to_dict().items()),
        )


class RescaleState(
    namedtuple("RescaleState", ["lambda_min", "lambda_max", "counter", "initialized"])
):
    """
    Tracked eigenvalue extremes of one loss term and the number of batches seen.
    """

    __slots__ = ()

    @classmethod
    def empty(cls):
        return cls(0.0, 0.0, 0, False)

    @classmethod
    def exact(cls, m):
        """State seeded with the exact extremes of `m`."""
        lo, hi = spectral_extremes(m)
        return cls(lo, hi, 0, True)


def rescale_params(state, cfg):
    """
    Centre :math:`\\mu_\\lambda` and scale :math:`\\alpha` from tracked extremes.

    Returns
    --------
    :class:`tuple` of :class:`float`
    """
    mu = (state.lambda_min + state.lambda_max) / 2.0
    if state.lambda_max - state.lambda_min < SPREAD_FLOOR:
        alpha = SPREAD_FLOOR * cfg.rescale_beta
        logger.debug("Degenerate tracked spectrum; alpha floored at {:.1e}.".format(alpha))
    else:
        alpha = cfg.rescale_beta * (mu - state.lambda_min)
    return mu, alpha


def rescale(m, state, cfg, center=True, lazy_init=True):
    """
    Rescale a symmetric matrix with the tracked extremes held in `state`.

    Parameters
    -----------
    m : :class:`~mmissl.matrixcore.SymMatrix`
        Matrix to rescale.
    state : :class:`RescaleState`
        Tracked extremes.
    cfg : :class:`RescaleConfig`
        Rescaling parameters.
    center : :class:`bool`
        Subtract :math:`\\mu_\\lambda I`. With `False` the map is
        :math:`M/\\alpha + I`.
    lazy_init : :class:`bool`
        Use the exact extremes of `m` when `state` has not been seeded.

    Returns
    --------
    :class:`~mmissl.matrixcore.SymMatrix`
    """
    mtilde, _ = _rescale_with_alpha(m, state, cfg, center=center, lazy_init=lazy_init)
    return mtilde


def _rescale_with_alpha(m, state, cfg, center=True, lazy_init=True):
    if not state.initialized:
        if not lazy_init:
            raise Uninitialized("Rescale state has not been seeded.")
        state = RescaleState.exact(m)
    mu, alpha = rescale_params(state, cfg)
    a = np.asarray(m, dtype=float)
    n = a.shape[0]
    shifted = a - mu * np.eye(n) if center else a
    return SymMatrix(shifted / alpha + np.eye(n)), alpha


def update_rescale_state(state, m, cfg):
    """
    Advance the batch counter and, on a refresh batch, blend the exact extremes
    of `m` into the tracked values,
    :math:`\\hat\\lambda \\leftarrow \\rho\\hat\\lambda + (1-\\rho)\\lambda`.
    The first refresh sets the extremes directly.

    Parameters
    -----------
    state : :class:`RescaleState`
    m : :class:`~mmissl.matrixcore.SymMatrix`
    cfg : :class:`RescaleConfig`

    Returns
    --------
    :class:`RescaleState`
    """
    if state.initialized and state.counter % cfg.track_interval != 0:
        return state._replace(counter=state.counter + 1)
    lo, hi = spectral_extremes(m)
    if state.initialized:
        rho = cfg.ema_rho
        lo = rho * state.lambda_min + (1.0 - rho) * lo
        hi = rho * state.lambda_max + (1.0 - rho) * hi
    logger.debug(
        "Refreshed tracked extremes at batch {}: [{:.4g}, {:.4g}].".format(
            state.counter + 1, lo, hi
        )
    )
    return RescaleState(lo, hi, state.counter + 1, True)
