"""
The rescaled, Taylor-truncated log-determinant loss and its eigenvalue tracking.
"""
import logging
from .rescale import (
    RescaleConfig,
    RescaleState,
    rescale,
    rescale_params,
    update_rescale_state,
)
from .taylor import logdet_taylor, logdet_taylor_grad, logdet_taylor_with_grad
from .mmi import (
    LossVariant,
    LossStates,
    LossBreakdown,
    align_matrix,
    loss_matrices,
    update_loss_states,
    exact_loss_states,
    mmi_loss,
)

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)
