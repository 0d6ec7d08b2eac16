"""
SGD with momentum and weight decay, and the warmup plus cosine learning-rate
schedule.
"""
import logging
import numpy as np

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)


class SGD(object):
    """
    Stochastic gradient descent with heavy-ball momentum,

    .. math::

        v \\leftarrow \\mu v + g + \\lambda w, \\quad w \\leftarrow w - \\eta v,

    where weight decay :math:`\\lambda` applies to weights only.

    Parameters
    -----------
    momentum : :class:`float`
        Momentum coefficient :math:`\\mu`.
    weight_decay : :class:`float`
        L2 coefficient :math:`\\lambda`.
    """

    def __init__(self, momentum=0.9, weight_decay=0.0):
        self.momentum = float(momentum)
        self.weight_decay = float(weight_decay)

    def step(self, params, grads, velocity, lr):
        """
        Apply one update.

        Parameters
        -----------
        params, grads, velocity : :class:`list` of :class:`dict`
            Parameters, gradients and momentum slots in the same layout.
        lr : :class:`float`
            Learning rate.

        Returns
        --------
        :class:`tuple`
            Updated parameters and momentum slots (new arrays).
        """
        new_params, new_velocity = [], []
        for layer, grad, slot in zip(params, grads, velocity):
            p_out, v_out = {}, {}
            for key, w in layer.items():
                g = grad[key]
                if key == "weight" and self.weight_decay:
                    g = g + self.weight_decay * w
                v = self.momentum * slot[key] + g
                v_out[key] = v
                p_out[key] = w - lr * v
            new_params.append(p_out)
            new_velocity.append(v_out)
        return new_params, new_velocity


def cosine_lr(step, cfg):
    """
    Learning rate at optimizer step `step`: linear warmup from zero to
    `cfg.base_lr` over the warmup steps, then
    :math:`\\frac{1}{2}\\eta_0(1 + \\cos\\pi t)` with progress `t` reaching one at
    the final step.

    Parameters
    -----------
    step : :class:`int`
        Number of optimizer updates applied so far.
    cfg : :class:`~mmissl.siamese.train.TrainConfig`

    Returns
    --------
    :class:`float`
    """
    base = cfg.base_lr
    warmup = cfg.warmup_steps
    total = cfg.total_steps
    if step < warmup:
        return base * step / warmup
    if total <= warmup:
        return base
    progress = min((step - warmup) / (total - warmup), 1.0)
    return 0.5 * base * (1.0 + np.cos(np.pi * progress))
