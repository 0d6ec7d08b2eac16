"""
Central finite-difference checks of the analytic loss and encoder gradients.
"""
import logging
import numpy as np
from ..embedstats import EmbeddingBatch, normalize_batch
from ..loss import RescaleConfig, exact_loss_states, mmi_loss
from ..siamese.network import predict
from ..siamese.train import TrainConfig, loss_and_grads

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)

FROZEN_INTERVAL = 10 ** 9


def numerical_gradient(f, x, h=1e-5, index=None):
    """
    Central differences :math:`(f(x + h e_i) - f(x - h e_i)) / 2h`.

    Parameters
    -----------
    f : :class:`callable`
        Scalar function of an array shaped like `x`.
    x : :class:`numpy.ndarray`
        Evaluation point.
    h : :class:`float`
        Step.
    index : :class:`numpy.ndarray`, :code:`None`
        Flat indices to differentiate; all entries when omitted.

    Returns
    --------
    :class:`numpy.ndarray`
        Gradient of the shape of `x` (zero outside `index`).
    """
    x = np.array(x, dtype=float)
    grad = np.zeros(x.size)
    flat = x.ravel()
    for i in range(x.size) if index is None else index:
        orig = flat[i]
        flat[i] = orig + h
        up = f(x)
        flat[i] = orig - h
        down = f(x)
        flat[i] = orig
        grad[i] = (up - down) / (2.0 * h)
    return grad.reshape(x.shape)


def relative_error(analytic, numeric):
    """:math:`\\|a - n\\| / \\max(\\|a\\|, \\|n\\|)`, zero when both vanish."""
    analytic, numeric = np.ravel(analytic), np.ravel(numeric)
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric))
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / scale)


def frozen_config(cfg):
    """A copy of `cfg` whose tracked extremes are never refreshed again."""
    return RescaleConfig(**dict(cfg.to_dict(), track_interval=FROZEN_INTERVAL))


def frozen_states(z, zprime, cfg):
    """
    Tracking states seeded with the exact extremes of the batch and advanced
    past their first refresh, so that with :func:`frozen_config` they stay
    fixed while the inputs are perturbed.
    """
    states = exact_loss_states(z, zprime, cfg)
    return states._replace(**{k: s._replace(counter=1) for k, s in states._asdict().items()})


def loss_grad_check(z, zprime, states, cfg, variant="Full", h=1e-5):
    """
    Compare the analytic gradients of :func:`~mmissl.loss.mmi_loss` with
    respect to both standardised batches against finite differences.

    Returns
    --------
    :class:`tuple`
        Relative errors for :math:`\\bar{Z}` and :math:`\\bar{Z}'`.
    """
    breakdown = mmi_loss(z, zprime, states, cfg, variant)

    def total_z(a):
        return mmi_loss(EmbeddingBatch(a, normalized=True), zprime, states, cfg, variant).total

    def total_zp(b):
        return mmi_loss(z, EmbeddingBatch(b, normalized=True), states, cfg, variant).total

    err_z = relative_error(breakdown.grad_z, numerical_gradient(total_z, z.data, h))
    err_zp = relative_error(breakdown.grad_zprime, numerical_gradient(total_zp, zprime.data, h))
    logger.debug("Loss gradient errors: {:.3g} (Z), {:.3g} (Z').".format(err_z, err_zp))
    return err_z, err_zp


def _flat(params):
    return np.concatenate(
        [np.concatenate([layer["weight"].ravel(), layer["bias"].ravel()]) for layer in params]
    )


def _unflat(flat, like):
    out, offset = [], 0
    for layer in like:
        new = {}
        for key in ("weight", "bias"):
            n = layer[key].size
            new[key] = flat[offset : offset + n].reshape(layer[key].shape)
            offset += n
        out.append(new)
    return out


def encoder_grad_check(state, x, xprime, cfg, h=1e-5, entries=None, rng=None):
    """
    Compare backpropagated parameter gradients of the full pipeline (encoder,
    standardisation, loss) against finite differences, with the tracking
    states frozen at the exact extremes of the unperturbed batch.

    Parameters
    -----------
    state : :class:`~mmissl.siamese.train.EncoderState`
    x, xprime : :class:`numpy.ndarray`
        The two input views.
    cfg : :class:`~mmissl.siamese.train.TrainConfig`
    entries : :class:`int`, :code:`None`
        Differentiate only this many randomly chosen parameters per group.
    rng : :class:`numpy.random.Generator`, :code:`None`
        Stream choosing the parameters.

    Returns
    --------
    :class:`dict`
        Relative error per trainable parameter group.
    """
    rescale_cfg = frozen_config(cfg.rescale)
    cfg = TrainConfig.from_dict(dict(cfg.to_dict(), rescale=rescale_cfg.to_dict()))
    out = predict(state.online, state.spec, x)
    if cfg.momentum_encoder:
        out = predict(state.predictor, state.predictor_spec, out)
        zp_rows = predict(state.target, state.spec, xprime)
    else:
        zp_rows = predict(state.online, state.spec, xprime)
    z = normalize_batch(EmbeddingBatch.from_rows(out), cfg.norm_eps)
    zp = normalize_batch(EmbeddingBatch.from_rows(zp_rows), cfg.norm_eps)
    states = frozen_states(z, zp, rescale_cfg)

    _, grads, _ = loss_and_grads(state, x, xprime, cfg, states)
    rng = rng if rng is not None else np.random.default_rng(0)
    errors = {}
    for group, params in state.trainable().items():
        base = _flat(params)

        def total(flat):
            trial = state.copy()
            setattr(trial, group, _unflat(flat, params))
            breakdown, _, _ = loss_and_grads(trial, x, xprime, cfg, states)
            return breakdown.total

        index = None
        if entries is not None and entries < base.size:
            index = np.sort(rng.choice(base.size, size=entries, replace=False))
        numeric = numerical_gradient(total, base, h, index=index)
        analytic = _flat(grads[group])
        if index is not None:
            analytic, numeric = analytic[index], numeric[index]
        errors[group] = relative_error(analytic, numeric)
    logger.debug("Encoder gradient errors: {}.".format(errors))
    return errors
