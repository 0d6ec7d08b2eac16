"""
Siamese training: both views through a shared encoder (or online encoder plus
predictor against a momentum target), loss evaluation, backpropagation,
gradient accumulation and the optimizer update.
"""
import logging
import numpy as np
from tqdm import tqdm
from pyrolite.util.log import ToLogger
from ..embedstats import EmbeddingBatch, normalize_batch, normalize_backward, NORM_EPS
from ..errors import ConfigError, NoTarget, NonFinite
from ..loss import LossStates, LossVariant, RescaleConfig, mmi_loss, update_loss_states
from ..synthdata import augment_batch
from .network import (
    MlpSpec,
    backward,
    copy_params,
    forward,
    init_params,
    predict,
    zeros_like_params,
)
from .optim import SGD, cosine_lr

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)


class TrainConfig(object):
    """
    Optimisation settings for the Siamese trainer.

    Parameters
    -----------
    batch_size : :class:`int`
        Samples per batch, `m`.
    epochs : :class:`int`
        Passes over the dataset.
    base_lr : :class:`float`
        Peak learning rate.
    warmup_epochs : :class:`float`
        Length of the linear warmup.
    weight_decay : :class:`float`
        L2 coefficient on weights.
    optimizer_momentum : :class:`float`
        SGD momentum.
    tau : :class:`float`
        Target network moving-average coefficient in :math:`[0, 1]`.
    grad_accum_steps : :class:`int`
        Batches averaged per optimizer update.
    variant : :class:`~mmissl.loss.LossVariant`
        Loss variant.
    rescale : :class:`~mmissl.loss.RescaleConfig`
        Rescaling parameters.
    seed : :class:`int`
        Seed recorded with the configuration.
    momentum_encoder : :class:`bool`
        Train an online encoder with predictor against a moving-average target.
    steps_per_epoch : :class:`int`
        Optimizer updates per epoch, used by the learning-rate schedule.
    batches_per_epoch : :class:`int`, :code:`None`
        Batches drawn per epoch. When set, the schedule counts the updates made
        with accumulation carrying across epochs,
        :math:`\lfloor \mathrm{epochs} \cdot \mathrm{batches} / \mathrm{accum} \rfloor`.
    norm_eps : :class:`float`
        Variance guard of the embedding standardisation.
    """

    def __init__(
        self,
        batch_size=128,
        epochs=50,
        base_lr=0.05,
        warmup_epochs=2,
        weight_decay=1e-4,
        optimizer_momentum=0.9,
        tau=0.996,
        grad_accum_steps=1,
        variant=LossVariant.Full,
        rescale=None,
        seed=0,
        momentum_encoder=False,
        steps_per_epoch=1,
        batches_per_epoch=None,
        norm_eps=NORM_EPS,
    ):
        self.batch_size = int(batch_size)
        self.epochs = int(epochs)
        self.base_lr = float(base_lr)
        self.warmup_epochs = float(warmup_epochs)
        self.weight_decay = float(weight_decay)
        self.optimizer_momentum = float(optimizer_momentum)
        self.tau = float(tau)
        self.grad_accum_steps = int(grad_accum_steps)
        self.variant = LossVariant.parse(variant)
        self.rescale = rescale if rescale is not None else RescaleConfig()
        self.seed = int(seed)
        self.momentum_encoder = bool(momentum_encoder)
        self.steps_per_epoch = int(steps_per_epoch)
        self.batches_per_epoch = (
            int(batches_per_epoch) if batches_per_epoch is not None else None
        )
        self.norm_eps = float(norm_eps)
        if self.batch_size < 2:
            raise ConfigError("batch_size must be >= 2.")
        if self.grad_accum_steps < 1:
            raise ConfigError("grad_accum_steps must be >= 1.")
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigError("tau must lie in [0, 1]; got {}.".format(self.tau))

    @property
    def warmup_steps(self):
        if self.batches_per_epoch is None:
            return int(round(self.warmup_epochs * self.steps_per_epoch))
        return int(
            round(self.warmup_epochs * self.batches_per_epoch / self.grad_accum_steps)
        )

    @property
    def total_steps(self):
        if self.batches_per_epoch is None:
            return self.epochs * self.steps_per_epoch
        return self.epochs * self.batches_per_epoch // self.grad_accum_steps

    def to_dict(self):
        return dict(
            batch_size=self.batch_size,
            epochs=self.epochs,
            base_lr=self.base_lr,
            warmup_epochs=self.warmup_epochs,
            weight_decay=self.weight_decay,
            optimizer_momentum=self.optimizer_momentum,
            tau=self.tau,
            grad_accum_steps=self.grad_accum_steps,
            variant=self.variant.value,
            rescale=self.rescale.to_dict(),
            seed=self.seed,
            momentum_encoder=self.momentum_encoder,
            steps_per_epoch=self.steps_per_epoch,
            batches_per_epoch=self.batches_per_epoch,
            norm_eps=self.norm_eps,
        )

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["rescale"] = RescaleConfig(**d.get("rescale", {}))
        return cls(**d)


class EncoderState(object):
    """
    Encoder parameters, optional target and predictor networks, momentum slots
    and the gradient accumulator.

    Parameters
    -----------
    spec : :class:`~mmissl.siamese.network.MlpSpec`
        Online encoder layout.
    online : :class:`list` of :class:`dict`
        Online parameters.
    target : :class:`list` of :class:`dict`, :code:`None`
        Moving-average copy of `online`.
    predictor : :class:`list` of :class:`dict`, :code:`None`
        Predictor parameters.
    predictor_spec : :class:`~mmissl.siamese.network.MlpSpec`, :code:`None`
        Predictor layout.
    """

    def __init__(
        self,
        spec,
        online,
        target=None,
        predictor=None,
        predictor_spec=None,
        velocity=None,
        step=0,
        accum=None,
        accum_count=0,
        last_grad_norm=0.0,
    ):
        self.spec = spec
        self.online = online
        self.target = target
        self.predictor = predictor
        self.predictor_spec = predictor_spec
        self.velocity = velocity or {
            k: zeros_like_params(v) for k, v in self.trainable().items()
        }
        self.step = int(step)
        self.accum = accum
        self.accum_count = int(accum_count)
        self.last_grad_norm = float(last_grad_norm)

    @classmethod
    def create(cls, spec, rng, momentum_encoder=False):
        """
        Fresh state. With `momentum_encoder` the target starts as a copy of the
        online encoder and a two-layer predictor of hidden width twice the
        output width is added.
        """
        online = init_params(spec, rng)
        if not momentum_encoder:
            return cls(spec, online)
        out = spec.output_dim
        predictor_spec = MlpSpec((out, 2 * out, out), batchnorm=spec.batchnorm)
        return cls(
            spec,
            online,
            target=copy_params(online),
            predictor=init_params(predictor_spec, rng),
            predictor_spec=predictor_spec,
        )

    @property
    def has_target(self):
        return self.target is not None

    def trainable(self):
        groups = dict(online=self.online)
        if self.predictor is not None:
            groups["predictor"] = self.predictor
        return groups

    def copy(self):
        return EncoderState(
            self.spec,
            copy_params(self.online),
            target=copy_params(self.target) if self.target is not None else None,
            predictor=copy_params(self.predictor) if self.predictor is not None else None,
            predictor_spec=self.predictor_spec,
            velocity={k: copy_params(v) for k, v in self.velocity.items()},
            step=self.step,
            accum={k: copy_params(v) for k, v in self.accum.items()}
            if self.accum is not None
            else None,
            accum_count=self.accum_count,
            last_grad_norm=self.last_grad_norm,
        )

    def parameters(self):
        """All parameters (online, target, predictor) as one flat vector."""
        parts = []
        for group in (self.online, self.target, self.predictor):
            for layer in group or []:
                parts += [layer["weight"].ravel(), layer["bias"].ravel()]
        return np.concatenate(parts)


def encode(state, x, use_target=False):
    """
    Embeddings of an input batch (rows) through the online or target encoder.

    Parameters
    -----------
    state : :class:`EncoderState`
    x : :class:`numpy.ndarray`
        Input rows, shape `(m, input_dim)`.
    use_target : :class:`bool`
        Use the target network.

    Returns
    --------
    :class:`~mmissl.embedstats.EmbeddingBatch`
        Unstandardised :math:`d \\times m` embeddings.
    """
    if use_target and not state.has_target:
        raise NoTarget("Encoder state has no target network.")
    params = state.target if use_target else state.online
    return EmbeddingBatch.from_rows(predict(params, state.spec, x))


def _add(a, b):
    return [{k: la[k] + lb[k] for k in la} for la, lb in zip(a, b)]


def _grad_norm(groups):
    return float(
        np.sqrt(
            sum(
                np.sum(v * v)
                for group in groups.values()
                for layer in group
                for v in layer.values()
            )
        )
    )


def loss_and_grads(state, x, xprime, cfg, states):
    """
    Forward both views, update the tracking states, evaluate the loss and
    backpropagate to the trainable parameters.

    Returns
    --------
    :class:`tuple`
        :class:`~mmissl.loss.LossBreakdown`, gradients keyed by parameter group
        and the updated :class:`~mmissl.loss.LossStates`.
    """
    out, cache = forward(state.online, state.spec, x)
    if cfg.momentum_encoder:
        if not state.has_target:
            raise NoTarget("Momentum training requires a target network.")
        z_rows, pred_cache = forward(state.predictor, state.predictor_spec, out)
        zp_rows = predict(state.target, state.spec, xprime)
    else:
        z_rows = out
        zp_rows, cache_p = forward(state.online, state.spec, xprime)

    z = normalize_batch(EmbeddingBatch.from_rows(z_rows), cfg.norm_eps)
    zp = normalize_batch(EmbeddingBatch.from_rows(zp_rows), cfg.norm_eps)
    states = update_loss_states(states, z, zp, cfg.rescale)
    breakdown = mmi_loss(z, zp, states, cfg.rescale, cfg.variant)

    dz = normalize_backward(z, breakdown.grad_z).T
    if cfg.momentum_encoder:
        g_pred, d_out = backward(state.predictor, state.predictor_spec, pred_cache, dz)
        g_online, _ = backward(state.online, state.spec, cache, d_out)
        grads = dict(online=g_online, predictor=g_pred)
    else:
        dzp = normalize_backward(zp, breakdown.grad_zprime).T
        g1, _ = backward(state.online, state.spec, cache, dz)
        g2, _ = backward(state.online, state.spec, cache_p, dzp)
        grads = dict(online=_add(g1, g2))
    return breakdown, grads, states


def momentum_update(state, tau):
    """
    Move the target towards the online encoder,
    :math:`\\theta_t \\leftarrow \\tau\\theta_t + (1-\\tau)\\theta_o`.

    Returns
    --------
    :class:`EncoderState`
    """
    if not state.has_target:
        raise NoTarget("Encoder state has no target network.")
    new = state.copy()
    new.target = [
        {k: tau * lt[k] + (1.0 - tau) * lo[k] for k in lt}
        for lt, lo in zip(state.target, state.online)
    ]
    return new


def _check_finite(state):
    groups = (
        ("online", state.online),
        ("target", state.target),
        ("predictor", state.predictor),
    )
    for name, group in groups:
        for ix, layer in enumerate(group or []):
            for key, v in layer.items():
                if not np.all(np.isfinite(v)):
                    raise NonFinite(
                        "Non-finite {} parameters in layer {} ({}) at step {}.".format(
                            name, ix, key, state.step
                        )
                    )


def train_step(state, batch_pair, cfg, states):
    """
    One training batch: evaluate and accumulate gradients, and every
    `cfg.grad_accum_steps` calls apply the averaged gradient with SGD at the
    scheduled learning rate (then update the target network, if any).

    Parameters
    -----------
    state : :class:`EncoderState`
    batch_pair : :class:`tuple` of :class:`numpy.ndarray`
        The two views, each of shape `(m, input_dim)`.
    cfg : :class:`TrainConfig`
    states : :class:`~mmissl.loss.LossStates`

    Returns
    --------
    :class:`tuple`
        New :class:`EncoderState`, :class:`~mmissl.loss.LossBreakdown`, the
        learning rate of the current optimizer step and the updated
        :class:`~mmissl.loss.LossStates`.
    """
    x, xprime = batch_pair
    breakdown, grads, states = loss_and_grads(state, x, xprime, cfg, states)
    new = state.copy()
    if new.accum is None:
        new.accum = grads
    else:
        new.accum = {k: _add(new.accum[k], grads[k]) for k in grads}
    new.accum_count += 1

    lr = cosine_lr(new.step, cfg)
    if new.accum_count < cfg.grad_accum_steps:
        return new, breakdown, lr, states

    n = float(new.accum_count)
    mean = {
        k: [{key: v / n for key, v in layer.items()} for layer in group]
        for k, group in new.accum.items()
    }
    opt = SGD(momentum=cfg.optimizer_momentum, weight_decay=cfg.weight_decay)
    for group, grad in mean.items():
        params, velocity = opt.step(
            getattr(new, group), grad, new.velocity[group], lr
        )
        setattr(new, group, params)
        new.velocity[group] = velocity
    new.last_grad_norm = _grad_norm(mean)
    new.accum, new.accum_count = None, 0
    new.step += 1
    if cfg.momentum_encoder:
        new = momentum_update(new, cfg.tau)
    _check_finite(new)
    return new, breakdown, lr, states


def batches_per_epoch(n_samples, cfg):
    return n_samples // cfg.batch_size


def fit(state, samples, augment, cfg, rng, states=None, on_step=None):
    """
    Train for `cfg.epochs` passes over `samples`, drawing two augmented views
    of every batch.

    Parameters
    -----------
    state : :class:`EncoderState`
    samples : :class:`numpy.ndarray`
        Dataset rows.
    augment : :class:`~mmissl.synthdata.AugmentSpec`
        Augmentation distribution shared by both views.
    cfg : :class:`TrainConfig`
    rng : :class:`numpy.random.Generator`
        Stream for shuffling and augmentation.
    states : :class:`~mmissl.loss.LossStates`, :code:`None`
        Tracking states; fresh states are used when omitted.
    on_step : :class:`callable`, :code:`None`
        Called as `on_step(epoch, state, breakdown, lr, states)` after each
        optimizer update.

    Returns
    --------
    :class:`tuple`
        Final :class:`EncoderState` and :class:`~mmissl.loss.LossStates`.
    """
    samples = np.asarray(samples, dtype=float)
    states = states if states is not None else LossStates.empty()
    n_batches = batches_per_epoch(samples.shape[0], cfg)
    if n_batches < 1:
        raise ConfigError(
            "Dataset of {} samples holds no batch of {}.".format(
                samples.shape[0], cfg.batch_size
            )
        )
    for epoch in tqdm(range(cfg.epochs), file=ToLogger(logger), mininterval=2):
        order = rng.permutation(samples.shape[0])
        for b in range(n_batches):
            idx = order[b * cfg.batch_size : (b + 1) * cfg.batch_size]
            pair = augment_batch(samples[idx], augment, rng)
            before = state.step
            state, breakdown, lr, states = train_step(state, pair, cfg, states)
            if state.step != before and on_step is not None:
                on_step(epoch, state, breakdown, lr, states)
        logger.debug("Epoch {} finished at step {}.".format(epoch, state.step))
    return state, states
