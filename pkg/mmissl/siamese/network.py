"""
Multilayer perceptron encoders with hand-written backpropagation.

Samples are rows. Each hidden layer is Linear -> batch standardisation (no
affine parameters) -> ReLU; the final layer is linear. Parameters are stored as
a list of `{"weight": (in, out), "bias": (out,)}` dictionaries in layer order.
"""
import logging
import numpy as np
from ..errors import ConfigError, ShapeMismatch

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)

BN_EPS = 1e-5
ACTIVATIONS = ("relu",)


class MlpSpec(object):
    """
    Layer widths and options of an MLP.

    Parameters
    -----------
    widths : :class:`list` of :class:`int`
        Input width, hidden widths and output width; at least one hidden layer.
    batchnorm : :class:`bool`
        Standardise hidden pre-activations over the batch.
    activation : :class:`str`
        Hidden activation. Only :code:`"relu"` is available.
    """

    def __init__(self, widths=(16, 64, 64, 32), batchnorm=True, activation="relu"):
        self.widths = tuple(int(w) for w in widths)
        self.batchnorm = bool(batchnorm)
        self.activation = activation
        if len(self.widths) < 3:
            raise ConfigError(
                "An MLP needs input, >= 1 hidden and output widths; got {}.".format(
                    self.widths
                )
            )
        if min(self.widths) < 1:
            raise ConfigError("Layer widths must be >= 1; got {}.".format(self.widths))
        if activation not in ACTIVATIONS:
            raise ConfigError("Unknown activation '{}'.".format(activation))

    @property
    def input_dim(self):
        return self.widths[0]

    @property
    def output_dim(self):
        return self.widths[-1]

    @property
    def layer_shapes(self):
        return list(zip(self.widths[:-1], self.widths[1:]))

    def to_dict(self):
        return dict(
            widths=list(self.widths),
            batchnorm=self.batchnorm,
            activation=self.activation,
        )

    def __eq__(self, other):
        return isinstance(other, MlpSpec) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return "{}(widths={}, batchnorm={})".format(
            self.__class__.__name__, self.widths, self.batchnorm
        )


def init_params(spec, rng):
    """
    He-initialised weights and zero biases.

    Parameters
    -----------
    spec : :class:`MlpSpec`
    rng : :class:`numpy.random.Generator`

    Returns
    --------
    :class:`list` of :class:`dict`
    """
    return [
        dict(
            weight=rng.standard_normal((n_in, n_out)) * np.sqrt(2.0 / n_in),
            bias=np.zeros(n_out),
        )
        for n_in, n_out in spec.layer_shapes
    ]


def zeros_like_params(params):
    return [{k: np.zeros_like(v) for k, v in layer.items()} for layer in params]


def copy_params(params):
    return [{k: v.copy() for k, v in layer.items()} for layer in params]


def _standardise(h):
    mean = h.mean(axis=0)
    centred = h - mean
    scale = np.sqrt(np.mean(centred * centred, axis=0) + BN_EPS)
    return centred / scale, scale


def _standardise_backward(y, scale, grad):
    return (grad - grad.mean(axis=0) - y * np.mean(grad * y, axis=0)) / scale


def forward(params, spec, x):
    """
    Forward pass.

    Parameters
    -----------
    params : :class:`list` of :class:`dict`
        Layer parameters.
    spec : :class:`MlpSpec`
        Network layout.
    x : :class:`numpy.ndarray`
        Input rows, shape `(m, spec.input_dim)`.

    Returns
    --------
    :class:`tuple`
        Output rows and the cache needed by :func:`backward`.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise ShapeMismatch(
            "Expected input of width {}, got shape {}.".format(spec.input_dim, x.shape)
        )
    cache = []
    h = x
    last = len(params) - 1
    for ix, layer in enumerate(params):
        entry = dict(input=h)
        h = h @ layer["weight"] + layer["bias"]
        if ix < last:
            if spec.batchnorm:
                h, scale = _standardise(h)
                entry.update(normed=h, scale=scale)
            entry["active"] = h > 0
            h = np.where(entry["active"], h, 0.0)
        cache.append(entry)
    return h, cache


def backward(params, spec, cache, grad_out):
    """
    Backward pass through a cached forward pass.

    Parameters
    -----------
    grad_out : :class:`numpy.ndarray`
        Gradient with respect to the output rows.

    Returns
    --------
    :class:`tuple`
        Parameter gradients (same layout as `params`) and the gradient with
        respect to the input rows.
    """
    grads = [None] * len(params)
    g = np.asarray(grad_out, dtype=float)
    last = len(params) - 1
    for ix in range(last, -1, -1):
        entry, layer = cache[ix], params[ix]
        if ix < last:
            g = np.where(entry["active"], g, 0.0)
            if spec.batchnorm:
                g = _standardise_backward(entry["normed"], entry["scale"], g)
        grads[ix] = dict(weight=entry["input"].T @ g, bias=g.sum(axis=0))
        g = g @ layer["weight"].T
    return grads, g


def predict(params, spec, x):
    """Output rows without keeping a cache."""
    out, _ = forward(params, spec, x)
    return out
