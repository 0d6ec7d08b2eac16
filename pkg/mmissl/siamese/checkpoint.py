"""
Binary encoder checkpoints with a JSON sidecar holding the training settings.

Layout (all integers little-endian)::

    magic       8 bytes   b"MMISSLCK"
    version     uint32
    flags       uint32    bit 0 batchnorm, bit 1 target, bit 2 predictor
    n_widths    uint32    encoder widths that follow
    n_pwidths   uint32    predictor widths that follow (0 without predictor)
    step        uint64
    widths      n_widths x uint32, then n_pwidths x uint32
    parameters  float64 (<f8): online, target, predictor, then the momentum
                slots of online and predictor; each network in layer order,
                weight (row-major, in x out) then bias.

Gradient accumulators are not stored; checkpoints are written at optimizer
step boundaries.
"""
import json
import logging
import struct
from pathlib import Path
import numpy as np
from ..errors import CheckpointError
from .network import MlpSpec
from .train import EncoderState, TrainConfig

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)

MAGIC = b"MMISSLCK"
VERSION = 1
HEADER = struct.Struct("<8sIIIIQ")

FLAG_BATCHNORM = 1
FLAG_TARGET = 2
FLAG_PREDICTOR = 4


def sidecar_path(path):
    return Path(path).with_suffix(".json")


def _layout(spec):
    return [(n_in * n_out, (n_in, n_out), n_out) for n_in, n_out in spec.layer_shapes]


def _size(spec):
    return sum(n_w + n_b for n_w, _, n_b in _layout(spec))


def _flatten(params):
    parts = []
    for layer in params:
        parts += [layer["weight"].ravel(), layer["bias"].ravel()]
    return parts


def _unflatten(flat, offset, spec):
    params = []
    for n_w, shape, n_b in _layout(spec):
        weight = flat[offset : offset + n_w].reshape(shape).copy()
        offset += n_w
        bias = flat[offset : offset + n_b].copy()
        offset += n_b
        params.append(dict(weight=weight, bias=bias))
    return params, offset


def save_checkpoint(path, state, cfg=None):
    """
    Write an encoder state (and optionally its :class:`TrainConfig`).

    Parameters
    -----------
    path : :class:`str` | :class:`pathlib.Path`
        Checkpoint file; the sidecar is written next to it with a `.json` suffix.
    state : :class:`~mmissl.siamese.train.EncoderState`
    cfg : :class:`~mmissl.siamese.train.TrainConfig`, :code:`None`

    Returns
    --------
    :class:`pathlib.Path`
    """
    path = Path(path)
    flags = FLAG_BATCHNORM if state.spec.batchnorm else 0
    if state.has_target:
        flags |= FLAG_TARGET
    pwidths = ()
    if state.predictor is not None:
        flags |= FLAG_PREDICTOR
        pwidths = state.predictor_spec.widths
    widths = state.spec.widths

    parts = _flatten(state.online)
    if state.has_target:
        parts += _flatten(state.target)
    if state.predictor is not None:
        parts += _flatten(state.predictor)
    parts += _flatten(state.velocity["online"])
    if state.predictor is not None:
        parts += _flatten(state.velocity["predictor"])
    flat = np.concatenate(parts).astype("<f8")

    with open(str(path), "wb") as f:
        f.write(HEADER.pack(MAGIC, VERSION, flags, len(widths), len(pwidths), state.step))
        f.write(struct.pack("<{}I".format(len(widths) + len(pwidths)), *(widths + pwidths)))
        f.write(flat.tobytes())

    sidecar = dict(
        network=state.spec.to_dict(),
        predictor=state.predictor_spec.to_dict() if state.predictor_spec else None,
        train=cfg.to_dict() if cfg is not None else None,
        step=state.step,
    )
    with open(str(sidecar_path(path)), "w") as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)
    logger.debug("Checkpoint written to {} ({} values).".format(path, flat.size))
    return path


def load_checkpoint(path):
    """
    Read a checkpoint written by :func:`save_checkpoint`.

    Returns
    --------
    :class:`tuple`
        :class:`~mmissl.siamese.train.EncoderState` and the
        :class:`~mmissl.siamese.train.TrainConfig` from the sidecar
        (:code:`None` when absent).
    """
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < HEADER.size:
        raise CheckpointError("Truncated checkpoint header in {}.".format(path))
    magic, version, flags, n_w, n_p, step = HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise CheckpointError("{} is not an mmissl checkpoint.".format(path))
    if version != VERSION:
        raise CheckpointError("Unsupported checkpoint version {}.".format(version))
    offset = HEADER.size
    if len(raw) < offset + 4 * (n_w + n_p):
        raise CheckpointError("Truncated layer widths in {}.".format(path))
    widths = struct.unpack_from("<{}I".format(n_w + n_p), raw, offset)
    offset += 4 * (n_w + n_p)
    batchnorm = bool(flags & FLAG_BATCHNORM)
    spec = MlpSpec(widths[:n_w], batchnorm=batchnorm)
    pspec = MlpSpec(widths[n_w:], batchnorm=batchnorm) if flags & FLAG_PREDICTOR else None

    expected = _size(spec) * (3 if flags & FLAG_TARGET else 2)
    if pspec is not None:
        expected += 2 * _size(pspec)
    if len(raw) - offset != 8 * expected:
        raise CheckpointError(
            "Checkpoint {} holds {} parameter bytes, layout expects {}.".format(
                path, len(raw) - offset, 8 * expected
            )
        )
    flat = np.frombuffer(raw, dtype="<f8", offset=offset).astype(float)
    pos = 0
    online, pos = _unflatten(flat, pos, spec)
    target = predictor = None
    if flags & FLAG_TARGET:
        target, pos = _unflatten(flat, pos, spec)
    if pspec is not None:
        predictor, pos = _unflatten(flat, pos, pspec)
    velocity = dict()
    velocity["online"], pos = _unflatten(flat, pos, spec)
    if pspec is not None:
        velocity["predictor"], pos = _unflatten(flat, pos, pspec)
    cfg = None
    sidecar = sidecar_path(path)
    if sidecar.exists():
        with open(str(sidecar)) as f:
            meta = json.load(f)
        if meta.get("train") is not None:
            cfg = TrainConfig.from_dict(meta["train"])
    state = EncoderState(
        spec,
        online,
        target=target,
        predictor=predictor,
        predictor_spec=pspec,
        velocity=velocity,
        step=step,
    )
    return state, cfg
