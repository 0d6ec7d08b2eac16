"""
Toy-scale Siamese trainer: MLP encoders, SGD with a cosine schedule, gradient
accumulation and the momentum-encoder variant.
"""
import logging
from .network import MlpSpec, init_params, forward, backward, predict
from .optim import SGD, cosine_lr
from .train import (
    TrainConfig,
    EncoderState,
    encode,
    loss_and_grads,
    train_step,
    momentum_update,
    fit,
)
from .checkpoint import save_checkpoint, load_checkpoint

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)
