"""
Explicit mutual-information self-supervised learning at toy scale.

Siamese encoders are trained to maximise the mutual information between the
embeddings of two views, written for generalised Gaussian embeddings as a
difference of log-determinants of Gram matrices. The log-determinants are
evaluated on a rescaled spectrum with a truncated trace series, and the
rescaling tracks the extreme eigenvalues with a moving average.

The package also holds the validation tools for that construction: the
generalised Gaussian family with a KSG estimator for the mutual information,
a log-determinant benchmark, finite-difference gradient checks and linear
probe evaluation.
"""
import logging

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)

__version__ = "0.1.0"

from . import errors
from . import matrixcore
from . import ggd
from . import embedstats
from . import loss
from . import siamese
from . import synthdata
from . import evalkit
from .config import ExperimentConfig
