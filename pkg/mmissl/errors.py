"""
Exceptions raised across mmissl.

Configuration problems derive from :class:`ConfigError`, numerical failures from
:class:`NumericalError`; the command line maps these to exit codes 2 and 3.
"""
import logging

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)


class MMIError(Exception):
    """Base class for mmissl errors."""


class ConfigError(MMIError, ValueError):
    """Invalid or unknown configuration values."""


class NumericalError(MMIError, ArithmeticError):
    """A numerical routine could not produce a finite, valid result."""


class NonFinite(NumericalError):
    """Input contains NaN or infinite values."""


class NotPositiveDefinite(NumericalError):
    """A factorisation met a nonpositive pivot."""


class AsymmetricMatrix(MMIError, ValueError):
    """Matrix is further from symmetric than the construction tolerance."""


class DimMismatch(MMIError, ValueError):
    """Operands have incompatible dimensions."""


class ShapeMismatch(DimMismatch):
    """Input width does not match the network specification."""


class InvalidShape(MMIError, ValueError):
    """Generalised Gaussian shape parameter must be positive."""


class TooFewSamples(MMIError, ValueError):
    """Not enough samples for a nonparametric estimate."""


class NonMonotoneMap(MMIError, ValueError):
    """An elementwise map is not strictly monotone on the sample range."""


class BatchTooSmall(MMIError, ValueError):
    """Batch statistics need at least two samples."""


class NotNormalized(MMIError, ValueError):
    """Embedding batch was expected to be standardised."""


class Uninitialized(MMIError, RuntimeError):
    """Eigenvalue tracking state has not been seeded."""


class NonFiniteLoss(NumericalError):
    """
    Loss evaluation produced a non-finite value.

    Parameters
    -----------
    term : :class:`str`
        Name of the offending loss term.
    """

    def __init__(self, term, message=None):
        self.term = term
        message = message or "Non-finite loss in term '{}'.".format(term)
        super().__init__(message)


class NoTarget(MMIError, RuntimeError):
    """Momentum update requested without a target network."""


class DegenerateSplit(MMIError, ValueError):
    """Train/test split lacks the classes or samples a probe needs."""


class EmptyTrainSet(MMIError, ValueError):
    """k-NN evaluation requested with no training points."""


class CheckpointError(MMIError, ValueError):
    """Checkpoint file is malformed or of an unknown version."""
