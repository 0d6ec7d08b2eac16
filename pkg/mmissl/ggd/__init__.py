"""
Generalised Gaussian distributions and mutual information between the two
blocks of a joint embedding, with a nonparametric estimator for validation.
"""
import logging
from .distribution import (
    GgdSpec,
    JointGgdSpec,
    ggd_sample,
    ggd_logpdf,
    ggd_entropy,
    log_normaliser,
    radial_moment,
    covariance_scale,
    dispersion_to_covariance,
    covariance_to_dispersion,
    quadratic_form,
    mi_closed_form,
    random_joint_dispersion,
)
from .estimate import mi_knn_estimate, mi_invariance_check, check_monotone

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)
