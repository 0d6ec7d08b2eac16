"""
Plots of training metrics.
"""
import logging
from .templates import plot_loss_curves, plot_tracked_extremes, save_svg

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)
