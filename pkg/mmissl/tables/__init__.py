"""
Tabular outputs of training runs and benchmarks.
"""
import logging
from .metrics import (
    METRICS_COLUMNS,
    MetricsRow,
    MetricsRecorder,
    metrics_row,
    to_frame,
    write_metrics,
    read_metrics,
)

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)
