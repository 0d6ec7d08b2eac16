"""
Per-step training metrics: one row per optimizer update, written as a
comma-separated table with a fixed header.
"""
import time
import logging
from collections import namedtuple
from pathlib import Path
import numpy as np
import pandas as pd
from ..errors import ConfigError

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)

METRICS_COLUMNS = [
    "step",
    "epoch",
    "lr",
    "loss_total",
    "loss_align",
    "loss_z",
    "loss_zp",
    "lmin_align",
    "lmax_align",
    "lmin_z",
    "lmax_z",
    "lmin_zp",
    "lmax_zp",
    "grad_norm",
    "ms",
]

MetricsRow = namedtuple("MetricsRow", METRICS_COLUMNS)


def metrics_row(epoch, state, breakdown, lr, states, ms=0.0):
    """
    Row for the optimizer update which brought `state` to `state.step`.

    Parameters
    -----------
    epoch : :class:`int`
        Epoch of the update.
    state : :class:`~mmissl.siamese.train.EncoderState`
        State after the update.
    breakdown : :class:`~mmissl.loss.LossBreakdown`
        Loss of the last batch of the update.
    lr : :class:`float`
        Learning rate applied.
    states : :class:`~mmissl.loss.LossStates`
        Tracking states after the batch.
    ms : :class:`float`
        Wall-clock milliseconds spent on the update.

    Returns
    --------
    :class:`MetricsRow`
    """
    return MetricsRow(
        step=int(state.step),
        epoch=int(epoch),
        lr=float(lr),
        loss_total=float(breakdown.total),
        loss_align=float(breakdown.term_align),
        loss_z=float(breakdown.term_z),
        loss_zp=float(breakdown.term_zprime),
        lmin_align=float(states.align.lambda_min),
        lmax_align=float(states.align.lambda_max),
        lmin_z=float(states.z.lambda_min),
        lmax_z=float(states.z.lambda_max),
        lmin_zp=float(states.zprime.lambda_min),
        lmax_zp=float(states.zprime.lambda_max),
        grad_norm=float(state.last_grad_norm),
        ms=float(ms),
    )


class MetricsRecorder(object):
    """
    Callback for :func:`~mmissl.siamese.train.fit` collecting a
    :class:`MetricsRow` per optimizer update.

    Parameters
    -----------
    timing : :class:`bool`
        Record wall-clock milliseconds between updates; otherwise `ms` is 0.
    """

    def __init__(self, timing=False):
        self.timing = timing
        self.rows = []
        self._last = time.perf_counter()

    def __call__(self, epoch, state, breakdown, lr, states):
        ms = 0.0
        if self.timing:
            now = time.perf_counter()
            ms, self._last = 1000.0 * (now - self._last), now
        row = metrics_row(epoch, state, breakdown, lr, states, ms=ms)
        if self.rows and row.step <= self.rows[-1].step:
            raise ConfigError(
                "Metrics steps must increase; got {} after {}.".format(
                    row.step, self.rows[-1].step
                )
            )
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    def to_frame(self):
        return to_frame(self.rows)


def to_frame(rows):
    """
    Metrics rows as a :class:`pandas.DataFrame` with the fixed column order.
    """
    return pd.DataFrame([tuple(r) for r in rows], columns=METRICS_COLUMNS)


def write_metrics(path, rows):
    """
    Write metrics rows as comma-separated text with a `.` decimal mark.

    Parameters
    -----------
    path : :class:`str` | :class:`pathlib.Path`
    rows : :class:`list` of :class:`MetricsRow` | :class:`pandas.DataFrame`

    Returns
    --------
    :class:`pathlib.Path`
    """
    df = rows if isinstance(rows, pd.DataFrame) else to_frame(rows)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(str(path), index=False, sep=",", decimal=".", encoding="utf-8")
    logger.debug("Wrote {} metrics rows to {}.".format(len(df), path))
    return path


def read_metrics(path):
    """
    Read a metrics table, checking its header.

    Returns
    --------
    :class:`pandas.DataFrame`
    """
    df = pd.read_csv(str(path), sep=",", decimal=".", encoding="utf-8")
    if list(df.columns) != METRICS_COLUMNS:
        raise ConfigError(
            "{} is not a metrics table; header {}.".format(path, list(df.columns))
        )
    if len(df) and not np.all(np.diff(df["step"].values) > 0):
        logger.warning("Metrics steps in {} are not increasing.".format(path))
    return df
