import unittest
import numpy as np
import pandas as pd
import matplotlib.pyplot as plt
from pyrolite.util.general import temp_path, remove_tempdir
from mmissl.tables import METRICS_COLUMNS
from mmissl.vis.templates import (
    plot_loss_curves,
    plot_tracked_extremes,
    save_svg,
    LOSS_COLUMNS,
    EXTREME_COLUMNS,
)


def metrics_frame(n=20):
    rng = np.random.default_rng(0)
    df = pd.DataFrame(rng.uniform(0.5, 1.5, (n, len(METRICS_COLUMNS))), columns=METRICS_COLUMNS)
    df["step"] = np.arange(1, n + 1)
    df["epoch"] = np.arange(n) // 5
    return df


class TestPlotTemplates(unittest.TestCase):
    def setUp(self):
        self.metrics = metrics_frame()

    def test_default_loss_curves(self):
        ax = plot_loss_curves(self.metrics)
        self.assertEqual(len(ax.lines), len(LOSS_COLUMNS))
        self.assertEqual(ax.get_xlabel(), "step")

    def test_loss_columns(self):
        ax = plot_loss_curves(self.metrics, xvar="epoch", columns=["loss_total"], legend=False)
        self.assertEqual(len(ax.lines), 1)
        self.assertIsNone(ax.get_legend())

    def test_existing_axes(self):
        fig, ax = plt.subplots(1)
        self.assertIs(plot_tracked_extremes(self.metrics, ax=ax), ax)

    def test_default_extremes(self):
        ax = plot_tracked_extremes(self.metrics)
        self.assertEqual(len(ax.lines), len(EXTREME_COLUMNS))
        self.assertEqual(ax.lines[0].get_linestyle(), "--")

    def tearDown(self):
        plt.close("all")


class TestSaveSVG(unittest.TestCase):
    def setUp(self):
        self.dir = temp_path() / "test_vis"
        self.dir.mkdir(parents=True, exist_ok=True)

    def test_save(self):
        path = save_svg(plot_loss_curves(metrics_frame()), self.dir / "curves.png")
        self.assertEqual(path.suffix, ".svg")
        self.assertTrue(path.exists())
        self.assertIn("<svg", path.read_text())

    def tearDown(self):
        remove_tempdir(self.dir)


if __name__ == "__main__":
    unittest.main()
