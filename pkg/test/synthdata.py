import unittest
import numpy as np
from scipy.stats import ks_2samp
from pyrolite.util.general import temp_path, remove_tempdir
from mmissl.synthdata import (
    DatasetSpec,
    AugmentSpec,
    make_dataset,
    augment_pair,
    augment_batch,
    write_dataset_csv,
    load_dataset_csv,
)
from mmissl.errors import ConfigError, DimMismatch


class TestDatasetSpec(unittest.TestCase):
    def test_invalid(self):
        for kwargs in [dict(num_classes=1), dict(dim=1), dict(per_class=0), dict(noise=-1)]:
            with self.subTest(**kwargs):
                with self.assertRaises(ConfigError):
                    DatasetSpec(**kwargs)

    def test_augment_invalid(self):
        for kwargs in [dict(dropout=1.5), dict(scale_jitter=-0.1), dict(max_angle=-1)]:
            with self.subTest(**kwargs):
                with self.assertRaises(ConfigError):
                    AugmentSpec(**kwargs)


class TestMakeDataset(unittest.TestCase):
    def setUp(self):
        self.spec = DatasetSpec(num_classes=3, per_class=20, dim=5, seed=4)

    def test_shapes(self):
        samples, labels = make_dataset(self.spec)
        self.assertEqual(samples.shape, (60, 5))
        self.assertEqual(np.bincount(labels).tolist(), [20, 20, 20])

    def test_seeded(self):
        a, _ = make_dataset(self.spec)
        b, _ = make_dataset(DatasetSpec(**self.spec.to_dict()))
        self.assertTrue(np.array_equal(a, b))

    def test_noiseless(self):
        samples, labels = make_dataset(DatasetSpec(num_classes=2, per_class=5, noise=0.0))
        for c in [0, 1]:
            rows = samples[labels == c]
            self.assertTrue(np.allclose(rows, rows[0]))
            self.assertLessEqual(np.linalg.norm(rows[0]), 5.0)


class TestAugment(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(1)
        self.x = self.rng.standard_normal((50, 6))

    def test_identity(self):
        spec = AugmentSpec(noise_sigma=0, max_angle=0, dropout=0, scale_jitter=0)
        a, b = augment_batch(self.x, spec, self.rng)
        self.assertTrue(np.array_equal(a, self.x) and np.array_equal(b, self.x))

    def test_rotation_preserves_norm(self):
        spec = AugmentSpec(noise_sigma=0, max_angle=1.0, dropout=0, scale_jitter=0)
        a, _ = augment_batch(self.x, spec, self.rng)
        self.assertTrue(
            np.allclose(np.linalg.norm(a, axis=1), np.linalg.norm(self.x, axis=1))
        )
        self.assertFalse(np.allclose(a, self.x))

    def test_scale_jitter(self):
        spec = AugmentSpec(noise_sigma=0, max_angle=0, dropout=0, scale_jitter=0.2)
        a, _ = augment_batch(self.x, spec, self.rng)
        ratio = np.linalg.norm(a, axis=1) / np.linalg.norm(self.x, axis=1)
        self.assertTrue(np.all((ratio >= 0.8) & (ratio <= 1.2)))

    def test_full_dropout(self):
        spec = AugmentSpec(noise_sigma=0, dropout=1.0)
        a, b = augment_batch(self.x, spec, self.rng)
        self.assertFalse(np.any(a) or np.any(b))

    def test_views_differ(self):
        a, b = augment_batch(self.x, AugmentSpec(), self.rng)
        self.assertFalse(np.allclose(a, b))

    def test_pair(self):
        a, b = augment_pair(self.x[0], AugmentSpec(), self.rng)
        self.assertEqual((a.shape, b.shape), ((6,), (6,)))

    def test_not_rows(self):
        with self.assertRaises(DimMismatch):
            augment_batch(self.x[0], AugmentSpec(), self.rng)

    def pairs(self, count=2000):
        views = [augment_pair(self.x[0], AugmentSpec(), self.rng) for _ in range(count)]
        return np.array([a for a, _ in views]), np.array([b for _, b in views])

    def test_views_same_distribution(self):
        a, b = self.pairs()
        for j in range(3):
            with self.subTest(feature=j):
                self.assertGreater(ks_2samp(a[:, j], b[:, j]).pvalue, 1e-3)
        norms = ks_2samp(np.linalg.norm(a, axis=1), np.linalg.norm(b, axis=1))
        self.assertGreater(norms.pvalue, 1e-3)

    def test_views_exchangeable(self):
        a, b = self.pairs()
        diff = a - b
        for j in range(3):
            with self.subTest(feature=j):
                half = diff.shape[0] // 2
                result = ks_2samp(diff[:half, j], -diff[half:, j])
                self.assertGreater(result.pvalue, 1e-3)


class TestDatasetCSV(unittest.TestCase):
    def setUp(self):
        self.dir = temp_path() / "test_synthdata"
        self.dir.mkdir(parents=True, exist_ok=True)

    def test_round_trip(self):
        samples, labels = make_dataset(DatasetSpec(per_class=3, dim=3))
        path = write_dataset_csv(self.dir / "data.csv", samples, labels)
        loaded, loaded_labels, ids = load_dataset_csv(path)
        self.assertTrue(np.allclose(loaded, samples))
        self.assertTrue(np.array_equal(loaded_labels, labels))
        self.assertEqual(ids.tolist(), list(range(12)))

    def test_bad_columns(self):
        path = self.dir / "bad.csv"
        path.write_text("sample_id,x,label\n0,1.0,0\n")
        with self.assertRaises(ConfigError):
            load_dataset_csv(path)

    def tearDown(self):
        remove_tempdir(self.dir)


if __name__ == "__main__":
    unittest.main()
