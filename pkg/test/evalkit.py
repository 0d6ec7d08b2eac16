import unittest
import numpy as np
from mmissl.embedstats import EmbeddingBatch
from mmissl.synthdata import DatasetSpec, make_dataset
from mmissl.matrixcore import random_orthogonal
from mmissl.siamese import MlpSpec, EncoderState, encode
from mmissl.evalkit import (
    split_indices,
    linear_probe,
    knn_accuracy,
    collapse_metrics,
)
from mmissl.errors import BatchTooSmall, ConfigError, DegenerateSplit, EmptyTrainSet


class TestSplit(unittest.TestCase):
    def test_partition(self):
        train, test = split_indices(10, 0.7, seed=3)
        self.assertEqual((train.size, test.size), (7, 3))
        self.assertEqual(sorted(np.concatenate([train, test]).tolist()), list(range(10)))

    def test_seeded(self):
        a, _ = split_indices(50, 0.5, seed=1)
        b, _ = split_indices(50, 0.5, seed=1)
        self.assertTrue(np.array_equal(a, b))


class TestLinearProbe(unittest.TestCase):
    def test_separable(self):
        samples, labels = make_dataset(
            DatasetSpec(num_classes=3, per_class=60, dim=4, spread=20.0, noise=0.5)
        )
        report = linear_probe(samples, labels, seed=2)
        self.assertGreaterEqual(report.top1, 0.95)
        self.assertEqual(report.n_train + report.n_test, 180)
        self.assertEqual(set(report.to_dict()), {"top1", "per_class", "seed", "n_train", "n_test"})

    def test_batch_input(self):
        samples, labels = make_dataset(DatasetSpec(per_class=30, dim=3, spread=20.0))
        a = linear_probe(samples, labels, seed=0)
        b = linear_probe(EmbeddingBatch.from_rows(samples), labels, seed=0)
        self.assertEqual(a.top1, b.top1)

    def test_shuffled_labels_at_chance(self):
        samples, labels = make_dataset(
            DatasetSpec(num_classes=4, per_class=500, dim=8, spread=20.0, noise=0.5)
        )
        shuffled = np.random.default_rng(4).permutation(labels)
        report = linear_probe(samples, shuffled, seed=1)
        stderr = np.sqrt(0.25 * 0.75 / report.n_test)
        self.assertLessEqual(abs(report.top1 - 0.25), 3 * stderr)

    def test_collapsed_embeddings_at_chance(self):
        labels = np.repeat(np.arange(4), 500)
        report = linear_probe(np.ones((2000, 8)), labels, seed=1)
        stderr = np.sqrt(0.25 * 0.75 / report.n_test)
        self.assertLessEqual(abs(report.top1 - 0.25), 3 * stderr)

    def test_encoder_untouched(self):
        samples, labels = make_dataset(DatasetSpec(per_class=30, dim=4))
        state = EncoderState.create(MlpSpec((4, 8, 4)), np.random.default_rng(2))
        before = state.parameters().copy()
        linear_probe(encode(state, samples), labels, seed=0)
        self.assertTrue(np.array_equal(state.parameters(), before))

    def test_label_count(self):
        with self.assertRaises(DegenerateSplit):
            linear_probe(np.zeros((10, 2)), np.zeros(9))

    def test_single_class(self):
        with self.assertRaises(DegenerateSplit):
            linear_probe(np.random.default_rng(0).standard_normal((20, 2)), np.zeros(20))


class TestKnn(unittest.TestCase):
    def test_perfect(self):
        train = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [5.1, 5.0]])
        labels = np.array([0, 0, 1, 1])
        test = np.array([[0.05, 0.0], [5.05, 5.0]])
        self.assertEqual(knn_accuracy(train, labels, test, [0, 1], k=2), 1.0)

    def test_tie_goes_to_nearest(self):
        train = np.array([[0.0], [1.0]])
        labels = np.array([0, 1])
        self.assertEqual(knn_accuracy(train, labels, [[0.4]], [0], k=2), 1.0)
        self.assertEqual(knn_accuracy(train, labels, [[0.6]], [1], k=2), 1.0)

    def test_k_range(self):
        with self.assertRaises(ConfigError):
            knn_accuracy(np.zeros((3, 2)), [0, 1, 0], np.zeros((1, 2)), [0], k=4)

    def test_empty_train(self):
        with self.assertRaises(EmptyTrainSet):
            knn_accuracy(np.zeros((0, 2)), [], np.zeros((1, 2)), [0], k=1)


class TestCollapse(unittest.TestCase):
    def test_isotropic(self):
        data = np.random.default_rng(0).standard_normal((4, 5000))
        report = collapse_metrics(EmbeddingBatch(data))
        self.assertGreater(report.effective_rank, 3.9)
        self.assertFalse(report.collapsed)

    def test_constant(self):
        report = collapse_metrics(EmbeddingBatch(np.ones((4, 10))))
        self.assertEqual(report.effective_rank, 1.0)
        self.assertTrue(report.collapsed)

    def test_rank_one(self):
        v = np.random.default_rng(1).standard_normal((1, 200))
        report = collapse_metrics(EmbeddingBatch(np.vstack([v, 2 * v, -v])))
        self.assertAlmostEqual(report.effective_rank, 1.0, places=6)
        self.assertTrue(report.collapsed)

    def test_rotation_invariant(self):
        rng = np.random.default_rng(3)
        data = np.diag([3.0, 2.0, 1.0, 0.5, 0.1]) @ rng.standard_normal((5, 400))
        rotated = random_orthogonal(5, rng) @ data
        a = collapse_metrics(EmbeddingBatch(data)).effective_rank
        b = collapse_metrics(EmbeddingBatch(rotated)).effective_rank
        self.assertLessEqual(abs(a - b) / a, 1e-8)

    def test_too_small(self):
        with self.assertRaises(BatchTooSmall):
            collapse_metrics(EmbeddingBatch(np.ones((3, 1))))


if __name__ == "__main__":
    unittest.main()
