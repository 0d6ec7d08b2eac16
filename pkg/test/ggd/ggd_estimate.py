import unittest
import numpy as np
from mmissl.matrixcore import SymMatrix
from mmissl.ggd import (
    JointGgdSpec,
    ggd_sample,
    mi_closed_form,
    mi_knn_estimate,
    mi_invariance_check,
    check_monotone,
    random_joint_dispersion,
)
from mmissl.errors import ConfigError, DimMismatch, NonMonotoneMap, TooFewSamples


def gaussian_pair(r, n, rng):
    spec = JointGgdSpec(1, SymMatrix(np.array([[1.0, r], [r, 1.0]])))
    return spec, spec.split(ggd_sample(spec, n, rng))


class TestKnnEstimate(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(42)

    def test_scalar_example(self):
        spec, (z, zp) = gaussian_pair(0.8, 20000, self.rng)
        self.assertLessEqual(abs(mi_knn_estimate(z, zp) - mi_closed_form(spec)), 0.02)

    def test_independent(self):
        z = self.rng.standard_normal((20000, 1))
        zp = self.rng.standard_normal((20000, 1))
        self.assertLessEqual(abs(mi_knn_estimate(z, zp)), 0.02)

    def test_gaussian_joint(self):
        for d in [1, 2]:
            with self.subTest(d=d):
                spec = JointGgdSpec(d, random_joint_dispersion(d, self.rng))
                z, zp = spec.split(ggd_sample(spec, 20000, self.rng))
                self.assertLessEqual(
                    abs(mi_knn_estimate(z, zp) - mi_closed_form(spec)), 0.05
                )

    def test_non_gaussian_shapes(self):
        spec = JointGgdSpec(1, random_joint_dispersion(1, self.rng))
        closed = mi_closed_form(spec)
        for shape in [0.5, 2.0, 3.0]:
            with self.subTest(shape=shape):
                shaped = spec.with_shape(shape)
                z, zp = shaped.split(ggd_sample(shaped, 30000, self.rng))
                self.assertLessEqual(abs(mi_knn_estimate(z, zp) - closed), 0.08)

    def test_neighbour_count(self):
        z = self.rng.standard_normal((1000, 1))
        for k in [0, 1000]:
            with self.subTest(k=k):
                with self.assertRaises(ConfigError):
                    mi_knn_estimate(z, z, k=k)

    def test_too_few(self):
        z = self.rng.standard_normal((999, 1))
        with self.assertRaises(TooFewSamples):
            mi_knn_estimate(z, z)

    def test_unpaired(self):
        with self.assertRaises(DimMismatch):
            mi_knn_estimate(np.zeros((1000, 1)), np.zeros((1001, 1)))

    def test_one_dimensional_input(self):
        spec, (z, zp) = gaussian_pair(0.5, 2000, self.rng)
        self.assertEqual(mi_knn_estimate(z.ravel(), zp.ravel()), mi_knn_estimate(z, zp))


class TestInvariance(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(43)

    def test_monotone_maps(self):
        _, (z, zp) = gaussian_pair(0.8, 50000, self.rng)
        before, after = mi_invariance_check(z, zp, np.tanh, lambda x: x ** 3 + x)
        self.assertLessEqual(abs(before - after), 0.05)

    def test_decreasing_map(self):
        x = np.linspace(-1, 1, 50).reshape(-1, 1)
        check_monotone(x, -np.exp(x))

    def test_non_monotone(self):
        _, (z, zp) = gaussian_pair(0.8, 2000, self.rng)
        with self.assertRaises(NonMonotoneMap):
            mi_invariance_check(z, zp, np.square, np.tanh)

    def test_non_finite_map(self):
        x = np.linspace(0.0, 1.0, 10).reshape(-1, 1)
        with self.assertRaises(NonMonotoneMap):
            check_monotone(x, np.log(x))


if __name__ == "__main__":
    unittest.main()
