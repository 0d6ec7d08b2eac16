import unittest
import numpy as np
from mmissl.matrixcore import SymMatrix, random_spd, spectral_extremes
from mmissl.loss import (
    RescaleConfig,
    RescaleState,
    rescale,
    rescale_params,
    update_rescale_state,
)
from mmissl.errors import ConfigError, Uninitialized
from mmissl.loss.rescale import _rescale_with_alpha


class TestRescaleConfig(unittest.TestCase):
    def test_defaults(self):
        cfg = RescaleConfig()
        self.assertEqual(cfg.rescale_beta, 5.0)
        self.assertEqual(cfg.taylor_order, 4)
        self.assertEqual(cfg.track_interval, 100)
        self.assertEqual(cfg.ema_rho, 0.99)

    def test_beta_convergence(self):
        for beta in [1.0, 0.5]:
            with self.subTest(beta=beta):
                with self.assertRaises(ConfigError) as ctx:
                    RescaleConfig(rescale_beta=beta)
                self.assertIn("converge", str(ctx.exception))

    def test_invalid(self):
        for kwargs in [
            dict(taylor_order=0),
            dict(track_interval=0),
            dict(ema_rho=1.0),
            dict(align_block="other"),
        ]:
            with self.subTest(**kwargs):
                with self.assertRaises(ConfigError):
                    RescaleConfig(**kwargs)

    def test_equality(self):
        self.assertEqual(RescaleConfig(), RescaleConfig(**RescaleConfig().to_dict()))


class TestRescale(unittest.TestCase):
    def setUp(self):
        self.cfg = RescaleConfig(rescale_beta=5.0)

    def test_params(self):
        mu, alpha = rescale_params(RescaleState(1.0, 3.0, 1, True), self.cfg)
        self.assertEqual(mu, 2.0)
        self.assertEqual(alpha, 5.0)

    def test_spectrum_contracted(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            m = random_spd(10, rng, low=0.1, high=4.0)
            values = np.linalg.eigvalsh(rescale(m, RescaleState.exact(m), self.cfg).entries)
            self.assertTrue(np.all(np.abs(values - 1.0) <= 1.0 / 5.0 + 1e-12))

    def test_degenerate_spectrum(self):
        m = SymMatrix.identity(4) * 2.0
        mtilde = rescale(m, RescaleState.exact(m), self.cfg)
        self.assertTrue(np.allclose(mtilde.entries, np.eye(4)))

    def test_uncentred(self):
        m = SymMatrix.diag([1.0, 3.0])
        mtilde = rescale(m, RescaleState.exact(m), self.cfg, center=False)
        self.assertTrue(np.allclose(np.diag(mtilde.entries), [1.2, 1.6]))

    def test_lazy_init(self):
        m = SymMatrix.diag([1.0, 3.0])
        self.assertEqual(
            rescale(m, RescaleState.empty(), self.cfg),
            rescale(m, RescaleState.exact(m), self.cfg),
        )

    def test_uninitialized(self):
        with self.assertRaises(Uninitialized):
            _rescale_with_alpha(SymMatrix.identity(2), RescaleState.empty(), self.cfg, lazy_init=False)


class TestTracking(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(3)
        self.mats = [random_spd(6, rng, low=rng.uniform(0.1, 0.5), high=rng.uniform(1, 3)) for _ in range(250)]

    def test_refresh_schedule(self):
        cfg = RescaleConfig(track_interval=100, ema_rho=0.99)
        state = RescaleState.empty()
        history = []
        for m in self.mats:
            state = update_rescale_state(state, m, cfg)
            history.append((state.lambda_min, state.lambda_max))
        self.assertEqual(state.counter, 250)
        changed = [i for i in range(1, 250) if history[i] != history[i - 1]]
        self.assertEqual(changed, [100, 200])
        self.assertEqual(history[0], spectral_extremes(self.mats[0]))

    def test_ema(self):
        cfg = RescaleConfig(track_interval=1, ema_rho=0.5)
        first = update_rescale_state(RescaleState.empty(), self.mats[0], cfg)
        second = update_rescale_state(first, self.mats[1], cfg)
        lo, hi = spectral_extremes(self.mats[1])
        self.assertAlmostEqual(second.lambda_min, 0.5 * first.lambda_min + 0.5 * lo)
        self.assertAlmostEqual(second.lambda_max, 0.5 * first.lambda_max + 0.5 * hi)

    def test_exact_tracking(self):
        cfg = RescaleConfig(track_interval=1, ema_rho=0.0)
        state = RescaleState.empty()
        for m in self.mats[:20]:
            state = update_rescale_state(state, m, cfg)
            self.assertEqual((state.lambda_min, state.lambda_max), spectral_extremes(m))


if __name__ == "__main__":
    unittest.main()
