import unittest
import numpy as np
from mmissl.siamese import (
    MlpSpec,
    TrainConfig,
    EncoderState,
    encode,
    loss_and_grads,
    train_step,
    momentum_update,
    fit,
)
from mmissl.loss import LossStates
from mmissl.synthdata import AugmentSpec
from mmissl.util.gradcheck import encoder_grad_check
from mmissl.errors import ConfigError, NoTarget, NumericalError


def small_state(seed=0, momentum_encoder=False):
    spec = MlpSpec((4, 8, 3))
    return EncoderState.create(spec, np.random.default_rng(seed), momentum_encoder)


def views(rng, m=16):
    x = rng.standard_normal((m, 4))
    return x, x + 0.1 * rng.standard_normal((m, 4))


class TestTrainConfig(unittest.TestCase):
    def test_batch_size(self):
        with self.assertRaises(ConfigError):
            TrainConfig(batch_size=1)

    def test_tau(self):
        with self.assertRaises(ConfigError):
            TrainConfig(tau=1.5)

    def test_round_trip(self):
        cfg = TrainConfig(batch_size=32, variant="NoBoth", steps_per_epoch=3)
        self.assertEqual(TrainConfig.from_dict(cfg.to_dict()).to_dict(), cfg.to_dict())


class TestEncoderState(unittest.TestCase):
    def test_plain(self):
        state = small_state()
        self.assertFalse(state.has_target)
        self.assertEqual(list(state.trainable()), ["online"])

    def test_momentum_encoder(self):
        state = small_state(momentum_encoder=True)
        self.assertTrue(state.has_target)
        self.assertEqual(state.predictor_spec.widths, (3, 6, 3))
        for a, b in zip(state.online, state.target):
            self.assertTrue(np.array_equal(a["weight"], b["weight"]))

    def test_encode(self):
        state = small_state()
        batch = encode(state, np.zeros((5, 4)))
        self.assertEqual((batch.d, batch.m), (3, 5))
        self.assertFalse(batch.normalized)

    def test_encode_no_target(self):
        with self.assertRaises(NoTarget):
            encode(small_state(), np.zeros((5, 4)), use_target=True)

    def test_momentum_update_no_target(self):
        with self.assertRaises(NoTarget):
            momentum_update(small_state(), 0.9)


class TestTrainStep(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(2)

    def test_single_update(self):
        cfg = TrainConfig(batch_size=16, warmup_epochs=0, epochs=5)
        state = small_state()
        new, breakdown, lr, states = train_step(
            state, views(self.rng), cfg, LossStates.empty()
        )
        self.assertEqual(new.step, 1)
        self.assertEqual(lr, cfg.base_lr)
        self.assertTrue(np.isfinite(breakdown.total))
        self.assertGreater(new.last_grad_norm, 0.0)
        self.assertTrue(all(s.initialized for s in states))
        self.assertEqual(state.step, 0)
        self.assertFalse(np.array_equal(new.parameters(), state.parameters()))

    def test_accumulation(self):
        cfg = TrainConfig(
            batch_size=16,
            warmup_epochs=0,
            epochs=5,
            grad_accum_steps=2,
            optimizer_momentum=0.0,
            weight_decay=0.0,
        )
        state = small_state()
        first, second = views(self.rng), views(self.rng)

        _, g1, states1 = loss_and_grads(state, *first, cfg, LossStates.empty())
        _, g2, _ = loss_and_grads(state, *second, cfg, states1)

        mid, _, _, states = train_step(state, first, cfg, LossStates.empty())
        self.assertEqual((mid.step, mid.accum_count), (0, 1))
        self.assertTrue(np.array_equal(mid.parameters(), state.parameters()))
        new, _, _, _ = train_step(mid, second, cfg, states)
        self.assertEqual((new.step, new.accum_count), (1, 0))
        self.assertIsNone(new.accum)
        for ix, layer in enumerate(state.online):
            for key, w in layer.items():
                mean = 0.5 * (g1["online"][ix][key] + g2["online"][ix][key])
                expected = w - cfg.base_lr * mean
                self.assertTrue(np.allclose(new.online[ix][key], expected))

    def test_momentum_encoder_target(self):
        for tau in [0.0, 1.0]:
            with self.subTest(tau=tau):
                cfg = TrainConfig(
                    batch_size=16, warmup_epochs=0, epochs=5, tau=tau, momentum_encoder=True
                )
                state = small_state(momentum_encoder=True)
                new, _, _, _ = train_step(state, views(self.rng), cfg, LossStates.empty())
                reference = new.online if tau == 0.0 else state.target
                for a, b in zip(new.target, reference):
                    self.assertTrue(np.allclose(a["weight"], b["weight"]))
                self.assertIn("predictor", new.velocity)

    def test_momentum_encoder_requires_target(self):
        cfg = TrainConfig(batch_size=16, momentum_encoder=True)
        with self.assertRaises(NoTarget):
            train_step(small_state(), views(self.rng), cfg, LossStates.empty())

    def test_non_finite(self):
        cfg = TrainConfig(batch_size=16, warmup_epochs=0)
        state = small_state()
        state.online[0]["weight"][0, 0] = np.nan
        with self.assertRaises(NumericalError):
            train_step(state, views(self.rng), cfg, LossStates.empty())


class TestFit(unittest.TestCase):
    def setUp(self):
        self.samples = np.random.default_rng(4).standard_normal((64, 4))
        self.cfg = TrainConfig(batch_size=16, epochs=2, warmup_epochs=1, steps_per_epoch=4)

    def train(self, seed=7):
        calls = []
        state, states = fit(
            small_state(),
            self.samples,
            AugmentSpec(),
            self.cfg,
            np.random.default_rng(seed),
            on_step=lambda *args: calls.append(args),
        )
        return state, states, calls

    def test_steps(self):
        state, states, calls = self.train()
        self.assertEqual(state.step, 8)
        self.assertEqual(len(calls), 8)
        self.assertEqual([c[0] for c in calls], [0] * 4 + [1] * 4)
        self.assertEqual(states.z.counter, 8)

    def test_deterministic(self):
        a, _, _ = self.train()
        b, _, _ = self.train()
        self.assertTrue(np.array_equal(a.parameters(), b.parameters()))

    def test_no_batch(self):
        with self.assertRaises(ConfigError):
            fit(
                small_state(),
                self.samples[:8],
                AugmentSpec(),
                self.cfg,
                np.random.default_rng(0),
            )


class TestEncoderGradients(unittest.TestCase):
    def test_plain(self):
        rng = np.random.default_rng(9)
        cfg = TrainConfig(batch_size=16)
        errors = encoder_grad_check(small_state(3), *views(rng), cfg)
        self.assertLessEqual(errors["online"], 1e-4)

    def test_momentum_encoder(self):
        rng = np.random.default_rng(10)
        cfg = TrainConfig(batch_size=16, momentum_encoder=True)
        errors = encoder_grad_check(small_state(3, momentum_encoder=True), *views(rng), cfg)
        self.assertEqual(set(errors), {"online", "predictor"})
        self.assertLessEqual(max(errors.values()), 1e-4)


if __name__ == "__main__":
    unittest.main()
