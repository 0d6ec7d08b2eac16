import unittest
import numpy as np
from mmissl.embedstats import EmbeddingBatch, normalize_batch
from mmissl.loss import (
    LossVariant,
    LossStates,
    RescaleConfig,
    RescaleState,
    align_matrix,
    loss_matrices,
    update_loss_states,
    exact_loss_states,
    mmi_loss,
)
from mmissl.embedstats import build_gram_set
from mmissl.errors import ConfigError, NonFiniteLoss, Uninitialized
from mmissl.util.gradcheck import frozen_states, loss_grad_check


def views(d, m, seed, r=0.8):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((d, m))
    b = r * a + np.sqrt(1 - r ** 2) * rng.standard_normal((d, m))
    return normalize_batch(EmbeddingBatch(a)), normalize_batch(EmbeddingBatch(b))


class TestLossVariant(unittest.TestCase):
    def test_parse(self):
        self.assertIs(LossVariant.parse("NoBoth"), LossVariant.NoBoth)
        self.assertIs(LossVariant.parse(LossVariant.Full), LossVariant.Full)
        with self.assertRaises(ConfigError):
            LossVariant.parse("Nothing")

    def test_terms(self):
        self.assertFalse(LossVariant.NoBoth.uses_term_z)
        self.assertFalse(LossVariant.NoBoth.uses_term_zprime)
        self.assertTrue(LossVariant.NoLogdetZ.uses_term_zprime)
        self.assertFalse(LossVariant.NoMuLambda.centered)


class TestAlignMatrix(unittest.TestCase):
    def test_pooled(self):
        z, zp = views(4, 12, 0)
        grams = build_gram_set(z, zp)
        pooled = align_matrix(z, zp, grams, "pooled").entries
        expected = grams.pooled().entries - grams.g_zzp_sym.entries
        self.assertTrue(np.allclose(pooled, expected))

    def test_anchor(self):
        z, zp = views(4, 12, 1)
        grams = build_gram_set(z, zp)
        anchor = align_matrix(z, zp, grams, "anchor").entries
        self.assertTrue(np.allclose(anchor, grams.g_zz.entries - grams.g_zzp_sym.entries))


class TestMmiLoss(unittest.TestCase):
    def setUp(self):
        self.cfg = RescaleConfig()
        self.z, self.zp = views(6, 16, 2)
        self.states = exact_loss_states(self.z, self.zp, self.cfg)

    def test_total(self):
        out = mmi_loss(self.z, self.zp, self.states, self.cfg)
        self.assertAlmostEqual(out.total, out.term_align - out.term_z - out.term_zprime)
        self.assertEqual(out.grad_z.shape, (6, 16))

    def test_no_both(self):
        out = mmi_loss(self.z, self.zp, self.states, self.cfg, "NoBoth")
        self.assertEqual((out.term_z, out.term_zprime), (0.0, 0.0))
        self.assertEqual(out.total, out.term_align)

    def test_mse_align(self):
        out = mmi_loss(self.z, self.zp, self.states, self.cfg, LossVariant.MseAlign)
        diff = self.z.data - self.zp.data
        self.assertAlmostEqual(out.term_align, np.sum(diff * diff) / 16)

    def test_identical_views(self):
        out = mmi_loss(self.z, self.z, exact_loss_states(self.z, self.z, self.cfg), self.cfg)
        self.assertAlmostEqual(out.term_align, 0.0, places=12)

    def test_view_swap(self):
        a = mmi_loss(self.z, self.zp, self.states, self.cfg)
        b = mmi_loss(self.zp, self.z, self.states.swapped(), self.cfg)
        self.assertAlmostEqual(a.total, b.total, places=12)
        self.assertTrue(np.allclose(a.grad_z, b.grad_zprime))

    def test_scale_invariance(self):
        base = mmi_loss(self.z, self.zp, self.states, self.cfg)
        for c in [0.01, 3.0, 250.0]:
            with self.subTest(c=c):
                z = EmbeddingBatch(np.sqrt(c) * self.z.data, normalized=True)
                zp = EmbeddingBatch(np.sqrt(c) * self.zp.data, normalized=True)
                out = mmi_loss(z, zp, exact_loss_states(z, zp, self.cfg), self.cfg)
                self.assertLessEqual(abs(out.term_align - base.term_align), 1e-10)
                self.assertLessEqual(abs(out.term_z - base.term_z), 1e-10)
                self.assertLessEqual(abs(out.term_zprime - base.term_zprime), 1e-10)

    def test_uninitialized(self):
        with self.assertRaises(Uninitialized):
            mmi_loss(self.z, self.zp, LossStates.empty(), self.cfg)

    def test_non_finite(self):
        bad = RescaleState(np.nan, np.nan, 1, True)
        states = self.states._replace(align=bad)
        with self.assertRaises(NonFiniteLoss) as ctx:
            mmi_loss(self.z, self.zp, states, self.cfg)
        self.assertEqual(ctx.exception.term, "align")

    def test_gradients(self):
        for block in ["pooled", "anchor"]:
            cfg = RescaleConfig(align_block=block)
            states = exact_loss_states(self.z, self.zp, cfg)
            for variant in LossVariant:
                with self.subTest(block=block, variant=variant):
                    err_z, err_zp = loss_grad_check(self.z, self.zp, states, cfg, variant)
                    self.assertLessEqual(max(err_z, err_zp), 1e-5)


class TestStates(unittest.TestCase):
    def test_update(self):
        cfg = RescaleConfig()
        z, zp = views(4, 10, 3)
        states = update_loss_states(LossStates.empty(), z, zp, cfg)
        self.assertTrue(all(s.initialized and s.counter == 1 for s in states))
        self.assertEqual(states, frozen_states(z, zp, cfg))

    def test_shared(self):
        cfg = RescaleConfig(shared_tracking=True)
        z, zp = views(4, 10, 4)
        states = update_loss_states(LossStates.empty(), z, zp, cfg)
        self.assertEqual(states.align, states.z)
        self.assertEqual(states.zprime, states.z)

    def test_matrices_order(self):
        z, zp = views(3, 8, 5)
        grams, mats = loss_matrices(z, zp, RescaleConfig())
        self.assertEqual(mats[1], grams.g_zz)
        self.assertEqual(mats[2], grams.g_zpzp)


if __name__ == "__main__":
    unittest.main()
