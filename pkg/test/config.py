import json
import unittest
from pyrolite.util.general import temp_path, remove_tempdir
from mmissl.config import ExperimentConfig, set_dotted
from mmissl.env import MMI_Env
from mmissl.loss import LossVariant
from mmissl.util.general import get_example_config
from mmissl.errors import ConfigError


class TestExperimentConfig(unittest.TestCase):
    def test_defaults(self):
        cfg = ExperimentConfig()
        self.assertEqual(cfg.seed, 0)
        self.assertEqual(cfg["rescale"]["rescale_beta"], 5.0)
        self.assertEqual(cfg["train"]["variant"], "Full")
        self.assertIsNone(cfg["probe"]["checkpoint"])

    def test_unknown_key(self):
        for d in [{"bogus": 1}, {"train": {"batchsize": 3}}]:
            with self.subTest(d=d):
                with self.assertRaises(ConfigError):
                    ExperimentConfig(d)

    def test_wrong_type(self):
        for d in [{"seed": "zero"}, {"network": {"batchnorm": 1}}, {"seed": 1.5}]:
            with self.subTest(d=d):
                with self.assertRaises(ConfigError):
                    ExperimentConfig(d)

    def test_beta_message(self):
        with self.assertRaises(ConfigError) as ctx:
            ExperimentConfig({"rescale": {"rescale_beta": 1.0}})
        self.assertIn("converges", str(ctx.exception))

    def test_invalid_values(self):
        for d in [
            {"train": {"batch_size": 1}},
            {"train": {"variant": "Half"}},
            {"rescale": {"ema_rho": 1.0}},
            {"eval": {"split_ratio": 1.0}},
            {"ablate": {"variants": []}},
        ]:
            with self.subTest(d=d):
                with self.assertRaises(ConfigError):
                    ExperimentConfig(d)

    def test_with_overrides(self):
        cfg = ExperimentConfig().with_overrides(
            {"rescale.rescale_beta": 3, "train.variant": "NoBoth"}
        )
        self.assertEqual(cfg["rescale"]["rescale_beta"], 3.0)
        self.assertEqual(cfg.train_config().variant, LossVariant.NoBoth)

    def test_override_unknown_section(self):
        with self.assertRaises(ConfigError):
            ExperimentConfig().with_overrides({"nosuch.key": 1})

    def test_set_dotted_copies(self):
        d = {"a": {"b": 1}}
        self.assertEqual(set_dotted(d, "a.b", 2), {"a": {"b": 2}})
        self.assertEqual(d, {"a": {"b": 1}})

    def test_specs(self):
        cfg = ExperimentConfig({"network": {"hidden": [8], "output_dim": 4}})
        self.assertEqual(cfg.mlp_spec(16).widths, (16, 8, 4))
        self.assertEqual(cfg.dataset_spec().seed, cfg.seed)
        train = cfg.train_config(steps_per_epoch=7)
        self.assertEqual(train.steps_per_epoch, 7)
        self.assertEqual(train.rescale, cfg.rescale_config())


class TestLoad(unittest.TestCase):
    def setUp(self):
        self.dir = temp_path() / "test_config"
        self.dir.mkdir(parents=True, exist_ok=True)
        self.env = MMI_Env()
        self.env.SEED = None

    def test_example(self):
        cfg = ExperimentConfig.load(get_example_config("toy.json"), env=self.env)
        self.assertEqual(cfg["network"]["hidden"], [64, 64])

    def test_round_trip(self):
        cfg = ExperimentConfig({"seed": 5, "train": {"epochs": 3}})
        path = self.dir / "round_trip.json"
        cfg.dump(path)
        self.assertEqual(ExperimentConfig.load(path, env=self.env), cfg)

    def test_seed_precedence(self):
        path = self.dir / "seeded.json"
        path.write_text(json.dumps({"seed": 1}))
        self.assertEqual(ExperimentConfig.load(path, env=self.env).seed, 1)
        self.env.SEED = 2
        self.assertEqual(ExperimentConfig.load(path, env=self.env).seed, 2)
        self.assertEqual(ExperimentConfig.load(path, seed=3, env=self.env).seed, 3)

    def test_missing(self):
        with self.assertRaises(ConfigError):
            ExperimentConfig.load(self.dir / "absent.json")

    def test_invalid_json(self):
        path = self.dir / "broken.json"
        path.write_text("{seed: 1")
        with self.assertRaises(ConfigError):
            ExperimentConfig.load(path)

    def tearDown(self):
        self.env.SEED = None
        remove_tempdir(self.dir)


if __name__ == "__main__":
    unittest.main()
