"""
Experiment configuration: JSON files checked against the variable model in
:mod:`mmissl.data.config` and turned into the specs used by the trainer.
"""
import copy
import json
import logging
from pathlib import Path
from .data.config import experiment_variables
from .env import MMI_Env
from .errors import ConfigError
from .loss import RescaleConfig
from .siamese.network import MlpSpec
from .siamese.train import TrainConfig
from .synthdata import AugmentSpec, DatasetSpec

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)


def _is_var(node):
    return isinstance(node, dict) and "validate" in node and "default" in node


def _cast(path, spec, value):
    if value is None:
        if spec["default"] is None:
            return None
        raise ConfigError("'{}' may not be null.".format(path))
    t = spec["type"]
    try:
        if t is bool:
            if not isinstance(value, bool):
                raise TypeError("expected true or false")
            return value
        if t is list:
            if not isinstance(value, (list, tuple)):
                raise TypeError("expected a list")
            item = spec.get("item")
            if item is dict:
                if not all(isinstance(v, dict) for v in value):
                    raise TypeError("expected a list of objects")
                return [dict(v) for v in value]
            return [item(v) if item is not None else v for v in value]
        if t is int and isinstance(value, float) and not value.is_integer():
            raise TypeError("expected an integer")
        return t(value) if t is not None else value
    except (TypeError, ValueError) as err:
        raise ConfigError("'{}': cannot use {!r} ({}).".format(path, value, err))


def _validate(path, spec, value):
    if value is None or spec["validate"] is None:
        return
    if not spec["validate"](value):
        msg = spec.get("message") or "invalid value {!r}.".format(value)
        raise ConfigError("'{}': {}".format(path, msg))


def _merge(model, user, prefix=""):
    """Defaults of `model` updated with `user`, cast and validated."""
    user = {} if user is None else user
    if not isinstance(user, dict):
        raise ConfigError("'{}' must be an object.".format(prefix.rstrip(".")))
    unknown = sorted(set(user) - set(model))
    if unknown:
        raise ConfigError(
            "Unknown configuration keys: {}.".format(
                ", ".join(prefix + k for k in unknown)
            )
        )
    out = {}
    for key, node in model.items():
        path = prefix + key
        if _is_var(node):
            value = _cast(path, node, user.get(key, copy.deepcopy(node["default"])))
            _validate(path, node, value)
            out[key] = value
        else:
            out[key] = _merge(node, user.get(key), prefix=path + ".")
    return out


def set_dotted(d, dotted, value):
    """Set `d["a"]["b"]` from the key `"a.b"` on a nested copy of `d`."""
    d = copy.deepcopy(d)
    node = d
    keys = dotted.split(".")
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            raise ConfigError("Unknown configuration section '{}'.".format(dotted))
        node = node[key]
    node[keys[-1]] = value
    return d


class ExperimentConfig(object):
    """
    Validated experiment configuration.

    Parameters
    -----------
    d : :class:`dict`
        Nested configuration; missing keys take their defaults, unknown keys
        raise :class:`~mmissl.errors.ConfigError`.
    """

    def __init__(self, d=None, variable_model=None):
        self.variable_model = variable_model or experiment_variables
        self.tree = _merge(self.variable_model, d)

    @classmethod
    def load(cls, path, seed=None, env=None):
        """
        Read a JSON configuration. A seed from the environment
        (`MMI_SSL_SEED`) replaces the file's, and an explicit `seed` replaces both.
        """
        path = Path(path)
        try:
            with open(str(path)) as f:
                d = json.load(f)
        except FileNotFoundError:
            raise ConfigError("Configuration file {} not found.".format(path))
        except json.JSONDecodeError as err:
            raise ConfigError("{} is not valid JSON: {}".format(path, err))
        cfg = cls(d)
        env = env if env is not None else MMI_Env()
        if env.SEED is not None:
            logger.info("Seed {} taken from the environment.".format(env.SEED))
            cfg = cfg.with_overrides({"seed": env.SEED})
        if seed is not None:
            cfg = cfg.with_overrides({"seed": seed})
        return cfg

    def dump(self, path=None):
        """JSON text of the configuration, written to `path` if given."""
        text = json.dumps(self.tree, indent=2, sort_keys=True)
        if path is not None:
            with open(str(path), "w") as f:
                f.write(text)
        return text

    def to_dict(self):
        return copy.deepcopy(self.tree)

    def with_overrides(self, overrides):
        """New configuration with dotted-key overrides applied."""
        d = self.to_dict()
        for key, value in (overrides or {}).items():
            d = set_dotted(d, key, value)
        return ExperimentConfig(d, variable_model=self.variable_model)

    def __getitem__(self, key):
        return self.tree[key]

    def __eq__(self, other):
        return isinstance(other, ExperimentConfig) and self.tree == other.tree

    def __repr__(self):
        return "{}(seed={})".format(self.__class__.__name__, self.tree["seed"])

    @property
    def seed(self):
        return self.tree["seed"]

    def dataset_spec(self):
        d = {k: v for k, v in self.tree["dataset"].items() if k != "csv"}
        return DatasetSpec(seed=self.seed, **d)

    def augment_spec(self):
        return AugmentSpec(**self.tree["augment"])

    def mlp_spec(self, input_dim):
        net = self.tree["network"]
        widths = [input_dim] + list(net["hidden"]) + [net["output_dim"]]
        return MlpSpec(widths, batchnorm=net["batchnorm"])

    def rescale_config(self):
        return RescaleConfig(**self.tree["rescale"])

    def train_config(self, steps_per_epoch=1, batches_per_epoch=None):
        return TrainConfig(
            rescale=self.rescale_config(),
            seed=self.seed,
            momentum_encoder=self.tree["network"]["momentum_encoder"],
            steps_per_epoch=steps_per_epoch,
            batches_per_epoch=batches_per_epoch,
            **self.tree["train"]
        )
