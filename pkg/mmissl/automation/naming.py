import json
import hashlib
import logging
from pyrolite.util.text import slugify

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)

__abbrv__ = {"mi-validate": "mival", "logdet-bench": "bench", "grad-check": "gradchk"}


def config_hash(d, algorithm="sha1", length=10):
    """
    Get the hash of an experiment configuration dictionary.

    Parameters
    ----------
    d : :class:`dict`
        Configuration dictionary.
    algorithm : :class:`str`
        Name of hash algorithm to use.
    length : :class:`int`
        Length of the returned index generated from the hash.

    Returns
    --------
    :class:`str`
        Hash-based index for the configuration.
    """
    hsh = hashlib.new(algorithm)
    # sorted at every level, so insertion order of overrides does not matter
    hsh.update(json.dumps(d, sort_keys=True, ensure_ascii=False).encode("utf8"))
    hex = hsh.hexdigest()
    length = length or len(hex)
    return hex[:length]


def array_hash(arr, algorithm="sha1", length=10):
    """
    Hash of the bytes of an array (e.g. a dataset), used to confirm that runs
    share identical inputs.
    """
    hsh = hashlib.new(algorithm)
    hsh.update(str(arr.dtype).encode("utf8"))
    hsh.update(str(arr.shape).encode("utf8"))
    hsh.update(arr.tobytes())
    hex = hsh.hexdigest()
    length = length or len(hex)
    return hex[:length]


def run_name(kind, config):
    """
    Derive a run folder name from the subcommand and the configuration.

    Parameters
    ------------
    kind : :class:`str`
        Subcommand (e.g. `train`, `mi-validate`).
    config : :class:`dict`
        Configuration tree.

    Returns
    --------
    :class:`str`
    """
    parts = [__abbrv__.get(kind, kind)]
    train = config.get("train", {})
    if kind in ("train", "ablate") and train:
        parts.append("{}-bs{}-ep{}".format(train["variant"], train["batch_size"], train["epochs"]))
    parts.append("s{}".format(config.get("seed", 0)))
    parts.append(config_hash(config))
    return slugify("-".join(str(p) for p in parts))
