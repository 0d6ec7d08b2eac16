"""
Environment variables read by mmissl. Only the seed override is recognised.
"""
import os
import logging
from pyrolite.util.text import remove_prefix
from .data.config import cvar
from .errors import ConfigError

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)

environment_variables = {
    "SEED": cvar(
        type=int,
        validate=lambda x: x >= 0,
        desc="Replaces the seed of any configuration loaded from file.",
    )
}


class MMI_Env(object):
    """
    Prefixed view of the process environment.

    Parameters
    -----------
    prefix : :class:`str`
        Prefix of the recognised variables.
    variable_model : :class:`dict`
        Recognised variables, keyed without the prefix.
    """

    def __init__(self, prefix="MMI_SSL_", variable_model=None):
        self.__dict__["prefix"] = prefix
        self.__dict__["spec"] = variable_model or environment_variables

    def _read(self, var):
        spec = self.spec[var]
        raw = os.getenv(self.prefix + var)
        if raw in (None, "", "None"):
            return None
        try:
            value = spec["type"](raw) if spec["type"] is not None else raw
        except ValueError:
            raise ConfigError(
                "{}{}={!r} is not a valid {}.".format(
                    self.prefix, var, raw, spec["type"].__name__
                )
            )
        if spec["validate"] is not None and not spec["validate"](value):
            raise ConfigError("{}{}={!r} is out of range.".format(self.prefix, var, raw))
        return value

    def dump(self, unset_variables=True, prefix=False):
        """
        Export the recognised variables to a dictionary.

        Parameters
        -----------
        unset_variables : :class:`bool`
            Whether to include variables which are currently unset.
        prefix : :class:`bool`
            Whether to key variables by their prefixed names.

        Returns
        --------
        :class:`dict`
        """
        env = {var: self._read(var) for var in self.spec}
        if not unset_variables:
            env = {k: v for k, v in env.items() if v is not None}
        return {[k, self.prefix + k][prefix]: v for k, v in env.items()}

    def __getattr__(self, name):
        name = remove_prefix(name, self.prefix)
        if name in self.spec:
            return self._read(name)
        raise AttributeError(name)

    def __setattr__(self, name, value):
        """Setting a recognised variable (with or without prefix) exports it."""
        name = remove_prefix(name, self.prefix)
        if name not in self.spec:
            self.__dict__[name] = value
        elif value is None:
            os.environ.pop(self.prefix + name, None)
        else:
            os.environ[self.prefix + name] = str(value)
            self._read(name)

    def __repr__(self):
        return "{}({})".format(self.__class__.__name__, self.dump(unset_variables=False))
