import logging
from pyrolite.util.meta import get_module_datafolder

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)


def mmissl_datafolder(subfolder=None):
    """
    Returns the path of the mmissl data folder.

    Parameters
    -----------
    subfolder : :class:`str`
        Subfolder within the mmissl data folder.

    Returns
    -------
    :class:`pathlib.Path`
    """
    return get_module_datafolder(module="mmissl", subfolder=subfolder)


def get_example_config(name="toy.json"):
    """
    Get the filepath of an example experiment configuration.

    Parameters
    -----------
    name : :class:`str`
        Filename of the configuration.

    Returns
    -------
    :class:`pathlib.Path`
    """
    return mmissl_datafolder("configs") / name
