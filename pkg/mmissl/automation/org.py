import json
import logging
from contextlib import contextmanager
from pathlib import Path

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def make_runfolder(name, indir=None, config=None):
    """
    Create a folder for a run, including the resolved configuration.

    Parameters
    -----------
    name : :class:`str`
        Name of the folder.
    indir : :class:`str` | :class:`pathlib.Path`
        Path to the base directory to create run folders in.
    config : :class:`dict`
        Resolved configuration, written to `config.json`.

    Returns
    --------
    :class:`pathlib.Path`
        Path to the run folder.
    """
    indir = Path("./") if indir is None else Path(indir)
    folder = indir / str(name)
    folder.mkdir(parents=True, exist_ok=True)
    if config is not None:
        with open(str(folder / "config.json"), "w") as f:
            f.write(json.dumps(config, indent=2, sort_keys=True))
    return folder


@contextmanager
def run_log(folder, name="mmissl", filename="runlog.log"):
    """
    Attach a DEBUG file handler writing to `folder/filename` for the duration
    of the context.

    Parameters
    -----------
    folder : :class:`str` | :class:`pathlib.Path`
        Run folder.
    name : :class:`str`
        Logger to attach the handler to.
    """
    target = logging.getLogger(name)
    fh = logging.FileHandler(str(Path(folder) / filename))
    fh.setLevel(logging.DEBUG)
    fh.setFormatter(logging.Formatter(LOG_FORMAT))
    previous = target.level
    target.addHandler(fh)
    if target.level == logging.NOTSET or target.level > logging.DEBUG:
        target.setLevel(logging.DEBUG)
    try:
        yield fh
    finally:
        target.removeHandler(fh)
        target.setLevel(previous)
        fh.close()
