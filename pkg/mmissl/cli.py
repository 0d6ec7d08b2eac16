"""
Command line entry point: :code:`mmissl <subcommand> --config PATH`.

Exit codes are 0 on success, 2 for configuration errors and 3 for numerical
failures.
"""
import sys
import argparse
import logging
from . import __version__
from . import automation
from .config import ExperimentConfig
from .automation.org import LOG_FORMAT
from .errors import ConfigError, MMIError, NumericalError

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

RUNNERS = {
    "train": automation.run_train,
    "ablate": automation.run_ablate,
    "mi-validate": automation.run_mi_validate,
    "logdet-bench": automation.run_logdet_bench,
    "grad-check": automation.run_grad_check,
    "probe": automation.run_probe,
}

HELP = {
    "train": "Train an encoder and report probe accuracy and collapse metrics.",
    "ablate": "Train and compare every loss variant on the same dataset.",
    "mi-validate": "Validate closed-form mutual information against KSG estimates.",
    "logdet-bench": "Compare the truncated log-determinant with the exact value.",
    "grad-check": "Check analytic gradients against finite differences.",
    "probe": "Evaluate a saved checkpoint (probe.checkpoint) on a dataset.",
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mmissl",
        description="Explicit mutual-information self-supervised learning toolkit.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for name in RUNNERS:
        p = sub.add_parser(name, help=HELP[name], description=HELP[name])
        p.add_argument("--config", required=True, help="JSON experiment configuration.")
        p.add_argument("--out", default=None, help="Base output directory.")
        p.add_argument("--seed", type=int, default=None, help="Override the seed.")
        p.add_argument("--quiet", action="store_true", help="Only log warnings.")
    return parser


def _stream_handler(quiet):
    handler = logging.StreamHandler()
    handler.setLevel(logging.WARNING if quiet else logging.INFO)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    return handler


def main(argv=None):
    """
    Run a subcommand.

    Parameters
    -----------
    argv : :class:`list` of :class:`str`, :code:`None`
        Arguments; :code:`sys.argv[1:]` when omitted.

    Returns
    --------
    :class:`int`
        Exit status.
    """
    args = build_parser().parse_args(argv)
    package_logger = logging.getLogger("mmissl")
    handler = _stream_handler(args.quiet)
    package_logger.addHandler(handler)
    package_logger.setLevel(logging.DEBUG)
    try:
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed must be >= 0.")
        config = ExperimentConfig.load(args.config, seed=args.seed)
        folder = RUNNERS[args.command](config, out=args.out)
        logger.info("Outputs written to {}.".format(folder))
        return EXIT_OK
    except NumericalError as err:
        logger.error("Numerical failure: {}".format(err))
        return EXIT_NUMERICAL
    except MMIError as err:
        logger.error("Configuration error: {}".format(err))
        return EXIT_CONFIG
    finally:
        package_logger.removeHandler(handler)


if __name__ == "__main__":
    sys.exit(main())
