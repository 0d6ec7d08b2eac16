"""
Variable model of an experiment configuration: every accepted key with its
default, type, validator and description.
"""
from pyrolite.util.text import normalise_whitespace, to_width

LOSS_VARIANTS = ["Full", "NoLogdetZ", "NoLogdetZprime", "NoBoth", "MseAlign", "NoMuLambda"]


def cvar(**kwargs):
    """A data dictionary specifying a configuration variable."""
    d = dict(validate=None, desc=None, type=None, default=None, message=None)
    d.update(kwargs)
    return d


def description(text, width=69):
    return to_width(normalise_whitespace(text), width=width)


def is_positive(x):
    return x > 0


def is_nonnegative(x):
    return x >= 0


def is_fraction(x):
    return 0 <= x <= 1


def all_positive(items):
    return len(items) > 0 and all(i > 0 for i in items)


experiment_variables = {
    "seed": cvar(
        default=0,
        type=int,
        validate=is_nonnegative,
        desc=description(
            """Seed of every random stream in a run. Overridden by the
            MMI_SSL_SEED environment variable and the --seed flag."""
        ),
    ),
    "dataset": {
        "num_classes": cvar(default=4, type=int, validate=lambda x: x >= 2),
        "per_class": cvar(default=250, type=int, validate=is_positive),
        "dim": cvar(default=16, type=int, validate=lambda x: x >= 2),
        "spread": cvar(default=5.0, type=float, validate=is_nonnegative),
        "noise": cvar(default=1.0, type=float, validate=is_nonnegative),
        "csv": cvar(
            default=None,
            type=str,
            desc=description(
                """Optional CSV with columns sample_id, feature_0.., label
                used instead of the synthetic blobs."""
            ),
        ),
    },
    "augment": {
        "noise_sigma": cvar(default=0.1, type=float, validate=is_nonnegative),
        "max_angle": cvar(default=0.3, type=float, validate=is_nonnegative),
        "dropout": cvar(default=0.1, type=float, validate=is_fraction),
        "scale_jitter": cvar(default=0.2, type=float, validate=is_fraction),
    },
    "network": {
        "hidden": cvar(default=[64, 64], type=list, item=int, validate=all_positive),
        "output_dim": cvar(default=32, type=int, validate=is_positive),
        "batchnorm": cvar(default=True, type=bool),
        "momentum_encoder": cvar(
            default=False,
            type=bool,
            desc=description(
                """Train an online encoder and two-layer predictor against a
                moving-average target encoder."""
            ),
        ),
    },
    "train": {
        "batch_size": cvar(
            default=128,
            type=int,
            validate=lambda x: x >= 2,
            message="batch_size must be >= 2 for batch statistics.",
        ),
        "epochs": cvar(default=50, type=int, validate=is_positive),
        "base_lr": cvar(default=0.05, type=float, validate=is_nonnegative),
        "warmup_epochs": cvar(default=2.0, type=float, validate=is_nonnegative),
        "weight_decay": cvar(default=1e-4, type=float, validate=is_nonnegative),
        "optimizer_momentum": cvar(default=0.9, type=float, validate=lambda x: 0 <= x < 1),
        "tau": cvar(default=0.996, type=float, validate=is_fraction),
        "grad_accum_steps": cvar(default=1, type=int, validate=is_positive),
        "variant": cvar(
            default="Full", type=str, validate=lambda x: x in LOSS_VARIANTS
        ),
    },
    "rescale": {
        "rescale_beta": cvar(
            default=5.0,
            type=float,
            validate=lambda x: x > 1,
            message=(
                "rescale_beta must exceed 1: the rescaled spectrum lies in "
                "[1 - 1/beta, 1 + 1/beta] and the log-det series converges only "
                "when 1/beta < 1."
            ),
        ),
        "taylor_order": cvar(default=4, type=int, validate=lambda x: x >= 1),
        "track_interval": cvar(default=100, type=int, validate=is_positive),
        "ema_rho": cvar(
            default=0.99,
            type=float,
            validate=lambda x: 0 <= x < 1,
            message="ema_rho must lie in [0, 1).",
        ),
        "shared_tracking": cvar(default=False, type=bool),
        "align_block": cvar(
            default="pooled", type=str, validate=lambda x: x in ["pooled", "anchor"]
        ),
    },
    "eval": {
        "split_ratio": cvar(default=0.7, type=float, validate=lambda x: 0 < x < 1),
        "probe_reg": cvar(default=1e-4, type=float, validate=is_nonnegative),
        "probe_steps": cvar(default=500, type=int, validate=is_positive),
        "probe_lr": cvar(default=0.5, type=float, validate=is_positive),
        "knn_k": cvar(default=5, type=int, validate=is_positive),
    },
    "ablate": {
        "variants": cvar(
            default=list(LOSS_VARIANTS),
            type=list,
            item=str,
            validate=lambda x: len(x) > 0 and all(v in LOSS_VARIANTS for v in x),
        ),
        "sweep": cvar(
            default=[],
            type=list,
            item=dict,
            desc=description(
                """Optional list of overrides keyed by dotted config paths,
                e.g. {"rescale.rescale_beta": 3}; each entry runs the full
                variant grid once more."""
            ),
        ),
    },
    "mi_validate": {
        "dims": cvar(default=[1, 2, 4], type=list, item=int, validate=all_positive),
        "shapes": cvar(
            default=[0.5, 1.0, 2.0, 3.0], type=list, item=float, validate=all_positive
        ),
        "joints": cvar(default=1, type=int, validate=is_positive),
        "coupling": cvar(default=0.6, type=float, validate=lambda x: 0 <= x < 1),
        "samples": cvar(default=100000, type=int, validate=lambda x: x >= 1000),
        "invariance_samples": cvar(default=50000, type=int, validate=lambda x: x >= 1000),
        "k": cvar(default=5, type=int, validate=is_positive),
        "tolerance": cvar(default=0.05, type=float, validate=is_positive),
    },
    "bench": {
        "sizes": cvar(default=[8, 32, 64], type=list, item=int, validate=all_positive),
        "conditions": cvar(
            default=[3.0], type=list, item=float, validate=lambda x: all(c >= 1 for c in x)
        ),
        "instances": cvar(default=100, type=int, validate=is_positive),
        "orders": cvar(default=[1, 4], type=list, item=int, validate=all_positive),
        "low": cvar(default=0.5, type=float, validate=is_positive),
    },
    "grad_check": {
        "instances": cvar(default=20, type=int, validate=is_positive),
        "h": cvar(default=1e-5, type=float, validate=is_positive),
        "tolerance": cvar(default=1e-5, type=float, validate=is_positive),
        "encoder_tolerance": cvar(default=1e-4, type=float, validate=is_positive),
        "entries": cvar(
            default=64,
            type=int,
            validate=is_positive,
            desc=description(
                """Parameters per group differentiated numerically in each
                end-to-end check."""
            ),
        ),
    },
    "probe": {
        "checkpoint": cvar(
            default=None,
            type=str,
            desc=description("Checkpoint evaluated by the probe subcommand."),
        ),
    },
    "output": {
        "dir": cvar(default="runs", type=str),
        "plots": cvar(default=False, type=bool),
        "timing": cvar(
            default=False,
            type=bool,
            desc=description(
                """Record wall-clock milliseconds in the metrics table. Left
                off, the column is zero and metrics files are byte-identical
                across repeated runs."""
            ),
        ),
    },
}
