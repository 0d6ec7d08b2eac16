"""
This submodule contains the runners behind each command line subcommand. Every
run gets its own folder (named from the configuration hash) holding the
resolved configuration, a debug log and the run's artifacts.

Notes
------

    * Seeds: the dataset uses the configuration seed directly; network
      initialisation and the training stream (shuffling and augmentation) are
      independent children of :code:`SeedSequence(seed)`.
    * Ablation variants run sequentially on identical data.
"""
import json
import time
import datetime
import logging
from pathlib import Path
import numpy as np
import pandas as pd
from tqdm import tqdm

from pyrolite.util.log import ToLogger
from pyrolite.util.multip import combine_choices

from ..errors import ConfigError, MMIError
from ..embedstats import EmbeddingBatch, normalize_batch
from ..evalkit import collapse_metrics, knn_accuracy, linear_probe, split_indices
from ..ggd import (
    JointGgdSpec,
    dispersion_to_covariance,
    ggd_sample,
    mi_closed_form,
    mi_invariance_check,
    mi_knn_estimate,
    quadratic_form,
    radial_moment,
    random_joint_dispersion,
)
from ..loss import LossVariant, RescaleState, exact_loss_states, logdet_taylor, rescale
from ..matrixcore import SymMatrix, logdet_exact, random_spd
from ..siamese import EncoderState, encode, fit, load_checkpoint, save_checkpoint
from ..siamese.network import MlpSpec
from ..siamese.train import batches_per_epoch
from ..synthdata import augment_batch, load_dataset_csv, make_dataset
from ..tables import MetricsRecorder, write_metrics
from ..util.gradcheck import encoder_grad_check, loss_grad_check

from .naming import array_hash, config_hash, run_name
from .org import make_runfolder, run_log

logging.getLogger(__name__).addHandler(logging.NullHandler())
logger = logging.getLogger(__name__)

BENCH_TOLERANCE = 8e-5  # per dimension, p=4 and beta=5
SAMPLER_MOMENT_RTOL = 0.02
SAMPLER_COVARIANCE_RTOL = 0.05
SCALAR_CORRELATION = 0.8
SCALAR_TOLERANCE = 0.02
GRAD_CHECK_BATCH = 16
ABLATION_FULL_MIN = 0.90
ABLATION_NOBOTH_MAX = 0.35
GRAD_CHECK_DIM = 8


def _write_json(path, d):
    with open(str(path), "w") as f:
        f.write(json.dumps(d, indent=2, sort_keys=True))
    return Path(path)


def _open_run(kind, config, out=None):
    indir = Path(out) if out is not None else Path(config["output"]["dir"])
    return make_runfolder(run_name(kind, config.tree), indir=indir, config=config.to_dict())


def seed_streams(seed, n=2):
    """Independent generators spawned from one seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def load_data(config):
    """
    Samples, labels and the hash of the sample bytes for a configuration,
    read from `dataset.csv` when set and synthesised otherwise.

    Returns
    --------
    :class:`tuple`
    """
    csv = config["dataset"]["csv"]
    if csv is not None:
        samples, labels, _ = load_dataset_csv(csv)
    else:
        samples, labels = make_dataset(config.dataset_spec())
    samples = np.ascontiguousarray(samples, dtype=float)
    return samples, labels, array_hash(samples)


def train_encoder(config, samples, recorder=None):
    """
    Train an encoder as described by `config` on `samples`.

    Parameters
    -----------
    config : :class:`~mmissl.config.ExperimentConfig`
    samples : :class:`numpy.ndarray`
        Dataset rows.
    recorder : :class:`~mmissl.tables.MetricsRecorder`, :code:`None`
        Receives one row per optimizer update.

    Returns
    --------
    :class:`tuple`
        Final :class:`~mmissl.siamese.train.EncoderState`, tracking states and
        the :class:`~mmissl.siamese.train.TrainConfig` used.
    """
    accum = config["train"]["grad_accum_steps"]
    n_batches = batches_per_epoch(samples.shape[0], config.train_config())
    steps_per_epoch = n_batches // accum
    if steps_per_epoch < 1:
        raise ConfigError(
            "{} batches per epoch cannot fill {} accumulation steps.".format(
                n_batches, accum
            )
        )
    if n_batches % accum:
        logger.warning(
            "{} batches per epoch is not a multiple of grad_accum_steps={}; "
            "accumulation carries across epochs.".format(n_batches, accum)
        )
    cfg = config.train_config(
        steps_per_epoch=steps_per_epoch, batches_per_epoch=n_batches
    )
    init_rng, train_rng = seed_streams(config.seed)
    state = EncoderState.create(
        config.mlp_spec(samples.shape[1]), init_rng, momentum_encoder=cfg.momentum_encoder
    )
    logger.info(
        "Training {} for {} epochs ({} updates).".format(
            cfg.variant.value, cfg.epochs, cfg.total_steps
        )
    )
    state, states = fit(
        state, samples, config.augment_spec(), cfg, train_rng, on_step=recorder
    )
    return state, states, cfg


def evaluate_encoder(config, state, samples, labels):
    """
    Linear probe, k-NN accuracy (on the same split) and collapse diagnostics of
    the encoder's embeddings of the whole dataset.

    Returns
    --------
    :class:`dict`
    """
    ev = config["eval"]
    embeddings = encode(state, samples)
    probe = linear_probe(
        embeddings,
        labels,
        split_ratio=ev["split_ratio"],
        reg=ev["probe_reg"],
        seed=config.seed,
        steps=ev["probe_steps"],
        lr=ev["probe_lr"],
    )
    train, test = split_indices(samples.shape[0], ev["split_ratio"], config.seed)
    rows, labels = embeddings.data.T, np.asarray(labels)
    knn = knn_accuracy(
        rows[train], labels[train], rows[test], labels[test], k=min(ev["knn_k"], train.size)
    )
    collapse = collapse_metrics(embeddings)
    logger.info(
        "Probe top-1 {:.3f}, k-NN {:.3f}, effective rank {:.2f}{}.".format(
            probe.top1,
            knn,
            collapse.effective_rank,
            ["", " (collapsed)"][collapse.collapsed],
        )
    )
    return dict(probe=probe.to_dict(), knn_top1=knn, collapse=collapse.to_dict())


def _plots(folder, frame):
    from ..vis import plot_loss_curves, plot_tracked_extremes, save_svg

    save_svg(plot_loss_curves(frame), folder / "loss_curves.svg")
    save_svg(plot_tracked_extremes(frame), folder / "tracked_extremes.svg")


def run_train(config, out=None):
    """
    Train an encoder, then write `metrics.csv`, `encoder.ckpt` (with its JSON
    sidecar) and `report.json` to the run folder.

    Parameters
    -----------
    config : :class:`~mmissl.config.ExperimentConfig`
    out : :class:`str` | :class:`pathlib.Path`, :code:`None`
        Base directory; `output.dir` when omitted.

    Returns
    --------
    :class:`pathlib.Path`
        Run folder.
    """
    folder = _open_run("train", config, out)
    with run_log(folder):
        started = time.time()
        samples, labels, data_hash = load_data(config)
        logger.info("Dataset {} ({} samples).".format(data_hash, samples.shape[0]))
        recorder = MetricsRecorder(timing=config["output"]["timing"])
        try:
            state, _, cfg = train_encoder(config, samples, recorder)
        finally:
            write_metrics(folder / "metrics.csv", recorder.rows)
        save_checkpoint(folder / "encoder.ckpt", state, cfg)
        report = evaluate_encoder(config, state, samples, labels)
        report.update(
            variant=cfg.variant.value,
            dataset_hash=data_hash,
            config_hash=config_hash(config.tree),
            steps=state.step,
            final_loss=recorder.rows[-1].loss_total if recorder.rows else None,
        )
        _write_json(folder / "report.json", report)
        if config["output"]["plots"]:
            _plots(folder, recorder.to_frame())
        logger.info(
            "Training run finished after {}.".format(
                datetime.timedelta(seconds=round(time.time() - started))
            )
        )
    return folder


def sweep_overrides(sweep):
    """
    Expand the ablation sweep into a list of dotted-key override dictionaries.
    A list value in an entry is a set of choices; scalars are fixed.
    """
    expanded = []
    for entry in sweep or [{}]:
        if not entry:
            grid = [{}]
        else:
            choices = {k: v if isinstance(v, list) else [v] for k, v in entry.items()}
            grid = combine_choices(choices)
        for overrides in grid:
            if overrides not in expanded:
                expanded.append(overrides)
    return expanded


def ablation_criteria(
    runs, full_min=ABLATION_FULL_MIN, noboth_max=ABLATION_NOBOTH_MAX
):
    """
    Compare the unswept ablation runs against the expected ordering: Full
    learns, NoBoth collapses to chance and the single-view variants land in
    between. A clause whose variants did not run is :code:`None`.

    Parameters
    -----------
    runs : :class:`list` of :class:`dict`
        Records written by :func:`run_ablate`.
    full_min : :class:`float`
        Lowest accepted Full top-1.
    noboth_max : :class:`float`
        Highest accepted NoBoth top-1.

    Returns
    --------
    :class:`dict`
    """
    base = {r["variant"]: r for r in runs if not r["overrides"]}

    def top1(variant):
        r = base[variant]
        return None if r["failed"] else r["probe"]["top1"]

    def finite(variant):
        r = base[variant]
        return (not r["failed"]) and r["final_loss"] is not None and bool(
            np.isfinite(r["final_loss"])
        )

    single = [v for v in ("NoLogdetZ", "NoLogdetZprime") if v in base]
    checks = dict(
        full_top1=None,
        noboth_top1=None,
        noboth_collapsed=None,
        single_view_finite=all(finite(v) for v in single) if single else None,
        single_view_between=None,
    )
    if "Full" in base:
        checks["full_top1"] = top1("Full") is not None and top1("Full") >= full_min
    if "NoBoth" in base:
        low = top1("NoBoth")
        checks["noboth_top1"] = low is not None and low <= noboth_max
        checks["noboth_collapsed"] = (not base["NoBoth"]["failed"]) and bool(
            base["NoBoth"]["collapse"]["collapsed"]
        )
    if single and "Full" in base and "NoBoth" in base:
        low, high = top1("NoBoth"), top1("Full")
        checks["single_view_between"] = (
            low is not None
            and high is not None
            and all(top1(v) is not None and low < top1(v) < high for v in single)
        )
    evaluated = [v for v in checks.values() if v is not None]
    checks["passed"] = bool(evaluated) and all(evaluated)
    return checks


def run_ablate(config, out=None):
    """
    Train and evaluate every configured loss variant (for each sweep entry) on
    the same dataset and write `ablation.json`. A variant which fails is
    recorded and the remaining variants still run.

    Returns
    --------
    :class:`pathlib.Path`
        Run folder.
    """
    folder = _open_run("ablate", config, out)
    with run_log(folder):
        samples, labels, data_hash = load_data(config)
        jobs = []
        for overrides in sweep_overrides(config["ablate"]["sweep"]):
            for variant in config["ablate"]["variants"]:
                sub = config.with_overrides(dict(overrides, **{"train.variant": variant}))
                jobs.append((overrides, variant, sub))
        logger.info("Starting {} ablation runs.".format(len(jobs)))

        runs, failed = [], []
        for ix, (overrides, variant, sub) in enumerate(
            tqdm(jobs, file=ToLogger(logger), mininterval=2)
        ):
            tag = "{:02d}-{}".format(ix, variant)
            record = dict(variant=variant, overrides=overrides, dataset_hash=data_hash)
            recorder = MetricsRecorder(timing=config["output"]["timing"])
            try:
                state, _, _ = train_encoder(sub, samples, recorder)
                record.update(evaluate_encoder(sub, state, samples, labels))
                record.update(failed=False, error=None)
            except MMIError as err:
                logger.warning("Errored @ {}: {}".format(tag, err))
                record.update(failed=True, error="{}: {}".format(type(err).__name__, err))
                failed.append(tag)
            finally:
                write_metrics(folder / "metrics_{}.csv".format(tag), recorder.rows)
            record["final_loss"] = recorder.rows[-1].loss_total if recorder.rows else None
            runs.append(record)

        summary = pd.DataFrame(
            [
                dict(
                    variant=r["variant"],
                    overrides=json.dumps(r["overrides"], sort_keys=True),
                    top1=r["probe"]["top1"] if not r["failed"] else np.nan,
                    knn=r["knn_top1"] if not r["failed"] else np.nan,
                    collapsed=r["collapse"]["collapsed"] if not r["failed"] else None,
                )
                for r in runs
            ]
        )
        logger.info("Ablation summary:\n{}".format(summary.to_string(index=False)))
        if failed:
            logger.warning("Some variants errored:")
            for f in failed:
                logger.warning(f)
        criteria = ablation_criteria(runs)
        for clause, ok in criteria.items():
            if ok is False and clause != "passed":
                logger.warning("Ablation ordering not met: {}.".format(clause))
        _write_json(
            folder / "ablation.json",
            dict(dataset_hash=data_hash, runs=runs, criteria=criteria),
        )
    return folder


def _gaussian_pair(r, count, rng):
    dispersion = SymMatrix(np.array([[1.0, r], [r, 1.0]]))
    spec = JointGgdSpec(1, dispersion, shape=1.0)
    return spec, spec.split(ggd_sample(spec, count, rng))


def _mi_case(spec, samples, k, tolerance):
    z, zp = spec.split(samples)
    closed = mi_closed_form(spec)
    estimate = mi_knn_estimate(z, zp, k=k)
    return dict(
        d=spec.d,
        shape=spec.shape,
        closed_form=closed,
        estimate=estimate,
        gap=abs(estimate - closed),
        passed=bool(abs(estimate - closed) <= tolerance),
    )


def _sampler_case(spec, samples):
    n = 2 * spec.d
    moment = float(np.mean(quadratic_form(spec.joint, samples) ** spec.shape))
    expected = radial_moment(n, spec.shape)
    cov = np.cov(samples.T, bias=True).reshape(n, n)
    target = dispersion_to_covariance(spec.joint).entries
    cov_err = float(np.max(np.abs(cov - target)) / np.max(np.abs(target)))
    moment_err = abs(moment - expected) / expected
    return dict(
        radial_moment=moment,
        radial_moment_expected=expected,
        radial_moment_rel_error=moment_err,
        covariance_rel_error=cov_err,
        passed=bool(
            moment_err <= SAMPLER_MOMENT_RTOL and cov_err <= SAMPLER_COVARIANCE_RTOL
        ),
    )


def run_mi_validate(config, out=None):
    """
    Check the closed-form mutual information against KSG estimates over a grid
    of block dimensions and shapes, the sampler's radial moment and covariance,
    and the invariance of the estimate under monotone maps. Writes
    `mi_validate.json`.

    Returns
    --------
    :class:`pathlib.Path`
        Run folder.
    """
    mv = config["mi_validate"]
    folder = _open_run("mi-validate", config, out)
    with run_log(folder):
        disp_rng, sample_rng, check_rng = seed_streams(config.seed, 3)
        dispersions = {
            d: [
                random_joint_dispersion(d, disp_rng, coupling=mv["coupling"])
                for _ in range(mv["joints"])
            ]
            for d in mv["dims"]
        }
        grid = combine_choices({"d": mv["dims"], "shape": mv["shapes"]})
        cases = []
        for item in tqdm(grid, file=ToLogger(logger), mininterval=2):
            d, shape = int(item["d"]), float(item["shape"])
            for j, disp in enumerate(dispersions[d]):
                spec = JointGgdSpec(d, disp, shape=shape)
                samples = ggd_sample(spec, mv["samples"], sample_rng)
                case = _mi_case(spec, samples, mv["k"], mv["tolerance"])
                case.update(joint=j, sampler=_sampler_case(spec, samples))
                cases.append(case)

        invariant = {}
        for case in cases:
            invariant.setdefault((case["d"], case["joint"]), set()).add(case["closed_form"])
        shape_invariance = all(len(v) == 1 for v in invariant.values())

        spec, (z, zp) = _gaussian_pair(SCALAR_CORRELATION, mv["samples"], check_rng)
        scalar = _mi_case(spec, np.hstack([z, zp]), mv["k"], SCALAR_TOLERANCE)
        indep_spec = JointGgdSpec(1, SymMatrix.identity(2), shape=1.0)
        indep_samples = ggd_sample(indep_spec, mv["samples"], check_rng)
        independent = _mi_case(indep_spec, indep_samples, mv["k"], SCALAR_TOLERANCE)

        _, (z, zp) = _gaussian_pair(SCALAR_CORRELATION, mv["invariance_samples"], check_rng)
        before, after = mi_invariance_check(z, zp, np.tanh, lambda x: x ** 3 + x, k=mv["k"])
        invariance = dict(
            before=before,
            after=after,
            gap=abs(before - after),
            passed=bool(abs(before - after) <= mv["tolerance"]),
        )

        report = dict(
            cases=cases,
            closed_form_shape_invariant=shape_invariance,
            scalar_example=scalar,
            independent_blocks=independent,
            invariance=invariance,
            passed=bool(
                all(c["passed"] and c["sampler"]["passed"] for c in cases)
                and shape_invariance
                and scalar["passed"]
                and independent["passed"]
                and invariance["passed"]
            ),
        )
        n_pass = sum(c["passed"] for c in cases)
        logger.info("{}/{} estimator cases within tolerance.".format(n_pass, len(cases)))
        for c in cases:
            if not c["passed"]:
                logger.warning(
                    "d={} shape={} joint={}: gap {:.4f}.".format(
                        c["d"], c["shape"], c["joint"], c["gap"]
                    )
                )
        _write_json(folder / "mi_validate.json", report)
    return folder


def logdet_bench_rows(sizes, conditions, orders, instances, low, rescale_cfg, rng, timing=True):
    """
    Exact against truncated-series log-determinants of rescaled random SPD
    matrices with spectra in `[low, low * condition]`.

    Returns
    --------
    :class:`pandas.DataFrame`
    """
    rows = []
    for size in sizes:
        for cond in conditions:
            for instance in range(instances):
                m = random_spd(size, rng, low=low, high=low * cond)
                mtilde = rescale(m, RescaleState.exact(m), rescale_cfg)
                t0 = time.perf_counter()
                exact = logdet_exact(mtilde)
                exact_ms = 1000.0 * (time.perf_counter() - t0)
                for order in orders:
                    t0 = time.perf_counter()
                    approx = logdet_taylor(mtilde, order)
                    taylor_ms = 1000.0 * (time.perf_counter() - t0)
                    err = abs(approx - exact)
                    rows.append(
                        dict(
                            size=size,
                            condition=cond,
                            instance=instance,
                            order=order,
                            exact=exact,
                            taylor=approx,
                            abs_error=err,
                            rel_error=err / abs(exact) if exact != 0 else err,
                            bound=size * BENCH_TOLERANCE,
                            within_bound=bool(err <= size * BENCH_TOLERANCE),
                            exact_ms=exact_ms if timing else 0.0,
                            taylor_ms=taylor_ms if timing else 0.0,
                        )
                    )
    return pd.DataFrame(rows)


def run_logdet_bench(config, out=None):
    """
    Accuracy and speed of the truncated log-determinant against the exact
    Cholesky value; writes `logdet_bench.csv`.

    Returns
    --------
    :class:`pathlib.Path`
        Run folder.
    """
    bench = config["bench"]
    folder = _open_run("logdet-bench", config, out)
    with run_log(folder):
        (rng,) = seed_streams(config.seed, 1)
        df = logdet_bench_rows(
            bench["sizes"],
            bench["conditions"],
            bench["orders"],
            bench["instances"],
            bench["low"],
            config.rescale_config(),
            rng,
        )
        df.to_csv(str(folder / "logdet_bench.csv"), index=False, sep=",", decimal=".")
        summary = df.groupby(["size", "order"])[["abs_error", "exact_ms", "taylor_ms"]].max()
        logger.info("Worst cases per size and order:\n{}".format(summary.to_string()))
    return folder


def run_grad_check(config, out=None):
    """
    Finite-difference checks of the loss gradients (every variant) and of the
    end-to-end encoder gradients; writes `grad_check.csv`.

    Returns
    --------
    :class:`pathlib.Path`
        Run folder.
    """
    gc = config["grad_check"]
    folder = _open_run("grad-check", config, out)
    with run_log(folder):
        rng, data_rng = seed_streams(config.seed, 2)
        rescale_cfg = config.rescale_config()
        rows = []
        for instance in tqdm(range(gc["instances"]), file=ToLogger(logger), mininterval=2):
            a = rng.standard_normal((GRAD_CHECK_DIM, GRAD_CHECK_BATCH))
            b = 0.8 * a + 0.6 * rng.standard_normal(a.shape)
            z, zp = normalize_batch(EmbeddingBatch(a)), normalize_batch(EmbeddingBatch(b))
            states = exact_loss_states(z, zp, rescale_cfg)
            for variant in LossVariant:
                err_z, err_zp = loss_grad_check(z, zp, states, rescale_cfg, variant, h=gc["h"])
                rows.append(
                    dict(
                        instance=instance,
                        level="loss",
                        target=variant.value,
                        rel_error=max(err_z, err_zp),
                        tolerance=gc["tolerance"],
                        passed=bool(max(err_z, err_zp) <= gc["tolerance"]),
                    )
                )

            samples, _ = make_dataset(config.dataset_spec(), rng=data_rng)
            samples = samples[: GRAD_CHECK_BATCH]
            x, xp = augment_batch(samples, config.augment_spec(), data_rng)
            spec = MlpSpec(
                (samples.shape[1], 2 * GRAD_CHECK_DIM, GRAD_CHECK_DIM),
                batchnorm=config["network"]["batchnorm"],
            )
            momentum = config["network"]["momentum_encoder"]
            state = EncoderState.create(spec, rng, momentum_encoder=momentum)
            cfg = config.train_config()
            errors = encoder_grad_check(
                state, x, xp, cfg, h=gc["h"], entries=gc["entries"], rng=rng
            )
            for group, err in errors.items():
                rows.append(
                    dict(
                        instance=instance,
                        level="encoder",
                        target=group,
                        rel_error=err,
                        tolerance=gc["encoder_tolerance"],
                        passed=bool(err <= gc["encoder_tolerance"]),
                    )
                )
        df = pd.DataFrame(rows)
        df.to_csv(str(folder / "grad_check.csv"), index=False, sep=",", decimal=".")
        worst = df.groupby(["level", "target"])["rel_error"].max()
        logger.info("Worst relative errors:\n{}".format(worst.to_string()))
        if not df["passed"].all():
            logger.warning("{} checks exceeded tolerance.".format(int((~df["passed"]).sum())))
    return folder


def run_probe(config, out=None):
    """
    Evaluate the checkpoint named by `probe.checkpoint` on the configured
    dataset; writes `probe.json`.

    Returns
    --------
    :class:`pathlib.Path`
        Run folder.
    """
    checkpoint = config["probe"]["checkpoint"]
    if checkpoint is None:
        raise ConfigError("probe.checkpoint must name a checkpoint file.")
    if not Path(checkpoint).exists():
        raise ConfigError("Checkpoint {} not found.".format(checkpoint))
    folder = _open_run("probe", config, out)
    with run_log(folder):
        state, cfg = load_checkpoint(checkpoint)
        samples, labels, data_hash = load_data(config)
        report = evaluate_encoder(config, state, samples, labels)
        report.update(
            checkpoint=str(checkpoint),
            steps=state.step,
            dataset_hash=data_hash,
            variant=cfg.variant.value if cfg is not None else None,
        )
        _write_json(folder / "probe.json", report)
    return folder
