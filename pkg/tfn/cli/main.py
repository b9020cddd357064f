"""
Command-line entry point.

    tfn gen-data           --task T [--seed S] [--count N] --out data.jsonl
    tfn train              --config run.cfg [--out DIR]
    tfn eval               --checkpoint ckpt.json [--data data.jsonl]
    tfn check-equivariance (--checkpoint ckpt.json | --random-init --task T) [--trials N] [--tol X]
    tfn dump-radial        --checkpoint ckpt.json [--r-min A] [--r-max B] [--steps N] --out curves.csv
    tfn dump-cg            [--l-max L] --out cg.json

Exit codes: 0 success, 1 validation or usage error, 2 failed property check.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError

from shared.models.checkpoint import Checkpoint
from shared.models.report import EquivarianceReport, ReportBundle
from shared.models.sample import LabeledSample, TaskKind
from shared.utils.config import RunConfig, config_hash, get_settings, load_run_config, parse_run_config
from shared.utils.errors import ConfigError, TFNError
from shared.utils.io import read_json, read_jsonl, write_csv, write_json, write_jsonl
from shared.utils.logging import setup_logging
from tfn.autodiff import ParameterStore
from tfn.harness import (
    MUTATIONS,
    check_composition,
    check_group_composition,
    check_permutation,
    check_rotation,
    check_translation,
    layer_subjects,
    model_subject,
    mutate_model,
    task_subject,
)
from tfn.layers import TensorFieldNetwork, radial_eval
from tfn.so3 import Rotation, clebsch_gordan_table
from tfn.tasks import METRICS_SCHEMA, BaseTask, fit_scale, get_task, train

logger = logging.getLogger("tfn.cli")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PROPERTY_FAILED = 2

RADIAL_SCHEMA = "tfn.radial/1"


class UsageError(ConfigError):
    """Bad command-line usage."""


class ArgumentParser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; here that is a validation error (1)."""

    def error(self, message: str):
        raise UsageError(message)


# Helpers


def _task_from_checkpoint(checkpoint: Checkpoint) -> BaseTask:
    config = parse_run_config(checkpoint.config) if checkpoint.config else RunConfig(task=checkpoint.task)
    return get_task(checkpoint.task, config)


def _load_checkpoint(path: str) -> Tuple[BaseTask, TensorFieldNetwork, ParameterStore, Checkpoint]:
    checkpoint = read_json(path, Checkpoint)
    model, store = TensorFieldNetwork.from_checkpoint(checkpoint)
    return _task_from_checkpoint(checkpoint), model, store, checkpoint


def _print_json(payload) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True, default=float))


# Commands


def cmd_gen_data(args: argparse.Namespace) -> int:
    config = load_run_config(args.config, task=args.task, seed=args.seed) if args.config else parse_run_config(
        {"task": args.task, "seed": args.seed}
    )
    task = get_task(config.task, config)
    count = args.count if args.count is not None else task.default_count
    if count < 1:
        raise ConfigError(f"--count must be positive, got {count}")

    provenance = {
        "command": "gen-data",
        "config": config.model_dump(mode="json"),
        "count": count,
        "rotate": args.rotate,
        "translate": args.translate,
    }
    digest = config_hash(provenance)
    samples = task.generate(config.seed, count, rotate=args.rotate, translate=args.translate)
    samples = [sample.model_copy(update={"config_hash": digest}) for sample in samples]
    written = write_jsonl(args.out, samples)
    _print_json({"task": task.kind.value, "records": written, "out": str(args.out), "config_hash": digest})
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    config = load_run_config(args.config, seed=args.seed)
    task = get_task(config.task, config)
    out = Path(args.out or Path(config.output_dir) / f"{task.kind.value}-{task.config_hash}")

    result = train(task)
    test_metrics = task.evaluate(result.model, result.store, task.test_samples())
    checkpoint = result.checkpoint.model_copy(
        update={
            "metrics": {
                **result.checkpoint.metrics,
                **{f"test_{key}": value for key, value in test_metrics.items() if np.isfinite(value)},
            }
        }
    )
    write_json(out / "checkpoint.json", checkpoint)
    write_csv(out / "metrics.csv", result.metrics, task.config_hash, METRICS_SCHEMA)
    _print_json({"out": str(out), "config_hash": task.config_hash, "metrics": checkpoint.metrics})
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    task, model, store, _ = _load_checkpoint(args.checkpoint)
    if args.data:
        samples = read_jsonl(args.data, LabeledSample)
        kinds = {TaskKind(s.task) for s in samples}
        if kinds - {task.kind}:
            raise ConfigError(
                f"checkpoint is a {task.kind.value} model but the data holds {sorted(k.value for k in kinds)}"
            )
    else:
        samples = task.test_samples()
    if not samples:
        raise ConfigError("no samples to evaluate")
    metrics = task.evaluate(model, store, samples)
    _print_json({"task": task.kind.value, "samples": len(samples), "metrics": metrics})
    return EXIT_OK


def _equivariance_inputs(task: BaseTask, seed: int):
    sample = task.generate(seed, 1, rotate=True, translate=True)[0]
    return task.encode(sample)


def _run_checks(
    task: BaseTask,
    model: TensorFieldNetwork,
    store: ParameterStore,
    trials: int,
    tol: Optional[float],
    seed: int,
    identity: bool,
) -> List[EquivarianceReport]:
    cloud, features = _equivariance_inputs(task, seed)
    kwargs = {"trials": trials, "seed": seed}
    tolerance = {} if tol is None else {"tol": tol}
    rotation_extra, translation_extra, permutation_extra = {}, {}, {}
    if identity:
        rotation_extra = {"rotations": [Rotation.identity()] * trials}
        translation_extra = {"shifts": [np.zeros(3)] * trials}
        permutation_extra = {"permutations": [np.arange(cloud.num_points)] * trials}

    network = model_subject(model, store)
    readout = task_subject(task, model, store)
    reports = []
    for subject in (network, readout):
        reports.append(check_rotation(subject, cloud, features, **kwargs, **tolerance, **rotation_extra))
        reports.append(check_translation(subject, cloud, features, **kwargs, **tolerance, **translation_extra))
        if subject is network or task.permutable:
            reports.append(check_permutation(subject, cloud, features, **kwargs, **tolerance, **permutation_extra))
    if not identity:
        if len(model.layers) >= 2:
            reports.append(check_composition(layer_subjects(model, store), cloud, features, **kwargs, **tolerance))
        reports.append(check_group_composition(network, cloud, features, **kwargs, **tolerance))
    return reports


def cmd_check_equivariance(args: argparse.Namespace) -> int:
    if args.checkpoint:
        task, model, store, checkpoint = _load_checkpoint(args.checkpoint)
        digest = checkpoint.config_hash
    else:
        if not args.task and not args.config:
            raise UsageError("--random-init needs --task or --config")
        config = load_run_config(args.config, task=args.task) if args.config else parse_run_config({"task": args.task})
        task = get_task(config.task, config)
        model = task.build_model()
        store = model.init_parameters(args.seed)
        digest = task.config_hash

    if args.mutate:
        model, store = mutate_model(model, store, args.mutate, seed=args.seed)

    reports = _run_checks(task, model, store, args.trials, args.tol, args.seed, args.identity)
    bundle = ReportBundle(config_hash=digest, subject=model.name, reports=reports)
    if args.out:
        write_json(args.out, bundle)

    table = pd.DataFrame(bundle.summary())
    print(table.to_string(index=False))
    if bundle.passed:
        logger.info(f"All {len(reports)} equivariance checks passed for {model.name}")
        return EXIT_OK
    failed = [r.family for r in reports if not r.passed]
    logger.error(f"Equivariance checks failed for {model.name}: {failed}")
    return EXIT_PROPERTY_FAILED


def radial_table(
    task: BaseTask, model: TensorFieldNetwork, store: ParameterStore, r: np.ndarray
) -> pd.DataFrame:
    """
    Learned radial outputs per (convolution, key, channel) and, where the
    task defines them, the analytic curves and the relative error after one
    global scale fit over ``r``.
    """
    columns: Dict[str, np.ndarray] = {"r": r}
    analytic = task.analytic_radials()
    convolutions = model.radial_nets()
    for layer, net in convolutions:
        prefix = "" if len(convolutions) == 1 else f"{layer.name}_"
        for key in net.blocks:
            learned = radial_eval(net, store, r, key=key)
            for channel in range(learned.shape[-1]):
                columns[f"learned_{prefix}{key}_c{channel}"] = learned[:, channel]
            if len(convolutions) != 1 or key not in analytic:
                continue
            with np.errstate(divide="ignore", invalid="ignore"):
                exact = np.asarray(analytic[key](r), dtype=np.float64)
            usable = np.isfinite(exact) & (exact != 0.0)
            curve = learned[:, 0]
            scale = fit_scale(curve[usable], exact[usable]) if usable.any() else float("nan")
            columns[f"analytic_{key}"] = exact
            with np.errstate(divide="ignore", invalid="ignore"):
                columns[f"rel_error_{key}"] = np.where(usable, np.abs(scale * curve - exact) / np.abs(exact), np.nan)
            logger.info(f"{key}: fitted scale {scale:.6g}")
    return pd.DataFrame(columns)


def cmd_dump_radial(args: argparse.Namespace) -> int:
    task, model, store, checkpoint = _load_checkpoint(args.checkpoint)
    if not model.radial_nets():
        raise ConfigError(f"{model.name} has no convolution layers")
    default_min, default_max = task.recovery_range() if task.analytic_radials() else (
        task.config.radial_min,
        task.config.radial_max,
    )
    r_min = default_min if args.r_min is None else args.r_min
    r_max = default_max if args.r_max is None else args.r_max
    if args.steps < 1 or r_min < 0 or r_max < r_min:
        raise ConfigError(f"invalid radial range [{r_min}, {r_max}] with {args.steps} steps")

    table = radial_table(task, model, store, np.linspace(r_min, r_max, args.steps))
    write_csv(args.out, table, checkpoint.config_hash, RADIAL_SCHEMA)
    _print_json({"out": str(args.out), "rows": len(table), "columns": list(table.columns)})
    return EXIT_OK


def cmd_dump_cg(args: argparse.Namespace) -> int:
    if args.l_max < 0:
        raise ConfigError(f"--l-max must be non-negative, got {args.l_max}")
    dump = clebsch_gordan_table(args.l_max).dump()
    dump = dump.model_copy(update={"config_hash": config_hash({"command": "dump-cg", "l_max": args.l_max})})
    write_json(args.out, dump)
    _print_json({"out": str(args.out), "records": len(dump.records)})
    return EXIT_OK


# Parser


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="tfn", description="Tensor field networks: data, training and equivariance checks")
    parser.add_argument("--log-level", default=None, help="Override TFN_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)
    tasks = [kind.value for kind in TaskKind]

    gen = sub.add_parser("gen-data", help="Write a JSON-lines dataset")
    gen.add_argument("--task", required=True, choices=tasks)
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--count", type=int, default=None)
    gen.add_argument("--out", required=True)
    gen.add_argument("--rotate", action="store_true", help="Randomly rotate shapes (tetris, missing-point)")
    gen.add_argument("--translate", action="store_true", help="Randomly translate shapes (tetris, missing-point)")
    gen.add_argument("--config", default=None)
    gen.set_defaults(handler=cmd_gen_data)

    tr = sub.add_parser("train", help="Train a model and write checkpoint + metrics")
    tr.add_argument("--config", required=True)
    tr.add_argument("--out", default=None)
    tr.add_argument("--seed", type=int, default=None)
    tr.set_defaults(handler=cmd_train)

    ev = sub.add_parser("eval", help="Evaluate a checkpoint")
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--data", default=None)
    ev.set_defaults(handler=cmd_eval)

    eq = sub.add_parser("check-equivariance", help="Rotation, translation and permutation checks")
    source = eq.add_mutually_exclusive_group(required=True)
    source.add_argument("--checkpoint")
    source.add_argument("--random-init", action="store_true")
    eq.add_argument("--task", choices=tasks)
    eq.add_argument("--config", default=None)
    eq.add_argument("--trials", type=int, default=50)
    eq.add_argument("--tol", type=float, default=None)
    eq.add_argument("--seed", type=int, default=0)
    eq.add_argument("--mutate", nargs="?", const="m_dependent", choices=sorted(MUTATIONS), default=None)
    eq.add_argument("--identity", action="store_true", help="Use identity transforms only")
    eq.add_argument("--out", default=None)
    eq.set_defaults(handler=cmd_check_equivariance)

    rad = sub.add_parser("dump-radial", help="Write learned and analytic radial curves as CSV")
    rad.add_argument("--checkpoint", required=True)
    rad.add_argument("--r-min", type=float, default=None)
    rad.add_argument("--r-max", type=float, default=None)
    rad.add_argument("--steps", type=int, default=200)
    rad.add_argument("--out", required=True)
    rad.set_defaults(handler=cmd_dump_radial)

    cg = sub.add_parser("dump-cg", help="Write the real Clebsch-Gordan table as JSON")
    cg.add_argument("--l-max", type=int, default=2)
    cg.add_argument("--out", required=True)
    cg.set_defaults(handler=cmd_dump_cg)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    settings = get_settings()
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"tfn: error: {e}", file=sys.stderr)
        return EXIT_INVALID

    level = args.log_level or settings.log_level
    for namespace in ("tfn", "shared"):
        setup_logging(namespace, level=level, format_type=settings.log_format, log_file=settings.log_file)

    try:
        return args.handler(args)
    except (TFNError, ValidationError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_INVALID
    except OSError as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
