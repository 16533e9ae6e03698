"""Command-line surface.

Subcommands: simulate, train, evaluate, sweep, correlate. Exit status 0 on
success, 1 with a machine-parsable ``error: ...`` line on failure, 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, default_config, load_config
from .core import (
    InputCondition,
    Window,
    condition_grid,
    parse_condition_label,
    slice_series,
)
from .readout import correlation_matrix, nrmse_percent, predict
from .runio import (
    config_digest,
    export_run,
    ingest_run,
    load_weights,
    save_weights,
    write_manifest,
    write_matrix_csv,
)
from .surrogate import simulate_grid
from .sweeps import (
    HARDWARE_NOTE,
    SweepSpec,
    all_profile_pairs,
    bending_conditions,
    multitask_grid,
    multitask_training_subsets,
    nested_bending_subsets,
    nested_payload_subsets,
    payload_conditions,
    sample_count_sweep,
    sensor_ablation_sweep,
    simulate_conditions,
    subset_sweep,
    tip_sensor_masks,
    train_on_subset,
)
from .tasks import TaskKind


def _subset_label(subset) -> str:
    return "+".join(c.label for c in subset)


def _parse_mask(text):
    if text is None:
        return None
    mask = []
    for token in text.split(","):
        token = token.strip().lower()
        if not token.startswith("s"):
            raise ValueError(f"sensor names look like s1..s7, got {token!r}")
        mask.append(int(token[1:]) - 1)
    return tuple(mask)


def _load(args) -> ExperimentConfig:
    cfg = default_config() if args.config is None else load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
        overrides["surrogate"] = dataclasses.replace(cfg.surrogate,
                                                     seed=args.seed)
    if args.ridge is not None:
        overrides["ridge"] = args.ridge
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg


def _say(args, text) -> None:
    if not args.quiet:
        print(text)


def cmd_simulate(args) -> int:
    cfg = _load(args)
    digest = config_digest(cfg)
    out = Path(args.out)
    t0 = time.perf_counter()
    runs = simulate_grid(cfg.surrogate, cfg.profiles, cfg.payloads, cfg.grid)
    written = []
    for cond, series in runs.items():
        path = export_run(series, out / "runs" / f"{cond.label}.csv",
                          config_hash=digest, seed=cfg.seed)
        written.append(str(path.relative_to(out)))
        written.append(str(path.with_suffix(".meta.json").relative_to(out)))
    write_manifest(
        out / "manifest.json", config_hash=digest, seed=cfg.seed,
        outputs=written, elapsed_seconds=time.perf_counter() - t0,
        extra={"command": "simulate", "n_runs": len(runs)},
    )
    _say(args, f"wrote {len(runs)} runs to {out / 'runs'}")
    return 0


def _training_weights(cfg: ExperimentConfig, task: TaskKind, subset,
                      runs, mask):
    if task is TaskKind.BENDING_ANGLE:
        window = cfg.train
    elif task is TaskKind.PAYLOAD_DETECT:
        window = Window(cfg.train.start, cfg.train.start + cfg.detection_seconds)
    else:
        window = Window(cfg.train.start,
                        cfg.train.start + cfg.mass_segment_seconds)
    return train_on_subset(subset, runs, cfg.payloads, task, window,
                           mask, cfg.ridge)


def cmd_train(args) -> int:
    cfg = _load(args)
    task = TaskKind(args.task)
    subset = tuple(parse_condition_label(t) for t in args.subset.split(","))
    mask = _parse_mask(args.mask)
    runs = simulate_conditions(
        cfg.surrogate, cfg.profiles, cfg.payloads, cfg.grid, subset
    )
    weights = _training_weights(cfg, task, subset, runs, mask)
    save_weights(
        args.out, weights,
        provenance={
            "task": task.value,
            "trained_on": [c.label for c in subset],
            "ridge": cfg.ridge,
            "config_hash": config_digest(cfg),
            "seed": cfg.seed,
        },
    )
    _say(args, f"wrote readout weights for task {task.value!r} to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _load(args)
    weights, provenance = load_weights(args.weights)
    series = ingest_run(args.run)
    window = {"train": cfg.train, "test": cfg.test,
              "full": Window(cfg.grid.t0, cfg.grid.t_end)}[args.window]
    mass = None
    if series.condition is not None:
        mass = cfg.payloads.mass_of(series.condition.payload_index)
    status = 0
    for k, name in enumerate(weights.task_names):
        out = predict(weights, series, window)
        trace = out if out.ndim == 1 else out[:, k]
        if name == TaskKind.BENDING_ANGLE.value:
            truth = slice_series(series, window).theta
            err = nrmse_percent(trace, truth, cfg.normalizer)
            print(f"task=bending nrmse_percent={err:.4f}")
        elif name == TaskKind.PAYLOAD_DETECT.value:
            verdict = "absent" if trace.mean() > 0 else "present"
            line = f"task=detect mean_output={trace.mean():.4f} verdict={verdict}"
            if mass is not None:
                truth = "present" if mass > 0 else "absent"
                line += f" truth={truth} correct={verdict == truth}"
            print(line)
        elif name == TaskKind.PAYLOAD_MASS.value:
            est = float(trace.mean())
            line = f"task=mass estimate_grams={est:.4f}"
            if mass is not None and mass > 0:
                line += f" truth_grams={mass:.1f} relative_error_percent={abs(est - mass) / mass * 100:.4f}"
            print(line)
        else:
            print(f"task={name} mean_output={trace.mean():.4f}")
    return status


def _sweep_conditions(cfg: ExperimentConfig, out: Path, digest: str) -> list:
    written = []
    bend_eval = bending_conditions(len(cfg.profiles))
    bend_runs = simulate_conditions(
        cfg.surrogate, cfg.profiles, cfg.payloads, cfg.grid, bend_eval
    )
    common = dict(train_window=cfg.train, test_window=cfg.test,
                  base_seed=cfg.seed, ridge=cfg.ridge,
                  normalizer=cfg.normalizer)

    spec = SweepSpec(task=TaskKind.BENDING_ANGLE,
                     subsets=nested_bending_subsets(),
                     evaluation=bend_eval, **common)
    res = subset_sweep(spec, bend_runs, cfg.payloads)
    written.append(write_matrix_csv(
        out / "bending_subsets.csv", res.error_grid,
        [_subset_label(s) for s in res.subsets],
        [c.label for c in res.evaluation],
        provenance={"config": digest, "seed": cfg.seed, "task": "bending"},
    ))

    spec = SweepSpec(task=TaskKind.BENDING_ANGLE,
                     subsets=all_profile_pairs(len(cfg.profiles)),
                     evaluation=bend_eval, **common)
    res = subset_sweep(spec, bend_runs, cfg.payloads)
    written.append(write_matrix_csv(
        out / "bending_pairs.csv", res.error_grid,
        [_subset_label(s) for s in res.subsets],
        [c.label for c in res.evaluation],
        provenance={"config": digest, "seed": cfg.seed, "task": "bending"},
    ))

    pay_eval = payload_conditions(len(cfg.payloads))[1:]
    pay_runs = simulate_conditions(
        cfg.surrogate, cfg.profiles, cfg.payloads, cfg.grid,
        payload_conditions(len(cfg.payloads)),
    )
    mass_window = int(round(cfg.mass_segment_seconds * cfg.grid.sample_rate))
    spec = SweepSpec(task=TaskKind.PAYLOAD_MASS,
                     subsets=nested_payload_subsets(),
                     evaluation=pay_eval,
                     samples_per_condition=mass_window, **common)
    res = subset_sweep(spec, pay_runs, cfg.payloads)
    written.append(write_matrix_csv(
        out / "payload_subsets.csv", res.error_grid,
        [_subset_label(s) for s in res.subsets],
        [c.label for c in res.evaluation],
        provenance={"config": digest, "seed": cfg.seed, "task": "mass"},
    ))
    return written


def _sweep_samples(cfg: ExperimentConfig, out: Path, digest: str) -> list:
    written = []
    jobs = (
        ("bending", TaskKind.BENDING_ANGLE,
         (InputCondition(1, 1), InputCondition(7, 1)),
         bending_conditions(len(cfg.profiles))),
        ("payload", TaskKind.PAYLOAD_MASS,
         tuple(InputCondition(1, j) for j in range(2, len(cfg.payloads) + 1)),
         payload_conditions(len(cfg.payloads))[1:]),
    )
    for name, task, subset, evaluation in jobs:
        res = sample_count_sweep(
            task, cfg.sample_counts, subset, evaluation,
            cfg.surrogate, cfg.profiles, cfg.payloads, cfg.grid,
            train_window=cfg.train, test_window=cfg.test,
            repeats=cfg.sample_repeats, base_seed=cfg.seed,
            ridge=cfg.ridge, normalizer=cfg.normalizer,
        )
        rows = [str(c) for c in res.counts]
        cols = [c.label for c in res.evaluation]
        prov = {"config": digest, "seed": cfg.seed, "task": name,
                "repeats": cfg.sample_repeats}
        written.append(write_matrix_csv(
            out / f"{name}_sample_counts_mean.csv", res.mean_grid, rows, cols,
            provenance=prov))
        written.append(write_matrix_csv(
            out / f"{name}_sample_counts_std.csv", res.std_grid, rows, cols,
            provenance=prov))
    return written


def _sweep_sensors(cfg: ExperimentConfig, out: Path, digest: str) -> list:
    written = []
    n = cfg.surrogate.n_nodes
    masks = (tuple(range(n)),) + tip_sensor_masks(n)
    sensor_cols = [f"s{k + 1}" for k in range(n)]

    bend_eval = bending_conditions(len(cfg.profiles))
    bend_runs = simulate_conditions(
        cfg.surrogate, cfg.profiles, cfg.payloads, cfg.grid, bend_eval
    )
    pay_all = payload_conditions(len(cfg.payloads))
    pay_runs = simulate_conditions(
        cfg.surrogate, cfg.profiles, cfg.payloads, cfg.grid, pay_all
    )
    mass_window = Window(cfg.train.start,
                         cfg.train.start + cfg.mass_segment_seconds)
    jobs = (
        ("bending", TaskKind.BENDING_ANGLE, bend_runs,
         (InputCondition(1, 1), InputCondition(7, 1)), bend_eval, cfg.train),
        ("payload", TaskKind.PAYLOAD_MASS, pay_runs,
         tuple(InputCondition(1, j) for j in range(2, len(cfg.payloads) + 1)),
         pay_all[1:], mass_window),
    )
    for name, task, runs, subset, evaluation, window in jobs:
        res = sensor_ablation_sweep(
            task, masks, subset, evaluation, runs, cfg.payloads,
            train_window=window, test_window=cfg.test,
            ridge=cfg.ridge, normalizer=cfg.normalizer,
        )
        rows = ["+".join(f"s{m + 1}" for m in mask) for mask in res.masks]
        prov = {"config": digest, "seed": cfg.seed, "task": name}
        written.append(write_matrix_csv(
            out / f"{name}_ablation.csv", res.error_grid, rows,
            [c.label for c in res.evaluation], provenance=prov))
        written.append(write_matrix_csv(
            out / f"{name}_weight_shares.csv", res.weight_shares, rows,
            sensor_cols, provenance=prov))
    return written


def _sweep_multitask(cfg: ExperimentConfig, out: Path, digest: str) -> list:
    written = []
    n_profiles = len(cfg.profiles)
    payloads = cfg.multitask_payloads
    grid_conditions = condition_grid(n_profiles, payloads)
    runs = simulate_conditions(
        cfg.surrogate, cfg.profiles, payloads, cfg.grid, grid_conditions
    )
    payload_cols = [f"{m:g}g" for m in payloads.masses]
    profile_rows = [f"P{i}" for i in range(1, n_profiles + 1)]
    summary = {}
    for name, cells in multitask_training_subsets(n_profiles, len(payloads)).items():
        res = multitask_grid(
            cells, runs, payloads, n_profiles=n_profiles,
            train_window=cfg.train, test_window=cfg.test,
            ridge=cfg.ridge, normalizer=cfg.normalizer,
        )
        prov = {"config": digest, "seed": cfg.seed, "training": name}
        for grid_name, grid_vals in (
            ("detect", res.detect_output),
            ("angle", res.angle_error),
            ("mass", res.mass_error),
        ):
            written.append(write_matrix_csv(
                out / f"multitask_{name}_{grid_name}.csv", grid_vals,
                profile_rows, payload_cols, provenance=prov))
        summary[name] = {
            "detection_perfect": res.detection_perfect,
            "step2_mean_percent": res.step2_mean,
        }
    written.append(write_matrix_csv(
        out / "multitask_summary.csv",
        np.array([[float(summary[k]["detection_perfect"]),
                   summary[k]["step2_mean_percent"]] for k in sorted(summary)]),
        sorted(summary), ["detection_perfect", "step2_mean_percent"],
        provenance={"config": digest, "seed": cfg.seed},
    ))
    return written


def cmd_sweep(args) -> int:
    cfg = _load(args)
    digest = config_digest(cfg)
    out = Path(args.out)
    t0 = time.perf_counter()
    runner = {
        "conditions": _sweep_conditions,
        "samples": _sweep_samples,
        "sensors": _sweep_sensors,
        "multitask": _sweep_multitask,
    }[args.kind]
    written = runner(cfg, out, digest)
    write_manifest(
        out / "manifest.json", config_hash=digest, seed=cfg.seed,
        outputs=[str(Path(p).relative_to(out)) for p in written],
        elapsed_seconds=time.perf_counter() - t0,
        extra={"command": f"sweep {args.kind}", "note": HARDWARE_NOTE},
    )
    _say(args, f"wrote {len(written)} result files to {out}")
    return 0


def cmd_correlate(args) -> int:
    cfg = _load(args)
    channel = args.channel.strip().lower()
    traces = []
    labels = []
    for path in args.runs:
        series = ingest_run(path)
        if channel == "s_in":
            trace = series.s_in
        else:
            idx = int(channel[1:]) - 1
            if not 0 <= idx < series.n_sensors:
                raise ValueError(
                    f"channel {args.channel!r} outside s1..s{series.n_sensors}"
                )
            trace = series.sensors[idx]
        start = Window(cfg.washout.end, series.grid.t_end)
        sub = slice_series(series, start)
        traces.append(
            sub.s_in if channel == "s_in" else sub.sensors[idx]
        )
        labels.append(
            series.condition.label if series.condition else Path(path).stem
        )
    corr = correlation_matrix(traces)
    if args.out is None:
        print("," + ",".join(labels))
        for label, row in zip(labels, corr):
            print(label + "," + ",".join(f"{v:.6f}" for v in row))
    else:
        write_matrix_csv(
            args.out, corr, labels, labels,
            provenance={"config": config_digest(cfg), "seed": cfg.seed,
                        "channel": channel},
        )
        _say(args, f"wrote correlation matrix to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None,
                        help="experiment config YAML (default: built-in)")
    common.add_argument("--seed", type=int, default=None,
                        help="override the run seed")
    common.add_argument("--ridge", type=float, default=None,
                        help="override the readout regularizer")
    common.add_argument("--quiet", action="store_true",
                        help="suppress progress chatter")

    parser = argparse.ArgumentParser(
        prog="armrc",
        description="Pneumatic-arm reservoir surrogate and readout toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common],
                       help="simulate the full condition grid to CSV runs")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", parents=[common],
                       help="train a readout on a condition subset")
    p.add_argument("--task", required=True,
                   choices=[t.value for t in TaskKind])
    p.add_argument("--subset", required=True,
                   help="comma list of conditions, e.g. P1,P7 or M2,M7")
    p.add_argument("--mask", default=None,
                   help="comma list of sensors to use, e.g. s5,s6,s7")
    p.add_argument("--out", required=True, help="weights JSON path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common],
                       help="score saved weights against a recorded run")
    p.add_argument("--weights", required=True)
    p.add_argument("--run", required=True)
    p.add_argument("--window", default="test",
                   choices=["train", "test", "full"])
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", parents=[common],
                       help="run a shipped experiment sweep")
    p.add_argument("kind",
                   choices=["conditions", "samples", "sensors", "multitask"])
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("correlate", parents=[common],
                       help="correlation matrix of one channel across runs")
    p.add_argument("--runs", nargs="+", required=True)
    p.add_argument("--channel", default="s7")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_correlate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
