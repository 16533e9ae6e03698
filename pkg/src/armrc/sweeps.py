"""Experiment sweep engine: condition-subset sweeps, training-sample-count
sweeps, sensor ablations with readout-weight shares, and the multi-task
grid with its two-step detect-then-predict pipeline.

All sweeps are deterministic for a fixed base seed; repeated runs vary only
the sensor-noise stream. Results carry their full provenance so the CSV
emitters can reproduce them byte-for-byte. Reported percentages follow the
normalizer convention in `readout.nrmse_percent`; the paper's hardware
percentages are ordering targets for these sweeps, not equality targets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import (
    InputCondition,
    PayloadSet,
    PressureStateSeries,
    TEST_WINDOW,
    TRAIN_WINDOW,
    TimeGrid,
    Window,
)
from .profiles import RampProfileSpec, generate_profile
from .readout import assemble, normalize_mask, nrmse_percent, predict, train
from .surrogate import SurrogateParams, simulate
from .tasks import (
    DETECT_ABSENT,
    DETECT_PRESENT,
    TaskKind,
    bending_target,
    estimate_mass,
)

HARDWARE_NOTE = (
    "percent errors are surrogate results; hardware-measured percentages "
    "are qualitative ordering targets only"
)


@dataclass(frozen=True)
class SweepSpec:
    """One subset-sweep request: which task, which training subsets, and
    which conditions to score."""

    task: TaskKind
    subsets: tuple
    evaluation: tuple
    train_window: Window = TRAIN_WINDOW
    test_window: Window = TEST_WINDOW
    sensor_mask: Optional[tuple] = None
    samples_per_condition: Optional[int] = None
    repeats: int = 1
    base_seed: int = 7
    ridge: float = 0.0
    normalizer: str = "range"

    def __post_init__(self) -> None:
        if len(self.evaluation) == 0:
            raise ValueError("evaluation set must be non-empty")
        if len(self.subsets) == 0:
            raise ValueError("need at least one training subset")
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")

    def effective_train_window(self, grid: TimeGrid) -> Window:
        if self.samples_per_condition is None:
            return self.train_window
        full = int(round(self.train_window.duration * grid.sample_rate))
        if self.samples_per_condition > full:
            raise ValueError(
                f"samples_per_condition {self.samples_per_condition} exceeds "
                f"the {full}-sample training window"
            )
        return Window(
            self.train_window.start,
            self.train_window.start + self.samples_per_condition / grid.sample_rate,
        )


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Grid of percent errors, one row per training subset."""

    error_grid: np.ndarray
    row_means: np.ndarray
    subsets: tuple
    evaluation: tuple
    provenance: dict

    def __post_init__(self) -> None:
        expected = self.error_grid.mean(axis=1)
        if not np.array_equal(expected, self.row_means):
            raise ValueError("row_means must equal recomputed row averages")


def _require(runs: Mapping, cond: InputCondition) -> PressureStateSeries:
    try:
        return runs[cond]
    except KeyError:
        raise KeyError(
            f"condition {cond.label} is not present in the simulated/loaded runs"
        ) from None


def _target_trace(task: TaskKind, series: PressureStateSeries,
                  payloads: PayloadSet) -> np.ndarray:
    if task is TaskKind.BENDING_ANGLE:
        return np.asarray(series.theta)
    if task is TaskKind.PAYLOAD_MASS:
        mass = payloads.mass_of(series.condition.payload_index)
        return np.full(series.grid.n_samples, mass)
    if task is TaskKind.PAYLOAD_DETECT:
        mass = payloads.mass_of(series.condition.payload_index)
        label = DETECT_ABSENT if mass == 0 else DETECT_PRESENT
        return np.full(series.grid.n_samples, label)
    raise ValueError(f"unsupported task {task}")


def _score(task: TaskKind, weights, series: PressureStateSeries,
           window: Window, payloads: PayloadSet, normalizer: str) -> float:
    if task is TaskKind.BENDING_ANGLE:
        pred = predict(weights, series, window)
        return nrmse_percent(pred, bending_target(series, window), normalizer)
    if task is TaskKind.PAYLOAD_MASS:
        mass = payloads.mass_of(series.condition.payload_index)
        if mass == 0:
            raise ValueError(
                f"relative mass error undefined for zero-payload condition "
                f"{series.condition.label}"
            )
        return abs(estimate_mass(weights, series, window) - mass) / mass * 100.0
    raise ValueError(f"unsupported evaluation task {task}")


def train_on_subset(
    subset: Sequence[InputCondition],
    runs: Mapping,
    payloads: PayloadSet,
    task: TaskKind,
    window: Window,
    sensor_mask=None,
    ridge: float = 0.0,
):
    """Assemble and train one readout from a condition subset."""
    data = []
    for cond in subset:
        series = _require(runs, cond)
        data.append((series, _target_trace(task, series, payloads)))
    return train(assemble(data, window, sensor_mask), ridge,
                 task_names=(task.value,))


def subset_sweep(spec: SweepSpec, runs: Mapping,
                 payloads: PayloadSet) -> SweepResult:
    """Train one readout per subset and score it on every evaluation
    condition's test window."""
    grid = _require(runs, spec.evaluation[0]).grid
    window = spec.effective_train_window(grid)
    rows = []
    for subset in spec.subsets:
        weights = train_on_subset(
            subset, runs, payloads, spec.task, window,
            spec.sensor_mask, spec.ridge,
        )
        rows.append([
            _score(spec.task, weights, _require(runs, cond), spec.test_window,
                   payloads, spec.normalizer)
            for cond in spec.evaluation
        ])
    error_grid = np.array(rows)
    return SweepResult(
        error_grid=error_grid,
        row_means=error_grid.mean(axis=1),
        subsets=tuple(tuple(s) for s in spec.subsets),
        evaluation=tuple(spec.evaluation),
        provenance={
            "task": spec.task.value,
            "train_window": (window.start, window.end),
            "test_window": (spec.test_window.start, spec.test_window.end),
            "sensor_mask": spec.sensor_mask,
            "ridge": spec.ridge,
            "base_seed": spec.base_seed,
            "normalizer": spec.normalizer,
            "note": HARDWARE_NOTE,
        },
    )


def simulate_conditions(
    params: SurrogateParams,
    profile_specs: Sequence[RampProfileSpec],
    payloads: PayloadSet,
    grid: TimeGrid,
    conditions: Sequence[InputCondition],
    seed: Optional[int] = None,
) -> dict:
    """Simulate just the listed conditions (deduplicated)."""
    runs = {}
    traces = {}
    for cond in conditions:
        if cond in runs:
            continue
        i = cond.profile_index
        if i not in traces:
            traces[i] = generate_profile(profile_specs[i - 1], grid)
        runs[cond] = simulate(
            params, traces[i], payloads.mass_of(cond.payload_index), grid,
            condition=cond, seed=seed,
        )
    return runs


@dataclass(frozen=True, eq=False)
class SampleCountResult:
    """Error statistics versus training-sample count (mean and std over
    noise-seed repeats)."""

    counts: tuple
    mean_grid: np.ndarray
    std_grid: np.ndarray
    evaluation: tuple
    provenance: dict


def sample_count_sweep(
    task: TaskKind,
    counts: Sequence[int],
    subset: Sequence[InputCondition],
    evaluation: Sequence[InputCondition],
    params: SurrogateParams,
    profile_specs: Sequence[RampProfileSpec],
    payloads: PayloadSet,
    grid: TimeGrid,
    train_window: Window = TRAIN_WINDOW,
    test_window: Window = TEST_WINDOW,
    repeats: int = 10,
    base_seed: Optional[int] = None,
    ridge: float = 0.0,
    normalizer: str = "range",
) -> SampleCountResult:
    """Truncate each condition's training rows to each count, retrain, and
    score on the fixed full test window; repeats vary only the noise seed."""
    full = int(round(train_window.duration * grid.sample_rate))
    counts = tuple(int(c) for c in counts)
    for c in counts:
        if not 1 <= c <= full:
            raise ValueError(
                f"sample count {c} outside the {full}-sample training window"
            )
    base_seed = params.seed if base_seed is None else base_seed
    needed = list(subset) + list(evaluation)
    errors = np.empty((len(counts), len(evaluation), repeats))
    for r in range(repeats):
        runs = simulate_conditions(
            params, profile_specs, payloads, grid, needed, seed=base_seed + r
        )
        for ci, count in enumerate(counts):
            window = Window(train_window.start,
                            train_window.start + count / grid.sample_rate)
            weights = train_on_subset(
                subset, runs, payloads, task, window, None, ridge
            )
            for ei, cond in enumerate(evaluation):
                errors[ci, ei, r] = _score(
                    task, weights, runs[cond], test_window, payloads, normalizer
                )
    return SampleCountResult(
        counts=counts,
        mean_grid=errors.mean(axis=2),
        std_grid=errors.std(axis=2),
        evaluation=tuple(evaluation),
        provenance={
            "task": task.value,
            "subset": tuple(c.label for c in subset),
            "repeats": repeats,
            "base_seed": base_seed,
            "ridge": ridge,
            "normalizer": normalizer,
            "note": HARDWARE_NOTE,
        },
    )


@dataclass(frozen=True, eq=False)
class AblationResult:
    """Per-mask errors and per-sensor absolute readout-weight shares."""

    masks: tuple
    error_grid: np.ndarray
    mean_errors: np.ndarray
    weight_shares: np.ndarray
    evaluation: tuple
    provenance: dict


def sensor_ablation_sweep(
    task: TaskKind,
    masks: Sequence[Sequence[int]],
    subset: Sequence[InputCondition],
    evaluation: Sequence[InputCondition],
    runs: Mapping,
    payloads: PayloadSet,
    train_window: Window = TRAIN_WINDOW,
    test_window: Window = TEST_WINDOW,
    ridge: float = 0.0,
    normalizer: str = "range",
) -> AblationResult:
    """Retrain with each sensor mask; report errors plus weight shares
    (absolute sensor weights normalized to 100% per mask, bias excluded)."""
    if len(masks) == 0:
        raise ValueError("need at least one sensor mask")
    n_sensors = _require(runs, evaluation[0]).n_sensors
    masks = tuple(normalize_mask(m, n_sensors) for m in masks)
    error_rows = []
    share_rows = np.full((len(masks), n_sensors), np.nan)
    for mi, mask in enumerate(masks):
        weights = train_on_subset(
            subset, runs, payloads, task, train_window, mask, ridge
        )
        error_rows.append([
            _score(task, weights, _require(runs, cond), test_window,
                   payloads, normalizer)
            for cond in evaluation
        ])
        mags = np.abs(weights.sensor_weights[:, 0])
        total = mags.sum()
        for k, sensor in enumerate(mask):
            share_rows[mi, sensor] = 100.0 * mags[k] / total if total > 0 else 0.0
    error_grid = np.array(error_rows)
    return AblationResult(
        masks=masks,
        error_grid=error_grid,
        mean_errors=error_grid.mean(axis=1),
        weight_shares=share_rows,
        evaluation=tuple(evaluation),
        provenance={
            "task": task.value,
            "subset": tuple(c.label for c in subset),
            "ridge": ridge,
            "normalizer": normalizer,
            "note": HARDWARE_NOTE,
        },
    )


@dataclass(frozen=True, eq=False)
class MultitaskGridResult:
    """Outcome of the stacked three-task readout on a full condition grid.

    Grids are (n_profiles, n_payloads). Cells skipped by the two-step rule
    (payload present in truth but detected absent) hold NaN in both step-2
    grids; zero-payload cells never receive a mass score.
    """

    detect_output: np.ndarray
    detect_correct: np.ndarray
    angle_error: np.ndarray
    mass_error: np.ndarray
    training_cells: tuple
    provenance: dict

    @property
    def detection_perfect(self) -> bool:
        return bool(self.detect_correct.all())

    @property
    def step2_mean(self) -> float:
        pool = np.concatenate([self.angle_error.ravel(), self.mass_error.ravel()])
        return float(np.nanmean(pool))


MULTITASK_TASK_NAMES = ("bending", "detect", "mass")


def multitask_grid(
    training_cells: Sequence[InputCondition],
    runs: Mapping,
    payloads: PayloadSet,
    n_profiles: int = 7,
    train_window: Window = TRAIN_WINDOW,
    test_window: Window = TEST_WINDOW,
    ridge: float = 0.0,
    normalizer: str = "range",
) -> MultitaskGridResult:
    """Train the stacked (angle, detect, mass) readout on the given cells
    and run the two-step pipeline over the whole grid.

    Step 1 classifies payload presence from the detect column's window
    mean. Step 2 (angle plus mass prediction) runs only where a payload is
    detected; zero-payload cells are scored on angle alone.
    """
    data = []
    for cond in training_cells:
        series = _require(runs, cond)
        mass = payloads.mass_of(cond.payload_index)
        target = np.column_stack([
            np.asarray(series.theta),
            np.full(series.grid.n_samples,
                    DETECT_ABSENT if mass == 0 else DETECT_PRESENT),
            np.full(series.grid.n_samples, mass),
        ])
        data.append((series, target))
    weights = train(assemble(data, train_window), ridge,
                    task_names=MULTITASK_TASK_NAMES)

    n_payloads = len(payloads)
    detect_output = np.empty((n_profiles, n_payloads))
    detect_correct = np.empty((n_profiles, n_payloads), dtype=bool)
    angle_error = np.full((n_profiles, n_payloads), np.nan)
    mass_error = np.full((n_profiles, n_payloads), np.nan)
    for i in range(1, n_profiles + 1):
        for j in range(1, n_payloads + 1):
            cond = InputCondition(i, j)
            series = _require(runs, cond)
            mass = payloads.mass_of(j)
            out = predict(weights, series, test_window)
            det = float(out[:, 1].mean())
            present = det <= 0
            detect_output[i - 1, j - 1] = det
            detect_correct[i - 1, j - 1] = present == (mass > 0)
            run_step2 = present and mass > 0
            if run_step2 or mass == 0:
                truth = bending_target(series, test_window)
                angle_error[i - 1, j - 1] = nrmse_percent(
                    out[:, 0], truth, normalizer
                )
            if run_step2:
                mass_error[i - 1, j - 1] = (
                    abs(float(out[:, 2].mean()) - mass) / mass * 100.0
                )
    return MultitaskGridResult(
        detect_output=detect_output,
        detect_correct=detect_correct,
        angle_error=angle_error,
        mass_error=mass_error,
        training_cells=tuple(training_cells),
        provenance={
            "training_cells": tuple(c.label for c in training_cells),
            "payloads": payloads.masses,
            "ridge": ridge,
            "normalizer": normalizer,
            "note": HARDWARE_NOTE,
        },
    )


# Shipped experiment families. Subset geometries marked "best effort" are
# reconstructions of grids that the source figures only mark graphically.

def bending_conditions(n_profiles: int = 7) -> tuple:
    return tuple(InputCondition(i, 1) for i in range(1, n_profiles + 1))


def payload_conditions(n_payloads: int = 7) -> tuple:
    return tuple(InputCondition(1, j) for j in range(1, n_payloads + 1))


def nested_bending_subsets() -> tuple:
    """Training families of size 1..7 over profiles (best effort)."""
    families = ((1,), (1, 7), (1, 4, 7), (1, 3, 5, 7), (1, 2, 4, 6, 7),
                (1, 2, 3, 5, 6, 7), (1, 2, 3, 4, 5, 6, 7))
    return tuple(
        tuple(InputCondition(i, 1) for i in fam) for fam in families
    )


def all_profile_pairs(n_profiles: int = 7) -> tuple:
    return tuple(
        (InputCondition(a, 1), InputCondition(b, 1))
        for a, b in itertools.combinations(range(1, n_profiles + 1), 2)
    )


def nested_payload_subsets() -> tuple:
    """Nested payload-index families of size 2..6 (non-zero payloads)."""
    families = ((2, 7), (2, 4, 7), (2, 4, 6, 7), (2, 3, 4, 6, 7),
                (2, 3, 4, 5, 6, 7))
    return tuple(
        tuple(InputCondition(1, j) for j in fam) for fam in families
    )


def tip_sensor_masks(n_sensors: int = 7, sizes=(6, 5, 4, 3, 2)) -> tuple:
    """Nested masks keeping the k tip-most sensors."""
    return tuple(tuple(range(n_sensors - k, n_sensors)) for k in sizes)


def multitask_training_subsets(n_profiles: int = 7,
                               n_payloads: int = 5) -> dict:
    """The three shipped multi-task training geometries (best effort)."""
    lo, mid, hi = 1, (n_profiles + 1) // 2, n_profiles
    jlo, jmid, jhi = 1, (n_payloads + 1) // 2, n_payloads
    return {
        "2x2": tuple(InputCondition(i, j)
                     for i in (lo, hi) for j in (jlo, jhi)),
        "5x2": tuple(InputCondition(i, j)
                     for i in (1, 2, 4, 6, 7) for j in (jlo, jhi)),
        "3x3": tuple(InputCondition(i, j)
                     for i in (lo, mid, hi) for j in (jlo, jmid, jhi)),
    }
