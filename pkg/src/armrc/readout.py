"""Linear readout training and scoring.

Training solves w = pinv([1 | S]) y per task column: a rank-revealing
minimum-norm least-squares fit with a relative singular-value cutoff, or a
ridge solution when a regularizer is given. Predictions are per-sample
weighted sums of the masked sensor readings plus a bias.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import PressureStateSeries, Window, slice_series, window_indices

# Relative singular-value cutoff for the minimum-norm pseudoinverse path.
# A bare pseudoinverse is ill-posed on noisy, near-collinear sensor data.
RCOND = 1e-10


def _full_mask(n_sensors: int) -> tuple:
    return tuple(range(n_sensors))


def normalize_mask(mask: Optional[Sequence[int]], n_sensors: int) -> tuple:
    """Validate a 0-based sensor index mask; None selects all sensors."""
    if mask is None:
        return _full_mask(n_sensors)
    mask = tuple(int(m) for m in mask)
    if len(mask) == 0:
        raise ValueError("sensor mask must select at least one sensor")
    if len(set(mask)) != len(mask):
        raise ValueError(f"sensor mask has duplicates: {mask}")
    if any(not 0 <= m < n_sensors for m in mask):
        raise ValueError(f"sensor mask {mask} outside 0..{n_sensors - 1}")
    return mask


@dataclass(frozen=True, eq=False)
class TrainingAssembly:
    """Stacked design matrix [1 | S(t)] and matching targets.

    Rows concatenate the chosen conditions' training windows in list order;
    the first column is the all-ones bias regressor.
    """

    states: np.ndarray
    targets: np.ndarray
    condition_ids: tuple
    sensor_mask: tuple

    def __post_init__(self) -> None:
        if self.states.ndim != 2 or self.targets.ndim != 2:
            raise ValueError("states and targets must be 2-D")
        if self.states.shape[0] != self.targets.shape[0]:
            raise ValueError(
                f"row mismatch: {self.states.shape[0]} state rows vs "
                f"{self.targets.shape[0]} target rows"
            )

    @property
    def n_tasks(self) -> int:
        return self.targets.shape[1]


@dataclass(frozen=True, eq=False)
class ReadoutWeights:
    """Bias plus per-sensor weights, one column per task."""

    weights: np.ndarray
    sensor_mask: tuple
    task_names: tuple = ()

    def __post_init__(self) -> None:
        if self.weights.ndim != 2:
            raise ValueError("weights must be 2-D (1 + n_sensors, n_tasks)")
        if self.weights.shape[0] != 1 + len(self.sensor_mask):
            raise ValueError(
                f"{self.weights.shape[0]} weight rows for "
                f"{len(self.sensor_mask)} masked sensors"
            )
        if not self.task_names:
            object.__setattr__(
                self,
                "task_names",
                tuple(f"task{k}" for k in range(self.weights.shape[1])),
            )
        elif len(self.task_names) != self.weights.shape[1]:
            raise ValueError("one task name required per weight column")

    @property
    def bias(self) -> np.ndarray:
        return self.weights[0]

    @property
    def sensor_weights(self) -> np.ndarray:
        return self.weights[1:]

    @property
    def n_tasks(self) -> int:
        return self.weights.shape[1]


def assemble(
    condition_data: Sequence,
    window: Window,
    sensor_mask: Optional[Sequence[int]] = None,
) -> TrainingAssembly:
    """Stack (series, target trace) pairs over one training window.

    Each target trace shares its series' clock; the window slices both. A
    1-D target contributes one task column, a 2-D one several.
    """
    if len(condition_data) == 0:
        raise ValueError("need at least one condition to assemble")
    blocks = []
    target_blocks = []
    ids = []
    mask = None
    n_sensors = None
    n_tasks = None
    for series, target in condition_data:
        if n_sensors is None:
            n_sensors = series.n_sensors
            mask = normalize_mask(sensor_mask, n_sensors)
        elif series.n_sensors != n_sensors:
            raise ValueError(
                f"conditions disagree on sensor count: {series.n_sensors} vs "
                f"{n_sensors}"
            )
        target = np.asarray(target, dtype=float)
        if target.ndim == 1:
            target = target[:, None]
        if target.shape[0] != series.grid.n_samples:
            raise ValueError(
                f"target length {target.shape[0]} does not match series "
                f"length {series.grid.n_samples}"
            )
        if n_tasks is None:
            n_tasks = target.shape[1]
        elif target.shape[1] != n_tasks:
            raise ValueError("conditions disagree on target column count")
        i0, i1 = window_indices(series.grid, window)
        rows = series.sensors[list(mask), i0:i1].T
        blocks.append(np.hstack([np.ones((rows.shape[0], 1)), rows]))
        target_blocks.append(target[i0:i1])
        ids.append(series.condition)
    return TrainingAssembly(
        states=np.vstack(blocks),
        targets=np.vstack(target_blocks),
        condition_ids=tuple(ids),
        sensor_mask=mask,
    )


def train(
    assembly: TrainingAssembly,
    ridge: float = 0.0,
    task_names: Sequence[str] = (),
) -> ReadoutWeights:
    """Fit readout weights for every target column.

    ridge == 0 uses the minimum-norm pseudoinverse with singular values
    below RCOND * sigma_max dropped; ridge > 0 solves the standard
    regularized normal equations. Columns are solved one at a time so
    multi-task training is bit-identical to task-by-task training.
    """
    if ridge < 0:
        raise ValueError(f"ridge must be >= 0, got {ridge}")
    if assembly.states.shape[0] == 0:
        raise ValueError("cannot train on an empty assembly")
    phi = assembly.states
    y = assembly.targets
    if ridge == 0.0:
        u, s, vt = np.linalg.svd(phi, full_matrices=False)
        keep = s > (RCOND * s[0] if s.size and s[0] > 0 else np.inf)
        s_inv = np.zeros_like(s)
        s_inv[keep] = 1.0 / s[keep]
        pinv = (vt.T * s_inv) @ u.T
        cols = [pinv @ y[:, k] for k in range(y.shape[1])]
    else:
        gram = phi.T @ phi + ridge * np.eye(phi.shape[1])
        cols = [np.linalg.solve(gram, phi.T @ y[:, k]) for k in range(y.shape[1])]
    return ReadoutWeights(
        weights=np.column_stack(cols),
        sensor_mask=assembly.sensor_mask,
        task_names=tuple(task_names),
    )


def predict(
    weights: ReadoutWeights,
    series: PressureStateSeries,
    window: Optional[Window] = None,
    sensor_mask: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """Per-sample readout output over a window, one trace per task.

    Returns shape (n_samples,) for a single task, else (n_samples, n_tasks).
    The mask, when given, must match the training mask.
    """
    if sensor_mask is not None:
        mask = normalize_mask(sensor_mask, series.n_sensors)
        if mask != weights.sensor_mask:
            raise ValueError(
                f"sensor mask {mask} does not match training mask "
                f"{weights.sensor_mask}"
            )
    if max(weights.sensor_mask) >= series.n_sensors:
        raise ValueError(
            f"weights trained on sensors {weights.sensor_mask} cannot read a "
            f"{series.n_sensors}-sensor series"
        )
    sub = series if window is None else slice_series(series, window)
    rows = sub.sensors[list(weights.sensor_mask), :].T
    out = weights.bias + rows @ weights.sensor_weights
    return out[:, 0] if weights.n_tasks == 1 else out


def rmse(pred: np.ndarray, truth: np.ndarray) -> float:
    """Root mean squared error between two equal-length traces."""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {truth.shape}")
    if pred.size == 0:
        raise ValueError("rmse undefined for empty traces")
    return float(np.sqrt(np.mean((pred - truth) ** 2)))


def nrmse_percent(pred: np.ndarray, truth: np.ndarray,
                  normalizer: str = "range") -> float:
    """RMSE as a percentage of the ground-truth scale.

    normalizer "range" divides by max(truth) - min(truth) over the
    evaluation window, "maxabs" by max |truth|. The choice is a reporting
    convention; both are exposed because percent errors depend on it.
    """
    truth = np.asarray(truth, dtype=float)
    if normalizer == "range":
        scale = float(truth.max() - truth.min()) if truth.size else 0.0
    elif normalizer == "maxabs":
        scale = float(np.abs(truth).max()) if truth.size else 0.0
    else:
        raise ValueError(f"unknown normalizer {normalizer!r}")
    if scale == 0.0:
        raise ValueError("ground-truth scale is zero; percent error undefined")
    return 100.0 * rmse(pred, truth) / scale


def averaged_error(errors: Sequence[float]) -> float:
    """Arithmetic mean of per-condition errors (the e_avg of a sweep row)."""
    if len(errors) == 0:
        raise ValueError("cannot average an empty error list")
    return float(np.mean(errors))


def correlation_matrix(traces: Sequence[np.ndarray]) -> np.ndarray:
    """Pearson correlation matrix of equal-length traces.

    Zero-variance traces correlate 0 with everything (with a warning)
    rather than propagating NaN; the diagonal is always 1.
    """
    arr = np.asarray(traces, dtype=float)
    if arr.ndim != 2:
        raise ValueError("traces must be a list of equal-length 1-D arrays")
    if arr.shape[1] < 2:
        raise ValueError("need at least two samples per trace")
    centered = arr - arr.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(centered, axis=1)
    degenerate = norms == 0
    if degenerate.any():
        warnings.warn(
            "zero-variance trace(s) in correlation matrix; entries set to 0",
            stacklevel=2,
        )
    safe = np.where(degenerate, 1.0, norms)
    unit = centered / safe[:, None]
    corr = unit @ unit.T
    corr[degenerate, :] = 0.0
    corr[:, degenerate] = 0.0
    np.fill_diagonal(corr, 1.0)
    return np.clip(corr, -1.0, 1.0)
