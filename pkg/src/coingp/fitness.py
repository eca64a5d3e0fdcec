"""Scoring predictors and turning raw tree outputs into pixel intensities.

The pipeline for a tree over a batch of windows is always the same: evaluate,
clip the raw outputs into [0, 255], fit (or apply) a linear output scaling,
and compare against the targets by root-mean-square error. The scaling is the
closed-form least-squares line from outputs to targets; it is fitted once on
the training windows and the same two coefficients are reused verbatim when
the tree predicts unseen pixels.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .gp.trees import Node, evaluate
from .neighborhood import SampleSet

VARIANCE_FLOOR = 1e-12


class ScalingCoefficients(NamedTuple):
    """Linear map ``scaled = intercept + slope * output``."""

    intercept: float
    slope: float


IDENTITY_SCALING = ScalingCoefficients(intercept=0.0, slope=1.0)


def clipped_outputs(tree: Node, columns: np.ndarray) -> np.ndarray:
    """Raw tree outputs over (k, n) columns, clipped into [0, 255]."""
    return np.clip(evaluate(tree, columns), 0.0, 255.0)


def fit_scaling(targets: np.ndarray, outputs: np.ndarray) -> ScalingCoefficients:
    """Least-squares line mapping outputs onto targets.

    slope = cov(targets, outputs) / var(outputs) and the intercept matches
    the means. When the outputs are (numerically) constant the line would be
    ill-defined, so the scaling collapses to the constant predictor: the
    target mean with slope 0.
    """
    t = np.asarray(targets, dtype=np.float64)
    o = np.asarray(outputs, dtype=np.float64)
    if t.shape != o.shape or t.ndim != 1 or t.size == 0:
        raise ValueError(f"need matching non-empty 1-D arrays, got {t.shape} and {o.shape}")
    mean_t = float(t.mean())
    mean_o = float(o.mean())
    centered = o - mean_o
    var_o = float(centered @ centered) / o.size
    if var_o < VARIANCE_FLOOR:
        return ScalingCoefficients(intercept=mean_t, slope=0.0)
    cov = float((t - mean_t) @ centered) / o.size
    slope = cov / var_o
    return ScalingCoefficients(intercept=mean_t - slope * mean_o, slope=slope)


def apply_scaling(scaling: ScalingCoefficients, outputs: np.ndarray) -> np.ndarray:
    return scaling.intercept + scaling.slope * np.asarray(outputs, dtype=np.float64)


def rmse(expected: np.ndarray, actual: np.ndarray) -> float:
    """Plain root-mean-square error between two equal-length vectors."""
    e = np.asarray(expected, dtype=np.float64)
    a = np.asarray(actual, dtype=np.float64)
    if e.shape != a.shape or e.ndim != 1 or e.size == 0:
        raise ValueError(f"need matching non-empty 1-D arrays, got {e.shape} and {a.shape}")
    d = e - a
    return float(np.sqrt((d @ d) / d.size))


def fitness_on_columns(
    tree: Node,
    columns: np.ndarray,
    targets: np.ndarray,
) -> tuple[float, ScalingCoefficients]:
    """Fitness of a tree against pre-transposed (k, n) inputs.

    Fits the output scaling on these very windows and returns the RMSE of the
    scaled outputs together with the fitted coefficients. Lower is better.
    """
    outputs = clipped_outputs(tree, columns)
    scaling = fit_scaling(targets, outputs)
    return rmse(targets, apply_scaling(scaling, outputs)), scaling


def rmse_fitness(tree: Node, samples: SampleSet) -> tuple[float, ScalingCoefficients]:
    """Fitness of a tree on a sample set; see ``fitness_on_columns``."""
    if len(samples) == 0:
        raise ValueError("cannot score a tree on an empty sample set")
    columns = np.ascontiguousarray(samples.inputs.T)
    return fitness_on_columns(tree, columns, samples.targets)


def round_half_away_from_zero(x: np.ndarray) -> np.ndarray:
    """Round to nearest with .5 moving away from zero (not banker's rounding)."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0.0, np.floor(x + 0.5), np.ceil(x - 0.5))


def predict_batch(
    tree: Node,
    scaling: ScalingCoefficients,
    columns: np.ndarray,
) -> np.ndarray:
    """Predicted intensities for (k, n) inputs under frozen coefficients.

    Clips the raw outputs, applies the scaling fitted at training time,
    rounds half away from zero, and clips again into [0, 255]. Returns an
    (n,) uint8 array.
    """
    scaled = apply_scaling(scaling, clipped_outputs(tree, columns))
    return np.clip(round_half_away_from_zero(scaled), 0.0, 255.0).astype(np.uint8)


def predict_pixel(tree: Node, scaling: ScalingCoefficients, inputs) -> int:
    """Predicted intensity for one window's frontier values."""
    col = np.asarray(inputs, dtype=np.float64).reshape(-1, 1)
    return int(predict_batch(tree, scaling, col)[0])
