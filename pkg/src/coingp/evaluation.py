"""Baselines, reconstruction, test scoring, and multi-run experiments.

An experiment fixes one damaged image and one topology, evolves a predictor
``n_runs`` times with consecutive seeds, and scores each winner on the
held-back missing pixels. The report also carries the two parameter-free
baselines (replace each missing pixel by the plain average of its Moore or
Von Neumann frontier), computed on the very same damage, so every run can be
compared against them.

``emit_report`` turns a report into files: a reconstructed PGM and an
amplified error PGM per run, a per-run CSV, a histogram CSV of the RMSE
distributions with the baselines as annotated rows, a JSON summary, and two
rendered figures.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .damage import DamagedImage, Topology, apply_damage, generate_column_damage
from .fitness import (
    ScalingCoefficients,
    predict_batch,
    rmse,
    round_half_away_from_zero,
)
from .gp.evolution import EvolutionParams, evolve
from .gp.trees import Node, parse_sexpr, to_sexpr
from .imagery import GrayImage, diff_image, write_pgm
from .neighborhood import TestSet, build_test_set, build_training_set


@dataclass(frozen=True)
class RunResult:
    """Outcome of one evolution run plus its held-back score."""

    run_index: int
    seed: int
    topology: Topology
    best_tree: str
    scaling: ScalingCoefficients
    training_rmse: float
    test_rmse: float
    generations_history: tuple[float, ...]
    wall_time: float

    def __post_init__(self):
        for label, value in (("training", self.training_rmse), ("test", self.test_rmse)):
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{label} RMSE must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class DamageParams:
    """How to damage an image before an experiment."""

    per_column: int
    seed: int = 0


@dataclass(frozen=True)
class DamageSummary:
    removed: int
    total_pixels: int
    percent: float


@dataclass(frozen=True)
class ExperimentReport:
    """All runs of one experiment plus the baselines they compete against."""

    runs: tuple[RunResult, ...]
    baseline_rmse_moore: float
    baseline_rmse_von_neumann: float
    image_id: str
    damage_summary: DamageSummary

    def __post_init__(self):
        if not self.runs:
            raise ValueError("a report needs at least one run")
        topologies = {r.topology for r in self.runs}
        if len(topologies) != 1:
            raise ValueError("all runs in a report must share one topology")

    @property
    def topology(self) -> Topology:
        return self.runs[0].topology


def baseline_average_predict(inputs) -> int:
    """Predict one pixel as the rounded mean of its frontier intensities."""
    values = np.asarray(inputs, dtype=np.float64)
    if values.size == 0:
        raise ValueError("cannot average an empty frontier")
    rounded = round_half_away_from_zero(np.asarray([values.mean()]))[0]
    return int(np.clip(rounded, 0.0, 255.0))


def _baseline_predictions(test: TestSet) -> np.ndarray:
    means = test.inputs.mean(axis=1)
    return np.clip(round_half_away_from_zero(means), 0.0, 255.0)


def baseline_rmse(test: TestSet) -> float:
    """RMSE of the frontier-average predictor over a test set."""
    if len(test) == 0:
        raise ValueError("cannot score the baseline on an empty test set")
    return rmse(test.targets, _baseline_predictions(test))


def test_rmse(tree: Node, scaling: ScalingCoefficients, test: TestSet) -> float:
    """RMSE of the tree's rounded predictions against the held-back truth."""
    if len(test) == 0:
        raise ValueError("cannot score a tree on an empty test set")
    columns = np.ascontiguousarray(test.inputs.T)
    predictions = predict_batch(tree, scaling, columns).astype(np.float64)
    return rmse(test.targets, predictions)


def reconstruct(
    damaged: DamagedImage,
    tree: Node,
    scaling: ScalingCoefficients,
    topology: Topology,
) -> GrayImage:
    """Fill every missing pixel with the tree's prediction over its frontier.

    Available pixels are copied verbatim; only coordinates in the missing set
    change. With an empty missing set the input image comes back unchanged.
    """
    pixels = damaged.image.pixels.copy()
    if len(damaged.missing) == 0:
        return GrayImage(pixels)
    test = build_test_set(damaged, topology)
    columns = np.ascontiguousarray(test.inputs.T)
    predictions = predict_batch(tree, scaling, columns)
    rows = np.asarray([c.row for c in test.centers], dtype=np.intp)
    cols = np.asarray([c.col for c in test.centers], dtype=np.intp)
    pixels[rows, cols] = predictions
    return GrayImage(pixels)


def single_run(
    damaged: DamagedImage,
    params: EvolutionParams,
    seed: int,
    run_index: int,
) -> RunResult:
    """Train once with the given seed and score on the missing pixels."""
    params = dataclasses.replace(params, seed=seed)
    training = build_training_set(damaged, params.topology)
    test = build_test_set(damaged, params.topology)
    started = time.perf_counter()
    evolved = evolve(training, params)
    wall = time.perf_counter() - started
    return RunResult(
        run_index=run_index,
        seed=seed,
        topology=params.topology,
        best_tree=to_sexpr(evolved.tree),
        scaling=evolved.scaling,
        training_rmse=evolved.fitness,
        test_rmse=test_rmse(evolved.tree, evolved.scaling, test),
        generations_history=evolved.history,
        wall_time=wall,
    )


def _run_task(task: tuple[DamagedImage, EvolutionParams, int, int]) -> RunResult:
    damaged, params, seed, run_index = task
    return single_run(damaged, params, seed, run_index)


def damage_summary_of(damaged: DamagedImage) -> DamageSummary:
    total = damaged.image.width * damaged.image.height
    removed = len(damaged.missing)
    return DamageSummary(
        removed=removed,
        total_pixels=total,
        percent=100.0 * removed / total,
    )


def experiment_on_damaged(
    damaged: DamagedImage,
    evolution_params: EvolutionParams,
    n_runs: int,
    base_seed: int,
    image_id: str,
    jobs: int = 1,
) -> ExperimentReport:
    """Run ``n_runs`` seeded evolutions against one shared damaged image.

    Run k uses seed ``base_seed + k``. Runs are independent, so ``jobs`` > 1
    fans them out across processes; results are assembled in run order either
    way, so the report does not depend on scheduling.
    """
    if n_runs < 1:
        raise ValueError(f"need at least one run, got {n_runs}")
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    tasks = [
        (damaged, evolution_params, base_seed + k, k) for k in range(n_runs)
    ]
    if jobs == 1 or n_runs == 1:
        runs = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, n_runs)) as pool:
            runs = list(pool.map(_run_task, tasks))
    return ExperimentReport(
        runs=tuple(runs),
        baseline_rmse_moore=baseline_rmse(build_test_set(damaged, Topology.MOORE)),
        baseline_rmse_von_neumann=baseline_rmse(
            build_test_set(damaged, Topology.VON_NEUMANN)
        ),
        image_id=image_id,
        damage_summary=damage_summary_of(damaged),
    )


def run_experiment(
    image: GrayImage,
    damage_params: DamageParams,
    evolution_params: EvolutionParams,
    n_runs: int,
    base_seed: int,
    image_id: str = "image",
    jobs: int = 1,
) -> ExperimentReport:
    """Damage a pristine image once, then run the full experiment on it."""
    rng = np.random.default_rng(damage_params.seed)
    missing = generate_column_damage(
        image.width, image.height, damage_params.per_column, rng
    )
    damaged = apply_damage(image, missing)
    return experiment_on_damaged(
        damaged, evolution_params, n_runs, base_seed, image_id, jobs=jobs
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _histogram_csv(report: ExperimentReport, bin_width: float) -> str:
    """Bins over both RMSE distributions plus one annotated row per baseline."""
    if bin_width <= 0:
        raise ValueError(f"bin width must be positive, got {bin_width}")
    test_vals = np.asarray([r.test_rmse for r in report.runs])
    train_vals = np.asarray([r.training_rmse for r in report.runs])
    combined = np.concatenate([test_vals, train_vals])
    lo = math.floor(combined.min() / bin_width) * bin_width
    n_bins = max(1, math.ceil((combined.max() - lo) / bin_width - 1e-9))
    edges = lo + np.arange(n_bins + 1) * bin_width
    test_counts, _ = np.histogram(test_vals, bins=edges)
    train_counts, _ = np.histogram(train_vals, bins=edges)
    lines = ["kind,bin_low,bin_high,test_count,training_count,label,value"]
    for i in range(n_bins):
        lines.append(
            f"bin,{_fmt(edges[i])},{_fmt(edges[i + 1])},"
            f"{int(test_counts[i])},{int(train_counts[i])},,"
        )
    lines.append(f"baseline,,,,,moore_baseline,{_fmt(report.baseline_rmse_moore)}")
    lines.append(
        f"baseline,,,,,von_neumann_baseline,{_fmt(report.baseline_rmse_von_neumann)}"
    )
    return "\n".join(lines) + "\n"


def _runs_csv(report: ExperimentReport) -> str:
    lines = ["run,seed,training_rmse,test_rmse"]
    for r in report.runs:
        lines.append(
            f"{r.run_index},{r.seed},{_fmt(r.training_rmse)},{_fmt(r.test_rmse)}"
        )
    return "\n".join(lines) + "\n"


def _summary_payload(report: ExperimentReport) -> dict:
    test_vals = [r.test_rmse for r in report.runs]
    train_vals = [r.training_rmse for r in report.runs]
    return {
        "image_id": report.image_id,
        "topology": report.topology.value,
        "runs": [
            {
                "run": r.run_index,
                "seed": r.seed,
                "training_rmse": r.training_rmse,
                "test_rmse": r.test_rmse,
                "best_tree": r.best_tree,
                "scaling": {"a": r.scaling.intercept, "b": r.scaling.slope},
            }
            for r in report.runs
        ],
        "test_rmse": {
            "median": statistics.median(test_vals),
            "min": min(test_vals),
            "max": max(test_vals),
        },
        "training_rmse": {
            "median": statistics.median(train_vals),
            "min": min(train_vals),
            "max": max(train_vals),
        },
        "baseline_rmse": {
            "moore": report.baseline_rmse_moore,
            "von_neumann": report.baseline_rmse_von_neumann,
        },
        "damage": {
            "removed": report.damage_summary.removed,
            "total_pixels": report.damage_summary.total_pixels,
            "percent": report.damage_summary.percent,
        },
    }


def emit_report(
    report: ExperimentReport,
    damaged: DamagedImage,
    out_dir: str | os.PathLike,
    bin_width: float = 0.1,
    render_figures: bool = True,
) -> list[Path]:
    """Write every artifact for a report into ``out_dir``; returns the paths.

    Per run: the reconstructed image and a 10x amplified error image, both
    PGM. Per report: the runs CSV, the histogram CSV, the JSON summary, and
    (unless disabled) the rendered histogram and convergence figures.
    Deliberately no timestamps anywhere, so identical reports produce
    identical bytes.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = f"{report.image_id}_{report.topology.value}"
    n_vars = report.topology.frontier_size
    written: list[Path] = []

    for r in report.runs:
        tree = parse_sexpr(r.best_tree, n_vars=n_vars)
        restored = reconstruct(damaged, tree, r.scaling, report.topology)
        recon_path = out / f"{base}_recon_run{r.run_index}.pgm"
        write_pgm(recon_path, restored)
        written.append(recon_path)
        diff_path = out / f"{base}_diff_run{r.run_index}.pgm"
        write_pgm(diff_path, diff_image(damaged.image, restored, gain=10))
        written.append(diff_path)

    runs_path = out / f"{base}_runs.csv"
    runs_path.write_text(_runs_csv(report), encoding="ascii")
    written.append(runs_path)

    hist_path = out / f"{base}_hist.csv"
    hist_path.write_text(_histogram_csv(report, bin_width), encoding="ascii")
    written.append(hist_path)

    summary_path = out / f"{base}_summary.json"
    summary_path.write_text(
        json.dumps(_summary_payload(report), sort_keys=True, indent=2) + "\n",
        encoding="ascii",
    )
    written.append(summary_path)

    if render_figures:
        from . import figures

        written.extend(figures.render_report_figures(report, out))
    return written
