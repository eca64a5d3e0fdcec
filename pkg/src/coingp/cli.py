"""Command line front end: damage, train, reconstruct, evaluate, experiment.

Values resolve in a fixed order: an explicit flag wins, then a key in the
optional ``--config`` file (flat ``key=value`` lines, same names as the long
flags), then the ``COINGP_SEED`` environment variable (seed only), then the
built-in default. Every subcommand prints its fully resolved configuration
before doing any work, so a run can be reproduced from its own output.

Exit codes: 0 success, 2 usage errors, 3 validation errors, 4 I/O errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .damage import (
    MissingSet,
    Topology,
    apply_damage,
    generate_column_damage,
    mask_to_csv,
    mask_to_pgm,
    read_mask,
    validate_separation,
)
from .evaluation import (
    baseline_rmse,
    emit_report,
    experiment_on_damaged,
    reconstruct,
    test_rmse,
)
from .gp.evolution import EvolutionParams, evolve
from .imagery import GrayImage, diff_image, read_pgm, write_pgm
from .neighborhood import build_test_set, build_training_set
from .treefile import TreeFile, read_tree, write_tree


class UsageError(Exception):
    """A required value is missing after flag/config/default resolution."""


def _default_seed() -> int:
    raw = os.environ.get("COINGP_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"COINGP_SEED must be an integer, got {raw!r}") from None


def _read_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            values[key.strip()] = value.strip()
    return values


class _Resolver:
    """Applies the flag > config > default precedence, key by key."""

    def __init__(self, config: dict[str, str], config_path: str | None):
        self._config = config
        self._path = config_path
        self._unused = set(config)

    def get(self, key: str, flag_value, convert, default=None, required: bool = False):
        self._unused.discard(key)
        if flag_value is not None:
            return flag_value
        if key in self._config:
            try:
                return convert(self._config[key])
            except ValueError as exc:
                raise ValueError(f"config key {key!r}: {exc}") from None
        if default is None and required:
            raise UsageError(f"missing required value: --{key}")
        return default

    def text(self, key, flag_value, default=None, required=False):
        return self.get(key, flag_value, str, default, required)

    def integer(self, key, flag_value, default=None, required=False):
        return self.get(key, flag_value, int, default, required)

    def real(self, key, flag_value, default=None, required=False):
        return self.get(key, flag_value, float, default, required)

    def topology(self, key, flag_value, default=None, required=False):
        return self.get(key, flag_value, Topology.parse, default, required)

    def finish(self):
        if self._unused:
            names = ", ".join(sorted(self._unused))
            raise ValueError(f"unknown config key(s) in {self._path}: {names}")


def _resolver(args) -> _Resolver:
    config_path = getattr(args, "config", None)
    config = _read_config(config_path) if config_path else {}
    return _Resolver(config, config_path)


def _print_config(subcommand: str, pairs: list[tuple[str, object]]) -> None:
    rendered = " ".join(f"{key}={value}" for key, value in pairs)
    print(f"config: subcommand={subcommand} {rendered}")


def _require_valid_separation(missing: MissingSet, topology: Topology) -> None:
    report = validate_separation(missing, topology)
    if report.valid:
        return
    parts = []
    if report.border_violations:
        shown = ", ".join(f"({c.row},{c.col})" for c in report.border_violations[:5])
        parts.append(f"{len(report.border_violations)} border pixel(s): {shown}")
    if report.pair_violations:
        shown = ", ".join(
            f"({p.row},{p.col})~({q.row},{q.col})"
            for p, q in report.pair_violations[:5]
        )
        parts.append(f"{len(report.pair_violations)} adjacent pair(s): {shown}")
    raise ValueError(
        f"damage violates the {topology.value} separation rule: " + "; ".join(parts)
    )


def _load_tree_for_topology(tree_path: str, flag_topology: Topology | None) -> TreeFile:
    entry = read_tree(tree_path)
    if flag_topology is not None and flag_topology is not entry.topology:
        raise ValueError(
            f"tree was trained for {entry.topology.value} "
            f"({entry.topology.frontier_size} inputs) but --topology says "
            f"{flag_topology.value}"
        )
    return entry


def cmd_damage(args) -> int:
    r = _resolver(args)
    image_path = r.text("image", args.image, required=True)
    out_image = r.text("out-image", args.out_image, required=True)
    out_mask = r.text("out-mask", args.out_mask, required=True)
    per_column = r.integer("per-column", args.per_column, required=True)
    seed = r.integer("seed", args.seed, default=_default_seed())
    r.finish()
    _print_config("damage", [
        ("image", image_path), ("out-image", out_image), ("out-mask", out_mask),
        ("per-column", per_column), ("seed", seed),
    ])

    image = read_pgm(image_path)
    rng = np.random.default_rng(seed)
    missing = generate_column_damage(image.width, image.height, per_column, rng)

    zeroed = image.pixels.copy()
    for coord in missing:
        zeroed[coord.row, coord.col] = 0
    write_pgm(out_image, GrayImage(zeroed))

    stem, ext = os.path.splitext(out_mask)
    if ext.lower() == ".csv":
        csv_path, pgm_path = out_mask, stem + ".pgm"
    else:
        pgm_path, csv_path = out_mask, stem + ".csv"
    with open(pgm_path, "wb") as fh:
        fh.write(mask_to_pgm(missing))
    with open(csv_path, "w", encoding="ascii", newline="") as fh:
        fh.write(mask_to_csv(missing))

    total = image.width * image.height
    percent = 100.0 * len(missing) / total
    print(f"removed {len(missing)} ({percent:.2f}%)")
    print(f"wrote {out_image}, {pgm_path}, {csv_path}")
    return 0


def cmd_train(args) -> int:
    r = _resolver(args)
    image_path = r.text("image", args.image, required=True)
    mask_path = r.text("mask", args.mask, required=True)
    topology = r.topology("topology", args.topology, required=True)
    pop = r.integer("pop", args.pop, default=500)
    gens = r.integer("gens", args.gens, default=500)
    seed = r.integer("seed", args.seed, default=_default_seed())
    out_tree = r.text("out-tree", args.out_tree, required=True)
    r.finish()
    _print_config("train", [
        ("image", image_path), ("mask", mask_path), ("topology", topology.value),
        ("pop", pop), ("gens", gens), ("seed", seed), ("out-tree", out_tree),
    ])

    image = read_pgm(image_path)
    missing = read_mask(mask_path, image.width, image.height)
    _require_valid_separation(missing, topology)
    damaged = apply_damage(image, missing)
    training = build_training_set(damaged, topology)
    print(f"training samples: {len(training)}")

    params = EvolutionParams(
        population_size=pop, generations=gens, seed=seed, topology=topology
    )
    result = evolve(training, params)
    write_tree(out_tree, TreeFile(result.tree, result.scaling, topology))
    print(f"training rmse: {format(result.fitness, '.17g')}")
    print(f"wrote {out_tree}")
    return 0


def cmd_reconstruct(args) -> int:
    r = _resolver(args)
    image_path = r.text("image", args.image, required=True)
    mask_path = r.text("mask", args.mask, required=True)
    tree_path = r.text("tree", args.tree, required=True)
    topology_flag = r.topology("topology", args.topology)
    out_path = r.text("out", args.out, required=True)
    r.finish()

    entry = _load_tree_for_topology(tree_path, topology_flag)
    topology = entry.topology
    _print_config("reconstruct", [
        ("image", image_path), ("mask", mask_path), ("tree", tree_path),
        ("topology", topology.value), ("out", out_path),
    ])

    image = read_pgm(image_path)
    missing = read_mask(mask_path, image.width, image.height)
    _require_valid_separation(missing, topology)
    damaged = apply_damage(image, missing)

    restored = reconstruct(damaged, entry.tree, entry.scaling, topology)
    write_pgm(out_path, restored)
    stem, ext = os.path.splitext(out_path)
    diff_path = f"{stem}_diff{ext or '.pgm'}"
    write_pgm(diff_path, diff_image(image, restored, gain=10))
    print(f"wrote {out_path}, {diff_path}")
    return 0


def cmd_evaluate(args) -> int:
    r = _resolver(args)
    image_path = r.text("image", args.image, required=True)
    mask_path = r.text("mask", args.mask, required=True)
    tree_path = r.text("tree", args.tree, required=True)
    topology_flag = r.topology("topology", args.topology)
    r.finish()

    entry = _load_tree_for_topology(tree_path, topology_flag)
    topology = entry.topology
    _print_config("evaluate", [
        ("image", image_path), ("mask", mask_path), ("tree", tree_path),
        ("topology", topology.value),
    ])

    image = read_pgm(image_path)
    missing = read_mask(mask_path, image.width, image.height)
    _require_valid_separation(missing, topology)
    damaged = apply_damage(image, missing)
    test = build_test_set(damaged, topology)

    tree_score = test_rmse(entry.tree, entry.scaling, test)
    base_score = baseline_rmse(test)
    print(f"tree test rmse: {format(tree_score, '.17g')}")
    print(f"baseline ({topology.value}) test rmse: {format(base_score, '.17g')}")
    return 0


def cmd_experiment(args) -> int:
    r = _resolver(args)
    image_path = r.text("image", args.image, required=True)
    runs = r.integer("runs", args.runs, required=True)
    topology = r.topology("topology", args.topology, required=True)
    per_column = r.integer("per-column", args.per_column, required=True)
    pop = r.integer("pop", args.pop, default=500)
    gens = r.integer("gens", args.gens, default=500)
    seed = r.integer("seed", args.seed, default=_default_seed())
    jobs = r.integer("jobs", args.jobs, default=os.cpu_count() or 1)
    bin_width = r.real("bin-width", args.bin_width, default=0.1)
    out_dir = r.text("out-dir", args.out_dir, required=True)
    r.finish()
    _print_config("experiment", [
        ("image", image_path), ("runs", runs), ("topology", topology.value),
        ("per-column", per_column), ("pop", pop), ("gens", gens),
        ("seed", seed), ("jobs", jobs), ("bin-width", bin_width),
        ("out-dir", out_dir),
    ])

    image = read_pgm(image_path)
    image_id = Path(image_path).stem
    rng = np.random.default_rng(seed)
    missing = generate_column_damage(image.width, image.height, per_column, rng)
    damaged = apply_damage(image, missing)

    params = EvolutionParams(
        population_size=pop, generations=gens, seed=seed, topology=topology
    )
    report = experiment_on_damaged(
        damaged, params, runs, base_seed=seed, image_id=image_id, jobs=jobs
    )
    written = emit_report(report, damaged, out_dir, bin_width=bin_width)

    test_vals = sorted(run.test_rmse for run in report.runs)
    median = test_vals[len(test_vals) // 2] if len(test_vals) % 2 else (
        (test_vals[len(test_vals) // 2 - 1] + test_vals[len(test_vals) // 2]) / 2
    )
    own_baseline = (
        report.baseline_rmse_moore
        if topology is Topology.MOORE
        else report.baseline_rmse_von_neumann
    )
    print(
        f"test rmse ({topology.value}): median={format(median, '.17g')} "
        f"min={format(test_vals[0], '.17g')} max={format(test_vals[-1], '.17g')}"
    )
    print(
        f"baselines: moore={format(report.baseline_rmse_moore, '.17g')} "
        f"von-neumann={format(report.baseline_rmse_von_neumann, '.17g')}"
    )
    below = sum(1 for v in test_vals if v < own_baseline)
    print(f"runs below own baseline: {below}/{len(test_vals)}")
    print(f"wrote {len(written)} artifact(s) to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coingp",
        description="Reconstruct missing pixels in grayscale images with "
        "evolved sliding-window predictors.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value file supplying defaults")

    p = sub.add_parser("damage", help="knock pixels out of an image")
    p.add_argument("--image")
    p.add_argument("--out-image")
    p.add_argument("--out-mask")
    p.add_argument("--per-column", type=int)
    p.add_argument("--seed", type=int)
    common(p)
    p.set_defaults(func=cmd_damage)

    p = sub.add_parser("train", help="evolve a predictor for a damaged image")
    p.add_argument("--image")
    p.add_argument("--mask")
    p.add_argument("--topology", type=Topology.parse, metavar="{moore,von-neumann}")
    p.add_argument("--pop", type=int)
    p.add_argument("--gens", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-tree")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("reconstruct", help="fill missing pixels with a trained tree")
    p.add_argument("--image")
    p.add_argument("--mask")
    p.add_argument("--tree")
    p.add_argument("--topology", type=Topology.parse, metavar="{moore,von-neumann}")
    p.add_argument("--out")
    common(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("evaluate", help="score a trained tree against the baseline")
    p.add_argument("--image")
    p.add_argument("--mask")
    p.add_argument("--tree")
    p.add_argument("--topology", type=Topology.parse, metavar="{moore,von-neumann}")
    common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", help="damage, train n times, report")
    p.add_argument("--image")
    p.add_argument("--runs", type=int)
    p.add_argument("--topology", type=Topology.parse, metavar="{moore,von-neumann}")
    p.add_argument("--per-column", type=int)
    p.add_argument("--pop", type=int)
    p.add_argument("--gens", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--bin-width", type=float)
    p.add_argument("--out-dir")
    common(p)
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
