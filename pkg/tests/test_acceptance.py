"""End-to-end acceptance checks.

Each test prints one pass/fail line (run pytest with -s to see them).
Criterion 6 is a tracked expectation: its outcome is printed and recorded
but a miss does not fail the suite.
"""

import statistics
import time

import numpy as np
import pytest

from conftest import random_image
from coingp.cli import main
from coingp.damage import (
    MissingSet,
    Topology,
    apply_damage,
    generate_column_damage,
    mask_from_pgm,
    validate_separation,
)
from coingp.evaluation import (
    baseline_rmse,
    experiment_on_damaged,
    reconstruct,
    single_run,
)
from coingp.evaluation import test_rmse as score_test_rmse
from coingp.fitness import (
    clipped_outputs,
    fitness_on_columns,
    rmse,
    rmse_fitness,
)
from coingp.gp.evolution import EvolutionParams, evolve
from coingp.gp.trees import evaluate, random_tree
from coingp.gp.variation import CROSSOVER_KINDS, crossover, mutate
from coingp.imagery import GrayImage, write_pgm
from coingp.neighborhood import (
    build_test_set,
    build_training_set,
    extract_sample,
    frontier_offsets,
)


def report(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


def test_criterion_1_damage_count(tmp_path, rng):
    img_path = tmp_path / "big.pgm"
    write_pgm(img_path, random_image(rng, 256, 256))
    start = time.perf_counter()
    code = main([
        "damage", "--image", str(img_path),
        "--out-image", str(tmp_path / "d.pgm"),
        "--out-mask", str(tmp_path / "m.pgm"),
        "--per-column", "100", "--seed", "0",
    ])
    elapsed = time.perf_counter() - start
    missing = mask_from_pgm((tmp_path / "m.pgm").read_bytes())
    removed = len(missing)
    percent = 100.0 * removed / (256 * 256)
    ok = (
        code == 0
        and removed == 12700
        and f"{percent:.2f}" == "19.38"
        and elapsed < 1.0
    )
    assert report(
        1, ok,
        f"256x256 per-column 100 removed {removed} ({percent:.2f}%) "
        f"in {elapsed:.3f}s",
    )


def test_criterion_2_separation_validity(rng):
    checked = 0
    brute_forced = 0
    all_valid = True
    oracle_agrees = True
    for i in range(1000):
        h = int(rng.integers(5, 65))
        w = int(rng.integers(5, 65))
        limit = (h - 1) // 2
        k = int(rng.integers(1, limit + 1))
        missing = generate_column_damage(w, h, k, rng)
        checked += 1
        for topo in Topology:
            if not validate_separation(missing, topo).valid:
                all_valid = False
        coords = np.array([(c.row, c.col) for c in missing.coords])
        # all-pairs oracle: both metrics must separate every pair by >= 2
        if len(coords) and (len(coords) <= 400 or i % 50 == 0):
            brute_forced += 1
            diffs = np.abs(coords[:, None, :] - coords[None, :, :])
            cheb = diffs.max(axis=-1)
            manh = diffs.sum(axis=-1)
            off = ~np.eye(len(coords), dtype=bool)
            if cheb[off].min() < 2 or manh[off].min() < 2:
                oracle_agrees = False
        # generated sets never touch the border
        if len(coords):
            if (coords[:, 0].min() < 1 or coords[:, 0].max() > h - 2
                    or coords[:, 1].min() < 1 or coords[:, 1].max() > w - 2):
                all_valid = False
    ok = all_valid and oracle_agrees and checked == 1000
    assert report(
        2, ok,
        f"{checked} generated sets valid under both topologies, "
        f"{brute_forced} brute-forced all-pairs",
    )


def brute_force_sets(damaged, topology):
    """Full interior scan with direct pixel lookups."""
    offsets = frontier_offsets(topology)
    missing = set(damaged.missing.coords)
    img = damaged.image
    training, test = [], []
    for r in range(1, img.height - 1):
        for c in range(1, img.width - 1):
            ring = [(r + dr, c + dc) for dr, dc in offsets]
            if any(p in missing for p in ring):
                continue
            inputs = tuple(float(img.get(*p)) for p in ring)
            entry = (inputs, float(img.get(r, c)), (r, c))
            if (r, c) in missing:
                test.append(entry)
            else:
                training.append(entry)
    return training, test


def sample_set_as_tuples(samples):
    return [
        (tuple(samples.inputs[i]), float(samples.targets[i]),
         (samples.centers[i].row, samples.centers[i].col))
        for i in range(len(samples))
    ]


def test_criterion_3_training_set_oracle(rng):
    matched = 0
    sizes_ok = True
    strictness_ok = True
    necessity_ok = True
    for _ in range(150):
        h = int(rng.integers(5, 33))
        w = int(rng.integers(5, 33))
        k = int(rng.integers(1, (h - 1) // 2 + 1))
        img = random_image(rng, h, w)
        damaged = apply_damage(img, generate_column_damage(w, h, k, rng))
        counts = {}
        for topo in Topology:
            training = build_training_set(damaged, topo)
            test = build_test_set(damaged, topo)
            want_train, want_test = brute_force_sets(damaged, topo)
            got_train = sample_set_as_tuples(training)
            got_test = sample_set_as_tuples(test)
            if sorted(got_train, key=lambda e: e[2]) != sorted(
                want_train, key=lambda e: e[2]
            ):
                sizes_ok = False
            if sorted(got_test, key=lambda e: e[2]) != sorted(
                want_test, key=lambda e: e[2]
            ):
                sizes_ok = False
            counts[topo] = len(training)
        if counts[Topology.VON_NEUMANN] < counts[Topology.MOORE]:
            sizes_ok = False
        # strict inequality holds exactly when some available interior
        # pixel has a complete plus-shaped ring but a broken square ring
        missing = set(damaged.missing.coords)
        strict_expected = False
        for r in range(1, h - 1):
            for c in range(1, w - 1):
                if (r, c) in missing:
                    continue
                vn_ok = not any(
                    (r + dr, c + dc) in missing
                    for dr, dc in frontier_offsets(Topology.VON_NEUMANN)
                )
                moore_broken = any(
                    (r + dr, c + dc) in missing
                    for dr, dc in frontier_offsets(Topology.MOORE)
                )
                if vn_ok and moore_broken:
                    strict_expected = True
                    break
            if strict_expected:
                break
        strict_got = counts[Topology.VON_NEUMANN] > counts[Topology.MOORE]
        if strict_got != strict_expected:
            strictness_ok = False
        if strict_expected:
            # the witness implies a missing pixel diagonal to an available
            # interior pixel, so that weaker condition is necessary
            diagonal = any(
                m in missing
                for r in range(1, h - 1)
                for c in range(1, w - 1)
                if (r, c) not in missing
                for m in [(r - 1, c - 1), (r - 1, c + 1),
                          (r + 1, c - 1), (r + 1, c + 1)]
            )
            if not diagonal:
                necessity_ok = False
        matched += 1
    ok = sizes_ok and strictness_ok and necessity_ok and matched == 150
    assert report(
        3, ok,
        f"{matched} damaged images: sets equal brute-force enumeration, "
        f"|T_vn| >= |T_moore| with exact strictness condition",
    )


def test_criterion_4_fitness_pipeline(rng):
    agree = True
    optimal = True
    for _ in range(1000):
        n = int(rng.integers(3, 30))
        k = int(rng.integers(1, 9))
        columns = np.ascontiguousarray(
            rng.uniform(0, 255, size=(n, k)).T
        )
        targets = rng.uniform(0, 255, size=n)
        tree = random_tree(k, int(rng.integers(0, 5)), rng)
        fit, scaling = fitness_on_columns(tree, columns, targets)

        # independent recomputation: clip, least-squares affine fit, rmse
        clipped = clipped_outputs(tree, columns)
        design = np.stack([np.ones_like(clipped), clipped], axis=1)
        coeffs, *_ = np.linalg.lstsq(design, targets, rcond=None)
        if np.var(clipped) < 1e-12:
            coeffs = np.array([targets.mean(), 0.0])
        direct = rmse(coeffs[0] + coeffs[1] * clipped, targets)
        if abs(fit - direct) > 1e-9:
            agree = False
        unscaled = rmse(clipped, targets)
        if fit > unscaled + 1e-9:
            optimal = False
    ok = agree and optimal
    assert report(
        4, ok,
        "1000 random trees: fitness matches direct recomputation within "
        "1e-9 and scaled rmse <= unscaled rmse",
    )


@pytest.fixture(scope="module")
def desk_reports():
    skimage_data = pytest.importorskip("skimage.data")
    crop = GrayImage(skimage_data.camera()[128:256, 128:256])
    damage_rng = np.random.default_rng(0)
    missing = generate_column_damage(128, 128, 50, damage_rng)
    damaged = apply_damage(crop, missing)
    reports = {}
    for topo in Topology:
        params = EvolutionParams(
            population_size=200, generations=100, topology=topo, seed=0
        )
        reports[topo] = experiment_on_damaged(
            damaged, params, n_runs=10, base_seed=0, image_id="crop"
        )
    return reports


def own_baseline(report_obj):
    if report_obj.topology is Topology.MOORE:
        return report_obj.baseline_rmse_moore
    return report_obj.baseline_rmse_von_neumann


def test_criterion_5_gp_beats_baseline(desk_reports):
    details = []
    ok = True
    for topo in Topology:
        rep = desk_reports[topo]
        base = own_baseline(rep)
        below = sum(1 for r in rep.runs if r.test_rmse < base)
        details.append(f"{topo.value} {below}/10 below baseline {base:.3f}")
        if below < 8:
            ok = False
    assert report(5, ok, "; ".join(details))


def test_criterion_6_topology_ordering_soft(desk_reports):
    moore = statistics.median(
        r.test_rmse for r in desk_reports[Topology.MOORE].runs
    )
    vn = statistics.median(
        r.test_rmse for r in desk_reports[Topology.VON_NEUMANN].runs
    )
    ok = moore <= vn
    report(
        6, ok,
        f"median test rmse moore={moore:.3f} vs von-neumann={vn:.3f} "
        f"(tracked expectation, miss is logged not fatal)",
    )
    if not ok:
        print(
            "criterion 6 note: the shared damage pattern leaves far fewer "
            "complete square neighborhoods than plus-shaped ones at this "
            "scale, so the moore predictor trains on much less data"
        )


def test_criterion_7_baseline_ordering(desk_reports):
    rep = desk_reports[Topology.MOORE]
    ok = rep.baseline_rmse_von_neumann < rep.baseline_rmse_moore
    assert report(
        7, ok,
        f"von-neumann baseline {rep.baseline_rmse_von_neumann:.3f} < "
        f"moore baseline {rep.baseline_rmse_moore:.3f}",
    )


def test_criterion_8_determinism(tmp_path, rng):
    img_path = tmp_path / "img.pgm"
    write_pgm(img_path, random_image(rng, 32, 32))
    flags = [
        "experiment", "--image", str(img_path), "--runs", "2",
        "--topology", "moore", "--per-column", "4", "--pop", "30",
        "--gens", "5", "--seed", "0", "--jobs", "1",
    ]
    for sub in ("a", "b"):
        assert main(flags + ["--out-dir", str(tmp_path / sub)]) == 0
    names_a = sorted(p.name for p in (tmp_path / "a").iterdir())
    names_b = sorted(p.name for p in (tmp_path / "b").iterdir())
    identical = names_a == names_b
    compared = 0
    for name in names_a:
        if name.endswith(".png"):
            continue
        compared += 1
        if (tmp_path / "a" / name).read_bytes() != (
            tmp_path / "b" / name
        ).read_bytes():
            identical = False

    # repeat training writes a byte-identical tree file as well
    assert main([
        "damage", "--image", str(img_path),
        "--out-image", str(tmp_path / "d.pgm"),
        "--out-mask", str(tmp_path / "m.pgm"), "--per-column", "4",
        "--seed", "0",
    ]) == 0
    for sub in ("a.tree", "b.tree"):
        assert main([
            "train", "--image", str(img_path),
            "--mask", str(tmp_path / "m.pgm"), "--topology", "moore",
            "--pop", "30", "--gens", "5", "--seed", "0",
            "--out-tree", str(tmp_path / sub),
        ]) == 0
    if (tmp_path / "a.tree").read_bytes() != (tmp_path / "b.tree").read_bytes():
        identical = False
    assert report(
        8, identical,
        f"two identical invocations: {compared} non-image-figure artifacts "
        f"and the trained tree file are byte-identical",
    )


def test_criterion_9_degenerate_end_to_end(rng):
    ok = True
    details = []
    for seed in (0, 1):
        img = GrayImage(np.full((24, 24), 128, dtype=np.uint8))
        damage_rng = np.random.default_rng(seed)
        damaged = apply_damage(img, generate_column_damage(24, 24, 3, damage_rng))
        params = EvolutionParams(
            population_size=30, generations=1, topology=Topology.MOORE, seed=seed
        )
        training = build_training_set(damaged, Topology.MOORE)
        result = evolve(training, params)
        restored = reconstruct(damaged, result.tree, result.scaling, Topology.MOORE)
        test = build_test_set(damaged, Topology.MOORE)
        test_score = score_test_rmse(result.tree, result.scaling, test)
        if result.fitness != 0.0 or test_score != 0.0 or restored != img:
            ok = False
        details.append(
            f"seed {seed}: training rmse {result.fitness}, "
            f"test rmse {test_score}"
        )
    assert report(9, ok, "constant image reconstructed exactly; " + "; ".join(details))


def test_criterion_10_totality_and_depth_cap(rng):
    finite_ok = True
    for _ in range(10000):
        k = 4 if rng.random() < 0.5 else 8
        tree = random_tree(k, int(rng.integers(0, 7)), rng)
        style = rng.random()
        if style < 0.4:
            columns = rng.uniform(0, 255, size=(k, 3))
        elif style < 0.8:
            columns = rng.uniform(-1e6, 1e6, size=(k, 3))
        else:
            columns = np.zeros((k, 3))
        out = evaluate(tree, columns)
        if not np.all(np.isfinite(out)):
            finite_ok = False

    cap_ok = True
    pool = [random_tree(8, int(rng.integers(0, 9)), rng) for _ in range(80)]
    for i in range(10000):
        a = pool[int(rng.integers(len(pool)))]
        b = pool[int(rng.integers(len(pool)))]
        kind = CROSSOVER_KINDS[int(rng.integers(len(CROSSOVER_KINDS)))]
        child = crossover(a, b, kind, 8, rng)
        if child.height > 8:
            cap_ok = False
        mutant = mutate(child, 1.0, 8, 8, rng)
        if mutant.height > 8:
            cap_ok = False
    ok = finite_ok and cap_ok
    assert report(
        10, ok,
        "10000 fuzzed evaluations finite; 10000 crossover+mutation "
        "offspring within height 8",
    )
