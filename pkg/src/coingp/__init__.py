"""Reconstruct missing pixels in grayscale images with evolved predictors.

The library damages an image by removing well-separated pixels, trains a
population of expression trees to predict a pixel from the ring of intensities
around it, and uses the best tree to fill the gaps back in. The ``coingp``
command line tool drives the same pipeline end to end.
"""

from .imagery import GrayImage, PgmError, PixelCoord, diff_image, load_pgm, read_pgm, save_pgm, write_pgm
from .damage import (
    DamagedImage,
    MissingSet,
    SeparationReport,
    Topology,
    apply_damage,
    generate_column_damage,
    validate_separation,
)
from .neighborhood import (
    NeighborhoodSample,
    SampleSet,
    TestSet,
    TrainingSet,
    build_test_set,
    build_training_set,
    extract_sample,
    frontier_offsets,
)
from .gp.trees import Node, eval_tree, evaluate, parse_sexpr, random_tree, to_sexpr
from .fitness import (
    ScalingCoefficients,
    fit_scaling,
    predict_batch,
    predict_pixel,
    rmse,
    rmse_fitness,
)
from .gp.evolution import EvolutionParams, EvolutionResult, evolve
from .gp.variation import CrossoverKind, crossover, mutate
from .evaluation import (
    DamageParams,
    ExperimentReport,
    RunResult,
    baseline_average_predict,
    baseline_rmse,
    emit_report,
    reconstruct,
    run_experiment,
    test_rmse,
)
from .treefile import TreeFile, read_tree, write_tree

__version__ = "0.1.0"

__all__ = [
    "GrayImage", "PgmError", "PixelCoord", "diff_image", "load_pgm", "read_pgm",
    "save_pgm", "write_pgm",
    "DamagedImage", "MissingSet", "SeparationReport", "Topology", "apply_damage",
    "generate_column_damage", "validate_separation",
    "NeighborhoodSample", "SampleSet", "TestSet", "TrainingSet", "build_test_set",
    "build_training_set", "extract_sample", "frontier_offsets",
    "Node", "eval_tree", "evaluate", "parse_sexpr", "random_tree", "to_sexpr",
    "ScalingCoefficients", "fit_scaling", "predict_batch", "predict_pixel", "rmse",
    "rmse_fitness",
    "EvolutionParams", "EvolutionResult", "evolve",
    "CrossoverKind", "crossover", "mutate",
    "DamageParams", "ExperimentReport", "RunResult", "baseline_average_predict",
    "baseline_rmse", "emit_report", "reconstruct", "run_experiment", "test_rmse",
    "TreeFile", "read_tree", "write_tree",
    "__version__",
]
