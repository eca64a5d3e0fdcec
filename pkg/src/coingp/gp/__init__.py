"""Genetic programming core: trees, variation operators, evolution loop.

Only the self-contained tree and variation APIs are re-exported here; the
evolution loop lives in ``coingp.gp.evolution`` (it pulls in the fitness
pipeline, which itself builds on the tree module).
"""

from .trees import (
    FUNCTION_ARITY,
    FUNCTION_NAMES,
    Node,
    constant,
    eval_tree,
    evaluate,
    function,
    max_var_index,
    parse_sexpr,
    random_tree,
    to_sexpr,
    variable,
)
from .variation import CROSSOVER_KINDS, CrossoverKind, crossover, mutate

__all__ = [
    "FUNCTION_ARITY",
    "FUNCTION_NAMES",
    "Node",
    "constant",
    "eval_tree",
    "evaluate",
    "function",
    "max_var_index",
    "parse_sexpr",
    "random_tree",
    "to_sexpr",
    "variable",
    "CROSSOVER_KINDS",
    "CrossoverKind",
    "crossover",
    "mutate",
]
