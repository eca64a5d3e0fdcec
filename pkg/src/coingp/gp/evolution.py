"""Steady-state evolution of predictor trees under tournament selection.

Each step draws a handful of distinct individuals, ranks them by fitness
(ties broken toward smaller trees, then draw order), breeds the best two
through a randomly chosen crossover flavor plus mutation, and writes the
offspring over the worst contestant in place. One "generation" is as many
such replacement events as there are individuals, so generation counts stay
comparable with generational setups at equal population size.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..fitness import ScalingCoefficients, fitness_on_columns
from ..damage import Topology
from ..neighborhood import SampleSet
from .trees import Node, random_tree
from .variation import CROSSOVER_KINDS, crossover, mutate


@dataclass(frozen=True)
class EvolutionParams:
    """Knobs for one evolution run.

    ``seed`` feeds a fresh generator when ``evolve`` is not handed one.
    ``generations`` may be 0, which just scores the initial population.
    """

    population_size: int = 500
    generations: int = 500
    tournament_size: int = 3
    mutation_probability: float = 0.3
    max_height: int = 8
    seed: int = 0
    topology: Topology = Topology.MOORE

    def __post_init__(self):
        if self.population_size < self.tournament_size:
            raise ValueError(
                f"population {self.population_size} smaller than tournament "
                f"{self.tournament_size}"
            )
        if self.tournament_size < 3:
            raise ValueError(
                f"tournament needs two parents and a victim, got size {self.tournament_size}"
            )
        if self.generations < 0:
            raise ValueError(f"generations must be >= 0, got {self.generations}")
        if not 0.0 <= self.mutation_probability <= 1.0:
            raise ValueError(
                f"mutation probability must be in [0, 1], got {self.mutation_probability}"
            )
        if self.max_height < 1:
            raise ValueError(f"max height must be >= 1, got {self.max_height}")


@dataclass(frozen=True)
class Individual:
    """A tree with its training fitness and fitted output scaling."""

    tree: Node
    fitness: float
    scaling: ScalingCoefficients


@dataclass(frozen=True)
class EvolutionResult:
    """Best individual ever seen plus the per-generation fitness trace."""

    tree: Node
    scaling: ScalingCoefficients
    fitness: float
    history: tuple[float, ...] = field(repr=False)


def init_population(params: EvolutionParams, rng: np.random.Generator) -> list[Node]:
    """Ramped initial trees: heights cycle 2..6, grow and full alternate."""
    n_vars = params.topology.frontier_size
    trees: list[Node] = []
    for i in range(params.population_size):
        height = min(2 + (i // 2) % 5, params.max_height)
        method = "grow" if i % 2 == 0 else "full"
        trees.append(random_tree(n_vars, height, rng, method=method))
    return trees


def _scored(tree: Node, columns: np.ndarray, targets: np.ndarray) -> Individual:
    fitness, scaling = fitness_on_columns(tree, columns, targets)
    return Individual(tree=tree, fitness=fitness, scaling=scaling)


def tournament_step(
    population: list[Individual],
    params: EvolutionParams,
    columns: np.ndarray,
    targets: np.ndarray,
    rng: np.random.Generator,
) -> Individual:
    """One replacement event; mutates ``population`` and returns the newcomer."""
    drawn = rng.choice(len(population), size=params.tournament_size, replace=False)
    slots = [int(i) for i in drawn]
    # stable sort keeps draw order as the final tie-break
    ranked = sorted(
        range(len(slots)),
        key=lambda j: (population[slots[j]].fitness, population[slots[j]].tree.size),
    )
    best = population[slots[ranked[0]]]
    second = population[slots[ranked[1]]]
    victim_slot = slots[ranked[-1]]

    kind = CROSSOVER_KINDS[int(rng.integers(len(CROSSOVER_KINDS)))]
    child = crossover(best.tree, second.tree, kind, params.max_height, rng)
    child = mutate(
        child,
        params.mutation_probability,
        params.max_height,
        params.topology.frontier_size,
        rng,
    )
    newcomer = _scored(child, columns, targets)
    population[victim_slot] = newcomer
    return newcomer


def evolve(
    training: SampleSet,
    params: EvolutionParams,
    rng: np.random.Generator | None = None,
) -> EvolutionResult:
    """Run the full loop and return the best predictor ever scored.

    The best-ever individual is tracked across all replacement events, not
    just generation boundaries, and only a strictly better fitness displaces
    it. The history records the best-ever fitness after each generation, so
    it is non-increasing and has exactly ``params.generations`` entries.
    """
    if training.topology is not params.topology:
        raise ValueError(
            f"training set is {training.topology.value} but params say "
            f"{params.topology.value}"
        )
    if len(training) == 0:
        raise ValueError("cannot evolve against an empty training set")
    if rng is None:
        rng = np.random.default_rng(params.seed)
    columns = np.ascontiguousarray(training.inputs.T)
    targets = training.targets

    population = [_scored(t, columns, targets) for t in init_population(params, rng)]
    best = min(population, key=lambda ind: ind.fitness)

    history: list[float] = []
    for _ in range(params.generations):
        for _ in range(params.population_size):
            newcomer = tournament_step(population, params, columns, targets, rng)
            if newcomer.fitness < best.fitness:
                best = newcomer
        history.append(best.fitness)

    return EvolutionResult(
        tree=best.tree,
        scaling=best.scaling,
        fitness=best.fitness,
        history=tuple(history),
    )
