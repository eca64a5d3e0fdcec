"""Variation operators: five crossover flavors plus subtree mutation.

Every crossover takes parents ``a`` and ``b`` and returns one offspring that
is a modified copy of ``a``. The flavors differ in how the insertion point
and the donated material are chosen:

* simple subtree: any node of a replaced by any subtree of b
* uniform: node-by-node coin flips over the region where the shapes agree
* size fair: like simple subtree, but the donor is at most about twice the
  size of what it replaces, which damps tree bloat
* one point: both trees cut at the same position within the shared shape
* context preserving: the donor comes from the identical path in b

All offspring must respect the height cap. One point, context preserving and
uniform cannot exceed the taller parent, so they pass by construction; the
other two are retried a few times and fall back to returning ``a`` unchanged.

Mutation fires with a configured probability and regrows a random subtree,
budgeted so the result stays under the cap.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .trees import Node, all_paths, has_path, node_at, random_tree, replace_at

CAP_ATTEMPTS = 5


class CrossoverKind(Enum):
    SIMPLE_SUBTREE = "simple-subtree"
    UNIFORM = "uniform"
    SIZE_FAIR = "size-fair"
    ONE_POINT = "one-point"
    CONTEXT_PRESERVING = "context-preserving"


CROSSOVER_KINDS: tuple[CrossoverKind, ...] = tuple(CrossoverKind)


def _paths_with_nodes(tree: Node) -> list[tuple[tuple[int, ...], Node]]:
    """(path, node) for every node, sorted by path."""
    out: list[tuple[tuple[int, ...], Node]] = []
    stack: list[tuple[tuple[int, ...], Node]] = [((), tree)]
    while stack:
        path, node = stack.pop()
        out.append((path, node))
        for i in range(len(node.children) - 1, -1, -1):
            stack.append((path + (i,), node.children[i]))
    out.sort(key=lambda pn: pn[0])
    return out


def common_region_paths(a: Node, b: Node) -> list[tuple[int, ...]]:
    """Positions where the two trees' shapes coincide, walking from the root.

    The root always pairs; children pair up only below a pair whose nodes
    have the same arity. Sorted by path.
    """
    out: list[tuple[int, ...]] = []
    stack: list[tuple[tuple[int, ...], Node, Node]] = [((), a, b)]
    while stack:
        path, x, y = stack.pop()
        out.append(path)
        if x.children and len(x.children) == len(y.children):
            for i in range(len(x.children) - 1, -1, -1):
                stack.append((path + (i,), x.children[i], y.children[i]))
    out.sort()
    return out


def _pick(items, rng: np.random.Generator):
    return items[int(rng.integers(len(items)))]


def simple_subtree_crossover(a: Node, b: Node, rng: np.random.Generator) -> Node:
    """Replace a random subtree of a with a random subtree of b."""
    target_path = _pick(all_paths(a), rng)
    donor = _pick([node for _, node in _paths_with_nodes(b)], rng)
    return replace_at(a, target_path, donor)


def uniform_crossover(a: Node, b: Node, rng: np.random.Generator) -> Node:
    """Coin-flip merge over the common region.

    Where both nodes are internal with equal arity the flip picks whose
    symbol survives and the children are merged pairwise; anywhere the
    shapes diverge the flip picks one whole subtree.
    """

    def mix(x: Node, y: Node) -> Node:
        chosen = x if rng.random() < 0.5 else y
        if x.children and len(x.children) == len(y.children):
            kids = tuple(mix(xc, yc) for xc, yc in zip(x.children, y.children))
            return Node(chosen.op, chosen.value, kids)
        return chosen

    return mix(a, b)


def size_fair_crossover(a: Node, b: Node, rng: np.random.Generator) -> Node:
    """Subtree swap where the donor's size is bounded by the recipient's.

    The replaced subtree of size s only accepts donors of size at most
    2*s + 1, chosen uniformly among b's qualifying subtrees. Terminals
    always qualify, so a donor always exists.
    """
    target_path = _pick(all_paths(a), rng)
    limit = 2 * node_at(a, target_path).size + 1
    donors = [node for _, node in _paths_with_nodes(b) if node.size <= limit]
    return replace_at(a, target_path, _pick(donors, rng))


def one_point_crossover(a: Node, b: Node, rng: np.random.Generator) -> Node:
    """Cut both parents at one shared position and graft b's side onto a."""
    path = _pick(common_region_paths(a, b), rng)
    return replace_at(a, path, node_at(b, path))


def context_preserving_crossover(a: Node, b: Node, rng: np.random.Generator) -> Node:
    """Swap at a position that exists, by exact path, in both parents."""
    shared = [path for path, _ in _paths_with_nodes(b) if has_path(a, path)]
    path = _pick(shared, rng)
    return replace_at(a, path, node_at(b, path))


_OPERATORS = {
    CrossoverKind.SIMPLE_SUBTREE: simple_subtree_crossover,
    CrossoverKind.UNIFORM: uniform_crossover,
    CrossoverKind.SIZE_FAIR: size_fair_crossover,
    CrossoverKind.ONE_POINT: one_point_crossover,
    CrossoverKind.CONTEXT_PRESERVING: context_preserving_crossover,
}


def crossover(
    a: Node,
    b: Node,
    kind: CrossoverKind,
    max_height: int,
    rng: np.random.Generator,
) -> Node:
    """One offspring from a and b under the height cap.

    Offspring taller than ``max_height`` are discarded and the operator is
    retried with fresh random choices; after ``CAP_ATTEMPTS`` failures the
    first parent is returned unchanged.
    """
    if a.height > max_height or b.height > max_height:
        raise ValueError("parent exceeds the height cap")
    op = _OPERATORS[kind]
    for _ in range(CAP_ATTEMPTS):
        child = op(a, b, rng)
        if child.height <= max_height:
            return child
    return a


def mutate(
    tree: Node,
    probability: float,
    max_height: int,
    n_vars: int,
    rng: np.random.Generator,
) -> Node:
    """With the given probability, regrow one random subtree.

    The replacement is grown with a height budget of ``max_height`` minus
    the mutation point's depth, so the result never exceeds the cap. With
    probability ``1 - probability`` the tree is returned untouched.
    """
    if not 0.0 <= probability <= 1.0:
        raise ValueError(f"mutation probability must be in [0, 1], got {probability}")
    if rng.random() >= probability:
        return tree
    path = _pick(all_paths(tree), rng)
    fresh = random_tree(n_vars, max_height - len(path), rng, method="grow")
    return replace_at(tree, path, fresh)
