"""Tree files: a trained predictor saved as three text lines.

Line 1 is the tree itself in parenthesized prefix form, line 2 the output
scaling as ``a=<intercept>, b=<slope>`` with 17 significant digits, line 3
the topology the tree was trained for. The topology line lets loaders check
the variable arity before the tree ever touches an image.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .damage import Topology
from .fitness import ScalingCoefficients
from .gp.trees import Node, max_var_index, parse_sexpr, to_sexpr


@dataclass(frozen=True)
class TreeFile:
    tree: Node
    scaling: ScalingCoefficients
    topology: Topology

    def __post_init__(self):
        if max_var_index(self.tree) >= self.topology.frontier_size:
            raise ValueError(
                f"tree reads v{max_var_index(self.tree)} but "
                f"{self.topology.value} has {self.topology.frontier_size} inputs"
            )


def dumps_tree(entry: TreeFile) -> str:
    a = format(entry.scaling.intercept, ".17g")
    b = format(entry.scaling.slope, ".17g")
    return (
        f"{to_sexpr(entry.tree)}\n"
        f"a={a}, b={b}\n"
        f"topology={entry.topology.value}\n"
    )


def loads_tree(text: str) -> TreeFile:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) != 3:
        raise ValueError(
            f"tree file must have 3 non-empty lines (tree, scaling, topology), "
            f"got {len(lines)}"
        )
    topo_line = lines[2].replace(" ", "")
    if not topo_line.startswith("topology="):
        raise ValueError(f"third line must be 'topology=...', got {topo_line!r}")
    topology = Topology.parse(topo_line[len("topology="):])

    scale_line = lines[1].replace(" ", "")
    parts = scale_line.split(",")
    if (
        len(parts) != 2
        or not parts[0].startswith("a=")
        or not parts[1].startswith("b=")
    ):
        raise ValueError(f"second line must be 'a=<num>, b=<num>', got {lines[1]!r}")
    try:
        scaling = ScalingCoefficients(
            intercept=float(parts[0][2:]), slope=float(parts[1][2:])
        )
    except ValueError:
        raise ValueError(f"non-numeric scaling coefficients in {lines[1]!r}") from None

    tree = parse_sexpr(lines[0], n_vars=topology.frontier_size)
    return TreeFile(tree=tree, scaling=scaling, topology=topology)


def write_tree(path: str | os.PathLike, entry: TreeFile) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_tree(entry))


def read_tree(path: str | os.PathLike) -> TreeFile:
    with open(path, "r", encoding="ascii") as fh:
        return loads_tree(fh.read())
