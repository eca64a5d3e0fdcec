"""Expression trees that map a window's frontier intensities to a prediction.

A tree is built from eleven function symbols

    sin cos add sub div mul min max avg sqrt pos

over two terminal kinds: ``v<i>`` reads frontier position ``i`` and a
constant holds a float drawn once from [-1, 1] at creation. ``div`` returns
1 when the divisor's magnitude drops below 1e-9, ``sqrt`` clamps its argument
to zero from below, and ``pos`` is max(x, 0); everything else is the plain
numpy function. Any non-finite intermediate collapses to 0 so a tree always
produces finite numbers.

Nodes are immutable and cache their subtree size and height, so copying is
never needed: edits rebuild only the path from the root to the changed
subtree and share everything else.
"""

from __future__ import annotations

import math
from typing import Iterator, Optional

import numpy as np

FUNCTION_NAMES: tuple[str, ...] = (
    "sin", "cos", "add", "sub", "div", "mul", "min", "max", "avg", "sqrt", "pos",
)
FUNCTION_ARITY: dict[str, int] = {
    "sin": 1, "cos": 1, "sqrt": 1, "pos": 1,
    "add": 2, "sub": 2, "div": 2, "mul": 2, "min": 2, "max": 2, "avg": 2,
}
DIV_GUARD = 1e-9

_OP_VAR = "var"
_OP_CONST = "const"


class Node:
    """One tree node. ``op`` is a function name, "var", or "const".

    ``value`` holds the variable index or the constant; ``children`` is a
    tuple of Nodes (empty for terminals). ``size`` counts nodes in the
    subtree; ``height`` is the longest edge count to a leaf, so a lone
    terminal has height 0.
    """

    __slots__ = ("op", "value", "children", "size", "height")

    def __init__(self, op: str, value, children: tuple["Node", ...]):
        self.op = op
        self.value = value
        self.children = children
        self.size = 1 + sum(c.size for c in children)
        self.height = 1 + max(c.height for c in children) if children else 0

    def is_terminal(self) -> bool:
        return not self.children

    def __repr__(self) -> str:
        return f"Node({to_sexpr(self)})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Node):
            return NotImplemented
        if self.op != other.op or self.size != other.size:
            return False
        if self.op == _OP_VAR:
            return self.value == other.value
        if self.op == _OP_CONST:
            return self.value == other.value or (
                math.isnan(self.value) and math.isnan(other.value)
            )
        return self.children == other.children

    def __hash__(self) -> int:
        if self.op == _OP_CONST:
            return hash((self.op, self.value))
        return hash((self.op, self.value, self.children))


def variable(index: int) -> Node:
    if index < 0:
        raise ValueError(f"variable index must be >= 0, got {index}")
    return Node(_OP_VAR, int(index), ())


def constant(value: float) -> Node:
    v = float(value)
    if math.isnan(v) or v < -1.0 or v > 1.0:
        raise ValueError(f"constants must lie in [-1, 1], got {value!r}")
    return Node(_OP_CONST, v, ())


def function(name: str, *children: Node) -> Node:
    arity = FUNCTION_ARITY.get(name)
    if arity is None:
        raise ValueError(f"unknown function {name!r}")
    if len(children) != arity:
        raise ValueError(f"{name} takes {arity} argument(s), got {len(children)}")
    return Node(name, None, tuple(children))


def is_variable(node: Node) -> bool:
    return node.op == _OP_VAR


def is_constant(node: Node) -> bool:
    return node.op == _OP_CONST


def max_var_index(tree: Node) -> int:
    """Largest variable index referenced, or -1 if none."""
    best = -1
    for node in iter_nodes(tree):
        if node.op == _OP_VAR and node.value > best:
            best = node.value
    return best


def _finite(x):
    """Replace non-finite entries with 0 in place (arrays are never shared)."""
    if isinstance(x, np.ndarray):
        bad = ~np.isfinite(x)
        if bad.any():
            x[bad] = 0.0
        return x
    return x if math.isfinite(x) else 0.0


def _protected_div(a, b):
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        a_arr = np.asarray(a, dtype=np.float64)
        b_arr = np.asarray(b, dtype=np.float64)
        safe = np.abs(b_arr) >= DIV_GUARD
        out = np.ones(np.broadcast_shapes(a_arr.shape, b_arr.shape), dtype=np.float64)
        np.divide(a_arr, b_arr, out=out, where=safe)
        return out
    return a / b if abs(b) >= DIV_GUARD else 1.0


def _eval(node: Node, columns: np.ndarray):
    """Evaluate over (k, n) input columns: row i carries variable v<i>.

    Returns an (n,) float64 array, or a python float when the subtree is
    constant; arithmetic broadcasts either way.
    """
    op = node.op
    if op == _OP_VAR:
        if node.value >= columns.shape[0]:
            raise ValueError(
                f"tree reads v{node.value} but only {columns.shape[0]} inputs exist"
            )
        return columns[node.value]
    if op == _OP_CONST:
        return node.value
    if op == "sin":
        return np.sin(_eval(node.children[0], columns))
    if op == "cos":
        return np.cos(_eval(node.children[0], columns))
    if op == "sqrt":
        return np.sqrt(np.maximum(_eval(node.children[0], columns), 0.0))
    if op == "pos":
        return np.maximum(_eval(node.children[0], columns), 0.0)
    a = _eval(node.children[0], columns)
    b = _eval(node.children[1], columns)
    if op == "add":
        return _finite(a + b)
    if op == "sub":
        return _finite(a - b)
    if op == "mul":
        return _finite(a * b)
    if op == "div":
        return _finite(_protected_div(a, b))
    if op == "avg":
        return _finite((a + b) * 0.5)
    if op == "min":
        return np.minimum(a, b)
    if op == "max":
        return np.maximum(a, b)
    raise ValueError(f"unknown operator {op!r}")


def evaluate(tree: Node, columns: np.ndarray) -> np.ndarray:
    """Raw tree outputs over ``columns`` of shape (k, n); returns (n,) float64.

    Overflow and invalid-value warnings are suppressed; the scrub inside
    ``_eval`` turns any such result into 0 before it propagates.
    """
    columns = np.asarray(columns, dtype=np.float64)
    if columns.ndim != 2:
        raise ValueError(f"columns must be (k, n), got shape {columns.shape}")
    with np.errstate(all="ignore"):
        out = _eval(tree, columns)
    if isinstance(out, np.ndarray):
        return out
    # constant tree: broadcast the scalar
    return np.full(columns.shape[1], float(out), dtype=np.float64)


def eval_tree(tree: Node, inputs) -> float:
    """Raw output for a single window's frontier values."""
    col = np.asarray(inputs, dtype=np.float64).reshape(-1, 1)
    return float(evaluate(tree, col)[0])


def random_tree(
    n_vars: int,
    max_height: int,
    rng: np.random.Generator,
    method: str = "grow",
) -> Node:
    """Random tree of height <= max_height by the grow or full method.

    "full" puts functions at every level below max_height; "grow" may stop
    early at terminals. Constants are drawn uniformly from [-1, 1] and fixed
    for the life of the node.
    """
    if n_vars < 1:
        raise ValueError(f"need at least one input variable, got {n_vars}")
    if max_height < 0:
        raise ValueError(f"max_height must be >= 0, got {max_height}")
    if method not in ("grow", "full"):
        raise ValueError(f"method must be 'grow' or 'full', got {method!r}")
    # chance of stopping at a terminal while growing, and of a var among terminals
    p_terminal = (n_vars + 1) / (n_vars + 1 + len(FUNCTION_NAMES))
    p_var = n_vars / (n_vars + 1)

    def terminal() -> Node:
        if rng.random() < p_var:
            return variable(int(rng.integers(n_vars)))
        return constant(float(rng.uniform(-1.0, 1.0)))

    def build(budget: int) -> Node:
        if budget == 0 or (method == "grow" and rng.random() < p_terminal):
            return terminal()
        name = FUNCTION_NAMES[int(rng.integers(len(FUNCTION_NAMES)))]
        kids = tuple(build(budget - 1) for _ in range(FUNCTION_ARITY[name]))
        return Node(name, None, kids)

    return build(max_height)


def iter_nodes(tree: Node) -> Iterator[Node]:
    """Depth-first, parents before children."""
    stack = [tree]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def all_paths(tree: Node) -> list[tuple[int, ...]]:
    """Every node's path from the root as child indices, preorder."""
    out: list[tuple[int, ...]] = []
    stack: list[tuple[Node, tuple[int, ...]]] = [(tree, ())]
    while stack:
        node, path = stack.pop()
        out.append(path)
        for i in range(len(node.children) - 1, -1, -1):
            stack.append((node.children[i], path + (i,)))
    out.sort()
    return out


def node_at(tree: Node, path: tuple[int, ...]) -> Node:
    node = tree
    for i in path:
        node = node.children[i]
    return node


def has_path(tree: Node, path: tuple[int, ...]) -> bool:
    node = tree
    for i in path:
        if i >= len(node.children):
            return False
        node = node.children[i]
    return True


def replace_at(tree: Node, path: tuple[int, ...], subtree: Node) -> Node:
    """New tree with the node at ``path`` swapped for ``subtree``.

    Only the spine from the root to the replacement is rebuilt; all other
    subtrees are shared with the original.
    """
    if not path:
        return subtree
    i = path[0]
    kids = list(tree.children)
    kids[i] = replace_at(kids[i], path[1:], subtree)
    return Node(tree.op, tree.value, tuple(kids))


def to_sexpr(tree: Node) -> str:
    """Serialize: variables as v<i>, constants with 17 significant digits,
    function applications as parenthesized prefix lists."""
    if tree.op == _OP_VAR:
        return f"v{tree.value}"
    if tree.op == _OP_CONST:
        return format(tree.value, ".17g")
    inner = " ".join(to_sexpr(c) for c in tree.children)
    return f"({tree.op} {inner})"


def _tokenize(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse_sexpr(text: str, n_vars: Optional[int] = None) -> Node:
    """Parse ``to_sexpr`` output back into a tree.

    When ``n_vars`` is given, variable indices are checked against it.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise ValueError("empty tree text")
    pos = 0

    def fail(msg: str):
        raise ValueError(f"bad tree text: {msg}")

    def atom(tok: str) -> Node:
        if len(tok) > 1 and tok[0] == "v" and tok[1:].isdigit():
            idx = int(tok[1:])
            if n_vars is not None and idx >= n_vars:
                fail(f"v{idx} out of range for {n_vars} inputs")
            return variable(idx)
        try:
            val = float(tok)
        except ValueError:
            fail(f"unexpected token {tok!r}")
        try:
            return constant(val)
        except ValueError as exc:
            fail(str(exc))

    def parse() -> Node:
        nonlocal pos
        if pos >= len(tokens):
            fail("unexpected end of input")
        tok = tokens[pos]
        pos += 1
        if tok == ")":
            fail("unexpected ')'")
        if tok != "(":
            return atom(tok)
        if pos >= len(tokens):
            fail("unexpected end of input after '('")
        name = tokens[pos]
        pos += 1
        arity = FUNCTION_ARITY.get(name)
        if arity is None:
            fail(f"unknown function {name!r}")
        kids = []
        while pos < len(tokens) and tokens[pos] != ")":
            kids.append(parse())
        if pos >= len(tokens):
            fail("missing ')'")
        pos += 1
        if len(kids) != arity:
            fail(f"{name} takes {arity} argument(s), got {len(kids)}")
        return Node(name, None, tuple(kids))

    tree = parse()
    if pos != len(tokens):
        fail(f"trailing tokens starting at {tokens[pos]!r}")
    return tree
