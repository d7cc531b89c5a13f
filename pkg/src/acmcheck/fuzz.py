"""Seeded random expression trees for property tests."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import expr
from .expr import BinOp, Call, Const, Neg, Node, Var


def random_tree(rng: np.random.Generator, coordinates: Sequence[str], depth: int = 8,
                general_powers: bool = False) -> Node:
    """A random tree of depth <= ``depth`` over the given coordinates.

    Unless ``general_powers`` is set, exponents are small integer literals.
    """
    if depth <= 1 or rng.random() < 0.3:
        if rng.random() < 0.4:
            # two decimals keeps literals printable without exponents
            return Const(float(round(rng.uniform(0, 5), 2)))
        k = int(rng.integers(len(coordinates)))
        return Var(k, coordinates[k])
    r = rng.random()
    if r < 0.1:
        return Neg(random_tree(rng, coordinates, depth - 1, general_powers))
    if r < 0.3:
        return Call(str(rng.choice(expr.FUNCTIONS)), random_tree(rng, coordinates, depth - 1, general_powers))
    op = str(rng.choice(["+", "-", "*", "/", "^"]))
    left = random_tree(rng, coordinates, depth - 1, general_powers)
    if op == "^" and not general_powers:
        # small integer exponents keep powers of negative bases defined
        right = Const(float(rng.integers(0, 4)))
    else:
        right = random_tree(rng, coordinates, depth - 1, general_powers)
    return BinOp(op, left, right)


def depth(node: Node) -> int:
    if isinstance(node, (Const, Var)):
        return 1
    if isinstance(node, Neg):
        return 1 + depth(node.operand)
    if isinstance(node, Call):
        return 1 + depth(node.arg)
    return 1 + max(depth(node.left), depth(node.right))
