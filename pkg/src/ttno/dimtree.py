"""Dimension trees: ordered recursive partitions of the modes ``1..d``.

Every node owns a consecutive leaf range ``[lo, hi]``; this range is unique
within a tree and serves as the node key in all per-node maps.
Trees print and parse in a nested-tuple form, e.g. ``((1,2,3),(4,5,6))``.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from typing import Iterator

__all__ = [
    "DimensionTree",
    "leaf",
    "node",
    "balanced_binary",
    "degenerate",
    "flat",
    "parse_tree",
    "from_nested",
    "make_tree",
]

Key = tuple[int, int]


@dataclass(frozen=True)
class DimensionTree:
    lo: int
    hi: int
    children: tuple["DimensionTree", ...] = field(default=())

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty leaf range [{self.lo}, {self.hi}]")
        if not self.children:
            if self.lo != self.hi:
                raise ValueError(f"leaf must hold a single mode, got [{self.lo}, {self.hi}]")
            return
        if len(self.children) < 2:
            raise ValueError("internal node needs at least two children")
        if self.children[0].lo != self.lo or self.children[-1].hi != self.hi:
            raise ValueError(f"children do not cover [{self.lo}, {self.hi}]")
        for left, right in zip(self.children, self.children[1:]):
            if left.hi + 1 != right.lo:
                raise ValueError(
                    f"children [{left.lo},{left.hi}] and [{right.lo},{right.hi}] "
                    "are not ordered consecutive ranges"
                )

    @property
    def key(self) -> Key:
        return (self.lo, self.hi)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def size(self) -> int:
        """Number of leaves ``d_τ``."""
        return self.hi - self.lo + 1

    @property
    def leaves(self) -> list[int]:
        return list(range(self.lo, self.hi + 1))

    @property
    def height(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(c.height for c in self.children)

    @property
    def is_binary(self) -> bool:
        return all(len(t.children) == 2 for t in self.subtrees())

    def nodes(self) -> Iterator["DimensionTree"]:
        """All nodes in pre-order."""
        yield self
        for c in self.children:
            yield from c.nodes()

    def postorder(self) -> Iterator["DimensionTree"]:
        for c in self.children:
            yield from c.postorder()
        yield self

    def subtrees(self) -> list["DimensionTree"]:
        """Internal nodes in pre-order."""
        return [t for t in self.nodes() if not t.is_leaf]

    def leaf_nodes(self) -> list["DimensionTree"]:
        return [t for t in self.nodes() if t.is_leaf]

    def find(self, key: Key) -> "DimensionTree":
        t = self
        while True:
            if t.key == tuple(key):
                return t
            for c in t.children:
                if c.lo <= key[0] and key[1] <= c.hi:
                    t = c
                    break
            else:
                raise KeyError(f"node {tuple(key)} is not in tree {self}")

    def contains(self, key: Key) -> bool:
        try:
            self.find(key)
        except KeyError:
            return False
        return True

    def complement_leaves(self, sub: "DimensionTree | Key") -> list[int]:
        """Sorted leaves of ``self`` outside the node ``sub``."""
        key = sub.key if isinstance(sub, DimensionTree) else tuple(sub)
        t = self.find(key)
        return [ell for ell in self.leaves if not t.lo <= ell <= t.hi]

    def to_nested(self):
        if self.is_leaf:
            return self.lo
        return tuple(c.to_nested() for c in self.children)

    def __str__(self) -> str:
        if self.is_leaf:
            return str(self.lo)
        return "(" + ",".join(str(c) for c in self.children) + ")"


def leaf(ell: int) -> DimensionTree:
    return DimensionTree(ell, ell)


def node(*children: DimensionTree) -> DimensionTree:
    return DimensionTree(children[0].lo, children[-1].hi, tuple(children))


def _balanced(lo: int, hi: int) -> DimensionTree:
    if lo == hi:
        return leaf(lo)
    split = lo + math.ceil((hi - lo + 1) / 2) - 1
    return node(_balanced(lo, split), _balanced(split + 1, hi))


def balanced_binary(d: int) -> DimensionTree:
    """Balanced binary tree; odd ranges give the extra leaf to the left child."""
    if d < 1:
        raise ValueError("d must be at least 1")
    return _balanced(1, d)


def degenerate(d: int) -> DimensionTree:
    """Right comb ``(1,(2,(3,...)))``: the tensor-train / MPS tree."""
    if d < 1:
        raise ValueError("d must be at least 1")
    t = leaf(d)
    for ell in range(d - 1, 0, -1):
        t = node(leaf(ell), t)
    return t


def flat(d: int) -> DimensionTree:
    """Height-one tree ``(1,2,...,d)`` (Tucker format)."""
    if d < 2:
        raise ValueError("a flat tree needs d >= 2")
    return node(*(leaf(ell) for ell in range(1, d + 1)))


def from_nested(obj) -> DimensionTree:
    """Build a tree from nested tuples/lists of integers."""
    if isinstance(obj, bool):
        raise ValueError("tree entries must be integers")
    if isinstance(obj, int):
        return leaf(obj)
    if isinstance(obj, (tuple, list)):
        if len(obj) == 1:
            return from_nested(obj[0])
        return node(*(from_nested(o) for o in obj))
    raise ValueError(f"cannot read tree entry {obj!r}")


def parse_tree(text: str, d: int | None = None) -> DimensionTree:
    """Parse the nested-tuple form and check that the leaves are ``1..d``."""
    try:
        obj = ast.literal_eval(text.strip())
    except (ValueError, SyntaxError) as exc:
        raise ValueError(f"malformed tree {text!r}") from exc
    t = from_nested(obj)
    if t.lo != 1 or (d is not None and t.hi != d):
        raise ValueError(f"tree {text!r} does not have leaves 1..{d if d else t.hi}")
    return t


def make_tree(kind: str, d: int) -> DimensionTree:
    """Resolve ``balanced``, ``degenerate``, ``flat`` or ``custom:<nested>``."""
    if kind == "balanced":
        return balanced_binary(d)
    if kind == "degenerate":
        return degenerate(d)
    if kind == "flat":
        return flat(d)
    if kind.startswith("custom:"):
        return parse_tree(kind[len("custom:"):], d)
    raise ValueError(f"unknown tree kind {kind!r}")
