"""Dyadic intervals of [0, 1).

An interval is addressed by (level, index): it covers
[index * 2^-level, (index + 1) * 2^-level).  The left half is the "minus"
child and the right half the "plus" child, so the Haar difference of a
function g is <g>_plus - <g>_minus.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator


@dataclass(frozen=True, order=True)
class DyadicInterval:
    level: int
    index: int

    def __post_init__(self) -> None:
        if self.level < 0:
            raise ValueError(f"level must be >= 0, got {self.level}")
        if not 0 <= self.index < 2 ** self.level:
            raise ValueError(f"index {self.index} out of range at level {self.level}")

    @property
    def length(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def left_endpoint(self) -> float:
        return self.index * self.length

    @property
    def right_endpoint(self) -> float:
        return (self.index + 1) * self.length

    @property
    def minus(self) -> "DyadicInterval":
        """Left child."""
        return DyadicInterval(self.level + 1, 2 * self.index)

    @property
    def plus(self) -> "DyadicInterval":
        """Right child."""
        return DyadicInterval(self.level + 1, 2 * self.index + 1)

    def children(self) -> tuple["DyadicInterval", "DyadicInterval"]:
        return self.minus, self.plus

    def parent(self) -> "DyadicInterval":
        if self.level == 0:
            raise ValueError("root interval has no parent")
        return DyadicInterval(self.level - 1, self.index // 2)

    def contains(self, other: "DyadicInterval") -> bool:
        """True if other is a (not necessarily proper) subinterval of self."""
        if other.level < self.level:
            return False
        return other.index >> (other.level - self.level) == self.index

    def cell_range(self, depth: int) -> tuple[int, int]:
        """Index range [start, stop) of the level-`depth` cells covered."""
        if depth < self.level:
            raise ValueError(f"interval at level {self.level} is finer than depth {depth}")
        width = 2 ** (depth - self.level)
        return self.index * width, (self.index + 1) * width


ROOT = DyadicInterval(0, 0)


def tree(root: DyadicInterval, max_level: int) -> Iterator[DyadicInterval]:
    """All dyadic subintervals of `root` with level <= max_level, preorder."""
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        if node.level < max_level:
            stack.append(node.plus)
            stack.append(node.minus)


def intervals_at_level(root: DyadicInterval, level: int) -> Iterator[DyadicInterval]:
    """Subintervals of `root` at the given absolute level."""
    if level < root.level:
        raise ValueError("level above root")
    width = 2 ** (level - root.level)
    for k in range(root.index * width, (root.index + 1) * width):
        yield DyadicInterval(level, k)
