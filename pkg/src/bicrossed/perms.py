"""Permutations of {1..n}: dense image tuples, composition, cycle notation."""

from __future__ import annotations

import math
from dataclasses import dataclass


class CycleParseError(ValueError):
    """Cycle-notation text that does not describe a permutation."""


@dataclass(frozen=True)
class Perm:
    """Bijection of {1..n}, stored as 0-based images (``images[i]`` is where i goes).

    Points are 1-based in cycle notation and all I/O; the 0-based shift is
    internal only.  Composition is "right factor acts first":
    ``(p * q)(i) = p(q(i))``.
    """

    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError(f"not a bijection of 0..{len(self.images) - 1}: {self.images!r}")

    @property
    def degree(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, degree: int) -> "Perm":
        return cls(tuple(range(degree)))

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def __mul__(self, other: "Perm") -> "Perm":
        if self.degree != other.degree:
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")
        img = self.images
        return Perm(tuple(map(img.__getitem__, other.images)))

    def inverse(self) -> "Perm":
        inv = [0] * self.degree
        for i, j in enumerate(self.images):
            inv[j] = i
        return Perm(tuple(inv))

    def apply(self, point: int) -> int:
        """Image of a 0-based point."""
        return self.images[point]

    def order(self) -> int:
        return math.lcm(*(len(c) for c in self._all_cycles())) if self.degree else 1

    def is_even(self) -> bool:
        return (self.degree - len(self._all_cycles())) % 2 == 0

    def moved_points(self) -> tuple[int, ...]:
        """0-based points not fixed."""
        return tuple(i for i, j in enumerate(self.images) if i != j)

    def _all_cycles(self) -> list[tuple[int, ...]]:
        seen = [False] * self.degree
        out = []
        for start in range(self.degree):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            nxt = self.images[start]
            while nxt != start:
                cyc.append(nxt)
                seen[nxt] = True
                nxt = self.images[nxt]
            out.append(tuple(cyc))
        return out

    def cycles(self) -> list[tuple[int, ...]]:
        """Non-trivial cycles as 1-based tuples, each starting at its smallest point."""
        out = []
        for cyc in self._all_cycles():
            if len(cyc) < 2:
                continue
            pivot = cyc.index(min(cyc))
            rotated = cyc[pivot:] + cyc[:pivot]
            out.append(tuple(p + 1 for p in rotated))
        out.sort(key=lambda c: c[0])
        return out

    def __str__(self) -> str:
        return format_cycles(self)


def compose(p: Perm, q: Perm) -> Perm:
    """Product "apply q first, then p"; degrees must match."""
    return p * q


def parse_cycles(text: str, degree: int) -> Perm:
    """Parse disjoint cycles of 1-based points into a permutation.

    Points inside a cycle are separated by whitespace or commas; points not
    named are fixed; the empty string is the identity.
    """
    if degree < 1:
        raise CycleParseError(f"degree must be positive, got {degree}")
    images = list(range(degree))
    seen: set[int] = set()
    depth = 0
    token = ""
    cycle: list[int] = []

    def flush_token():
        nonlocal token
        if not token:
            return
        try:
            point = int(token)
        except ValueError:
            raise CycleParseError(f"bad point {token!r} in {text!r}") from None
        if not 1 <= point <= degree:
            raise CycleParseError(f"point {point} out of range 1..{degree}")
        if point in seen:
            raise CycleParseError(f"point {point} repeated in {text!r}")
        seen.add(point)
        cycle.append(point - 1)
        token = ""

    def flush_cycle():
        flush_token()
        for i, p in enumerate(cycle):
            images[p] = cycle[(i + 1) % len(cycle)]
        cycle.clear()

    for ch in text:
        if ch == "(":
            if depth:
                raise CycleParseError(f"nested parenthesis in {text!r}")
            depth = 1
        elif ch == ")":
            if not depth:
                raise CycleParseError(f"unbalanced parenthesis in {text!r}")
            flush_cycle()
            depth = 0
        elif ch in " ,\t":
            flush_token()
        elif ch.isdigit():
            if not depth:
                raise CycleParseError(f"point outside parentheses in {text!r}")
            token += ch
        else:
            raise CycleParseError(f"unexpected character {ch!r} in {text!r}")
    if depth:
        raise CycleParseError(f"unbalanced parenthesis in {text!r}")
    return Perm(tuple(images))


def format_cycles(p: Perm) -> str:
    """Cycle notation with 1-based points; the identity prints as "()"."""
    cycles = p.cycles()
    if not cycles:
        return "()"
    return "".join("(" + " ".join(str(pt) for pt in c) + ")" for c in cycles)
