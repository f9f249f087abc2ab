"""Finite groups on canonical index rosters: closure, subgroups, isomorphism search."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .budget import CapExceeded
from .perms import Perm, format_cycles
from .validation import ValidationReport


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"environment variable {name} must be an integer, got {raw!r}") from None


def default_order_cap() -> int:
    """Default closure / exhaustive-validation cap (env BICROSSED_MAX_ORDER)."""
    return _env_int("BICROSSED_MAX_ORDER", 200)


# Hard ceiling for materializing an order^2 Cayley table; groups above it stay
# permutation-backed (multiplication composes roster permutations on demand).
TABLE_GUARD = 2048


class FiniteGroup:
    """Group on element indices 0..order-1 with the identity at index 0.

    Multiplication comes either from an explicit Cayley table or, for
    permutation groups, from composing roster permutations; in the latter case
    the table is materialized lazily and only below ``TABLE_GUARD``.
    """

    def __init__(
        self,
        labels: Sequence[str],
        *,
        cayley: Sequence[Sequence[int]] | None = None,
        perms: Sequence[Perm] | None = None,
        generators: Sequence[Perm] | None = None,
        name: str = "G",
    ):
        if cayley is None and perms is None:
            raise ValueError("need a Cayley table or a permutation roster")
        self.labels = tuple(labels)
        self.perms = tuple(perms) if perms is not None else None
        self.generators = tuple(generators) if generators is not None else None
        self.name = name
        self._cayley = [tuple(row) for row in cayley] if cayley is not None else None
        self._perm_index = (
            {p.images: i for i, p in enumerate(self.perms)} if self.perms is not None else None
        )
        self._inverses: list[int] | None = None
        self._element_orders: list[int] | None = None
        self._gen_sequence: tuple[int, ...] | None = None
        if self.perms is not None and len(self._perm_index) != len(self.perms):
            raise ValueError("duplicate permutations in roster")

    # -- construction ------------------------------------------------------

    @classmethod
    def from_cayley(
        cls,
        cayley: Sequence[Sequence[int]],
        labels: Sequence[str] | None = None,
        *,
        name: str = "G",
        validate: bool = True,
        assoc_cap: int | None = None,
    ) -> "FiniteGroup":
        n = len(cayley)
        if labels is None:
            labels = ["e" if i == 0 else f"g{i}" for i in range(n)]
        if len(labels) != n:
            raise ValueError(f"{len(labels)} labels for order {n}")
        group = cls(labels, cayley=cayley, name=name)
        if validate:
            validate_group(group, assoc_cap=assoc_cap).raise_if_failed()
        return group

    @property
    def order(self) -> int:
        return len(self.labels)

    @property
    def cayley(self) -> list[tuple[int, ...]]:
        if self._cayley is None:
            if self.order > TABLE_GUARD:
                raise CapExceeded(
                    f"refusing to materialize a {self.order}x{self.order} Cayley table"
                )
            imgs = [p.images for p in self.perms]
            index = self._perm_index
            self._cayley = [
                tuple(index[tuple(map(a.__getitem__, b))] for b in imgs) for a in imgs
            ]
        return self._cayley

    def ensure_table(self, limit: int = 1024) -> None:
        """Materialize the Cayley table when the order is at most ``limit``."""
        if self._cayley is None and self.order <= limit:
            _ = self.cayley

    # -- arithmetic ---------------------------------------------------------

    def mul(self, i: int, j: int) -> int:
        if self._cayley is not None:
            return self._cayley[i][j]
        a = self.perms[i].images
        return self._perm_index[tuple(map(a.__getitem__, self.perms[j].images))]

    def inv(self, i: int) -> int:
        if self._inverses is None:
            if self.perms is not None:
                self._inverses = [self._perm_index[p.inverse().images] for p in self.perms]
            else:
                inv = [0] * self.order
                for a in range(self.order):
                    inv[a] = self._cayley[a].index(0)
                self._inverses = inv
        return self._inverses[i]

    @property
    def inverses(self) -> tuple[int, ...]:
        self.inv(0)
        return tuple(self._inverses)

    def element_order(self, i: int) -> int:
        return self.element_orders()[i]

    def element_orders(self) -> list[int]:
        if self._element_orders is None:
            orders = [1] * self.order
            for i in range(1, self.order):
                k, acc = 1, i
                while acc != 0:
                    acc = self.mul(acc, i)
                    k += 1
                orders[i] = k
            self._element_orders = orders
        return self._element_orders

    def order_multiset(self) -> tuple[int, ...]:
        return tuple(sorted(self.element_orders()))

    def is_abelian(self) -> bool:
        return all(
            self.mul(i, j) == self.mul(j, i)
            for i in range(self.order)
            for j in range(i + 1, self.order)
        )

    def center_size(self) -> int:
        return sum(
            1
            for i in range(self.order)
            if all(self.mul(i, j) == self.mul(j, i) for j in range(self.order))
        )

    def index_of(self, perm: Perm) -> int | None:
        if self._perm_index is None:
            return None
        return self._perm_index.get(perm.images)

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name}, order={self.order})"


def closure(
    generators: Iterable[Perm],
    *,
    degree: int | None = None,
    cap: int | None = None,
    name: str | None = None,
) -> FiniteGroup:
    """Group generated by permutations, on a canonical roster.

    Roster order is breadth-first word order from the generators, ties within
    a word-length level broken by image-sequence lexicographic order, so the
    output is byte-reproducible.  Raises CapExceeded past ``cap`` elements.
    """
    gens = sorted({g.images for g in generators})
    if cap is None:
        cap = default_order_cap()
    if degree is None:
        if not gens:
            raise ValueError("need a degree for an empty generating set")
        degree = len(gens[0])
    if any(len(g) != degree for g in gens):
        raise ValueError("generators must share one degree")
    ident = tuple(range(degree))
    roster: list[tuple[int, ...]] = [ident]
    index = {ident: 0}
    frontier = [ident]
    while frontier:
        fresh: set[tuple[int, ...]] = set()
        for w in frontier:
            for g in gens:
                prod = tuple(map(w.__getitem__, g))
                if prod not in index and prod not in fresh:
                    fresh.add(prod)
        frontier = sorted(fresh)
        for images in frontier:
            if len(roster) >= cap:
                raise CapExceeded(f"closure exceeded the order cap of {cap}")
            index[images] = len(roster)
            roster.append(images)
    perms = [Perm(images) for images in roster]
    labels = [format_cycles(p) for p in perms]
    return FiniteGroup(
        labels,
        perms=perms,
        generators=[Perm(g) for g in gens],
        name=name or f"<{','.join(format_cycles(Perm(g)) for g in gens) or '1'}>",
    )


def trivial_group(degree: int = 1) -> FiniteGroup:
    return closure([], degree=degree, name="1")


@lru_cache(maxsize=32)
def symmetric_group(n: int) -> FiniteGroup:
    """S_n on its adjacent-transposition generators (cached; roster only for n >= 7)."""
    if n < 1:
        raise ValueError(f"degree must be positive, got {n}")
    if n == 1:
        return trivial_group(1)
    gens = [
        Perm(tuple(i + 1 if j == i else i if j == i + 1 else j for j in range(n)))
        for i in range(n - 1)
    ]
    return closure(gens, cap=math.factorial(n) + 1, name=f"S{n}")


def cyclic_perm_group(n: int) -> FiniteGroup:
    """C_n generated by the n-cycle (1 2 ... n)."""
    if n < 1:
        raise ValueError(f"order must be positive, got {n}")
    if n == 1:
        return trivial_group(1)
    cycle = Perm(tuple((i + 1) % n for i in range(n)))
    return closure([cycle], cap=n + 1, name=f"C{n}")


def cyclic_table_group(n: int) -> FiniteGroup:
    """C_n as an abstract addition table (no permutation realization)."""
    if n < 1:
        raise ValueError(f"order must be positive, got {n}")
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    labels = ["e"] + [f"g^{i}" if i > 1 else "g" for i in range(1, n)]
    return FiniteGroup.from_cayley(table, labels, name=f"C{n}", validate=False)


def direct_product(g1: FiniteGroup, g2: FiniteGroup) -> FiniteGroup:
    """Direct product on pairs, indexed (i1 * |G2| + i2)."""
    n2 = g2.order
    table = [
        [g1.mul(a1, b1) * n2 + g2.mul(a2, b2) for b1 in range(g1.order) for b2 in range(n2)]
        for a1 in range(g1.order)
        for a2 in range(n2)
    ]
    labels = [
        f"({g1.labels[a1]},{g2.labels[a2]})" for a1 in range(g1.order) for a2 in range(n2)
    ]
    return FiniteGroup.from_cayley(
        table, labels, name=f"{g1.name}x{g2.name}", validate=False
    )


def abelian_group(factors: Sequence[int]) -> FiniteGroup:
    """Direct product of cyclic groups of the given orders."""
    if not factors:
        return FiniteGroup.from_cayley([[0]], ["e"], name="C1", validate=False)
    group = cyclic_table_group(factors[0])
    for n in factors[1:]:
        group = direct_product(group, cyclic_table_group(n))
    return group


def dihedral_table_group(m: int) -> FiniteGroup:
    """Dihedral group of order 2m on the presentation table (r^i s^j indexing).

    Product: (i1, j1)(i2, j2) = (i1 + (-1)^j1 i2 mod m, j1 + j2 mod 2); for
    m <= 2 this degenerates to the abelian groups of orders 2 and 4.
    """
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")

    def idx(i: int, j: int) -> int:
        return i * 2 + j

    table = [
        [
            idx((i1 + (i2 if j1 == 0 else -i2)) % m, (j1 + j2) % 2)
            for i2 in range(m)
            for j2 in range(2)
        ]
        for i1 in range(m)
        for j1 in range(2)
    ]
    labels = [
        ("e" if i == 0 and j == 0 else f"r^{i}s^{j}") for i in range(m) for j in range(2)
    ]
    return FiniteGroup.from_cayley(table, labels, name=f"D{2 * m}", validate=False)


# -- validation -------------------------------------------------------------


def validate_group(group: FiniteGroup, *, assoc_cap: int | None = None) -> ValidationReport:
    """Exhaustive Latin-square / identity / inverse / associativity check.

    Associativity over all triples is only run for orders up to ``assoc_cap``
    (a note records the skip otherwise).
    """
    if assoc_cap is None:
        assoc_cap = default_order_cap()
    n = group.order
    report = ValidationReport(subject=f"group {group.name}")
    table = group.cayley
    full = frozenset(range(n))
    for i, row in enumerate(table):
        report.checks += 1
        if frozenset(row) != full:
            report.add("latin-row", (i,), "row is not a permutation of indices")
    for j in range(n):
        report.checks += 1
        if frozenset(table[i][j] for i in range(n)) != full:
            report.add("latin-column", (j,), "column is not a permutation of indices")
    for i in range(n):
        report.checks += 2
        if table[0][i] != i:
            report.add("identity", (0, i), f"1*g{i} != g{i}")
        if table[i][0] != i:
            report.add("identity", (i, 0), f"g{i}*1 != g{i}")
    for i in range(n):
        report.checks += 1
        hits = [j for j in range(n) if table[i][j] == 0]
        if len(hits) != 1:
            report.add("inverse", (i,), f"{len(hits)} right inverses")
    if n <= assoc_cap:
        for a in range(n):
            ra = table[a]
            for b in range(n):
                ab = ra[b]
                rb = table[b]
                rab = table[ab]
                for c in range(n):
                    report.checks += 1
                    if rab[c] != ra[rb[c]]:
                        report.add("associativity", (a, b, c))
    else:
        report.notes.append(f"associativity skipped: order {n} above cap {assoc_cap}")
    return report


# -- subgroups ---------------------------------------------------------------


@dataclass(frozen=True)
class SubgroupHandle:
    """Sorted member indices of a subgroup inside a parent group."""

    parent: FiniteGroup
    members: tuple[int, ...]

    def __post_init__(self):
        if tuple(sorted(set(self.members))) != self.members:
            raise ValueError("members must be sorted and duplicate-free")
        if not self.members or self.members[0] != 0:
            raise ValueError("a subgroup must contain the identity index 0")

    @property
    def order(self) -> int:
        return len(self.members)

    def member_set(self) -> frozenset[int]:
        return frozenset(self.members)

    def position(self, parent_index: int) -> int:
        """Local index of a parent element; raises if not a member."""
        import bisect

        pos = bisect.bisect_left(self.members, parent_index)
        if pos == len(self.members) or self.members[pos] != parent_index:
            raise ValueError(f"index {parent_index} is not in the subgroup")
        return pos


def subgroup_closure(parent: FiniteGroup, gen_indices: Iterable[int]) -> SubgroupHandle:
    """Subgroup generated by parent indices (breadth-first index closure)."""
    gens = sorted(set(gen_indices) - {0})
    members = {0}
    frontier = [0]
    while frontier:
        fresh = []
        for w in frontier:
            for g in gens:
                prod = parent.mul(w, g)
                if prod not in members:
                    members.add(prod)
                    fresh.append(prod)
        frontier = fresh
    return SubgroupHandle(parent, tuple(sorted(members)))


def full_handle(parent: FiniteGroup) -> SubgroupHandle:
    return SubgroupHandle(parent, tuple(range(parent.order)))


def trivial_handle(parent: FiniteGroup) -> SubgroupHandle:
    return SubgroupHandle(parent, (0,))


def stabilizer_handle(group: FiniteGroup, point: int) -> SubgroupHandle:
    """Members of a permutation group fixing a 0-based point."""
    if group.perms is None:
        raise ValueError("stabilizer needs a permutation roster")
    members = tuple(i for i, p in enumerate(group.perms) if p.images[point] == point)
    return SubgroupHandle(group, members)


def validate_subgroup(handle: SubgroupHandle, *, product_cap: int | None = None) -> ValidationReport:
    """Closure-under-inverse check, plus full product closure up to a cap.

    The quadratic product scan is skipped (with a note) above ``product_cap``;
    handles built by subgroup_closure are closed by construction.
    """
    if product_cap is None:
        product_cap = default_order_cap()
    report = ValidationReport(subject="subgroup")
    members = handle.member_set()
    parent = handle.parent
    for i in handle.members:
        report.checks += 1
        if parent.inv(i) not in members:
            report.add("inverse-closure", (i,))
    if handle.order <= product_cap:
        for i in handle.members:
            for j in handle.members:
                report.checks += 1
                if parent.mul(i, j) not in members:
                    report.add("product-closure", (i, j))
    else:
        report.notes.append(
            f"product closure skipped: order {handle.order} above cap {product_cap}"
        )
    return report


def materialize_subgroup(handle: SubgroupHandle, *, name: str | None = None) -> FiniteGroup:
    """Standalone group on the handle's members, in sorted-parent-index order.

    Permutation-backed parents yield a permutation-backed subgroup (no eager
    Cayley table), so large stabilizer subgroups stay cheap.
    """
    parent = handle.parent
    members = handle.members
    labels = [parent.labels[m] for m in members]
    name = name or f"{parent.name}-sub{len(members)}"
    if parent.perms is not None:
        return FiniteGroup(labels, perms=[parent.perms[m] for m in members], name=name)
    local = {m: k for k, m in enumerate(members)}
    table = [[local[parent.mul(a, b)] for b in members] for a in members]
    return FiniteGroup(labels, cayley=table, name=name)


def minimal_generators(handle: SubgroupHandle) -> tuple[int, ...]:
    """Greedy generating set (parent indices): scan members, keep what grows the closure."""
    gens: list[int] = []
    span = {0}
    for m in handle.members:
        if m in span:
            continue
        gens.append(m)
        span = set(subgroup_closure(handle.parent, gens).members)
        if len(span) == handle.order:
            break
    return tuple(gens)


# -- morphisms and isomorphism ------------------------------------------------


@dataclass(frozen=True)
class GroupMap:
    """Map between groups given by images of source indices."""

    source: FiniteGroup
    target: FiniteGroup
    images: tuple[int, ...]

    def __post_init__(self):
        if len(self.images) != self.source.order:
            raise ValueError("image list length must equal the source order")

    @classmethod
    def identity(cls, group: FiniteGroup) -> "GroupMap":
        return cls(group, group, tuple(range(group.order)))

    @property
    def is_unit_preserving(self) -> bool:
        return self.images[0] == 0

    def is_morphism(self) -> bool:
        src, tgt, img = self.source, self.target, self.images
        return self.is_unit_preserving and all(
            img[src.mul(i, j)] == tgt.mul(img[i], img[j])
            for i in range(src.order)
            for j in range(src.order)
        )

    def is_bijective(self) -> bool:
        return (
            self.source.order == self.target.order
            and len(set(self.images)) == self.source.order
        )

    def inverted(self) -> "GroupMap":
        if not self.is_bijective():
            raise ValueError("only bijective maps can be inverted")
        inv = [0] * self.target.order
        for i, j in enumerate(self.images):
            inv[j] = i
        return GroupMap(self.target, self.source, tuple(inv))

    def apply(self, i: int) -> int:
        return self.images[i]


def _generator_sequence(group: FiniteGroup) -> tuple[int, ...]:
    """Greedy short generating sequence: each pick maximizes the closure grown."""
    if group._gen_sequence is not None:
        return group._gen_sequence
    gens: list[int] = []
    span = {0}
    while len(span) < group.order:
        best_idx, best_span = -1, None
        for e in range(1, group.order):
            if e in span:
                continue
            grown = set(subgroup_closure(group, gens + [e]).members)
            if best_span is None or len(grown) > len(best_span):
                best_idx, best_span = e, grown
                if len(grown) == group.order:
                    break
        gens.append(best_idx)
        span = best_span
    group._gen_sequence = tuple(gens)
    return group._gen_sequence


def _extend_hom(
    g1: FiniteGroup, g2: FiniteGroup, gens: Sequence[int], imgs: Sequence[int]
) -> dict[int, int] | None:
    """Partial morphism on <gens> determined by generator images; None on conflict."""
    phi = {0: 0}
    frontier = [0]
    while frontier:
        fresh = []
        for x in frontier:
            fx = phi[x]
            for g, t in zip(gens, imgs):
                y = g1.mul(x, g)
                fy = g2.mul(fx, t)
                known = phi.get(y)
                if known is None:
                    phi[y] = fy
                    fresh.append(y)
                elif known != fy:
                    return None
        frontier = fresh
    return phi


def all_isomorphisms(g1: FiniteGroup, g2: FiniteGroup) -> Iterator[GroupMap]:
    """All isomorphisms g1 -> g2 in deterministic order (may be empty).

    Pre-screens by order, element-order multiset and center size, then
    backtracks over images of a greedy generating sequence of g1.
    """
    if g1.order != g2.order:
        return
    if g1.order_multiset() != g2.order_multiset():
        return
    if g1.center_size() != g2.center_size():
        return
    gens = _generator_sequence(g1)
    if not gens:
        yield GroupMap(g1, g2, (0,))
        return
    orders1 = g1.element_orders()
    orders2 = g2.element_orders()
    candidates = [
        [t for t in range(g2.order) if orders2[t] == orders1[g]] for g in gens
    ]

    def backtrack(k: int, chosen: list[int]) -> Iterator[GroupMap]:
        if k == len(gens):
            phi = _extend_hom(g1, g2, gens, chosen)
            if phi is not None and len(phi) == g1.order and len(set(phi.values())) == g1.order:
                images = tuple(phi[i] for i in range(g1.order))
                yield GroupMap(g1, g2, images)
            return
        for t in candidates[k]:
            chosen.append(t)
            if _extend_hom(g1, g2, gens[: k + 1], chosen) is not None:
                yield from backtrack(k + 1, chosen)
            chosen.pop()

    yield from backtrack(0, [])


def are_isomorphic(g1: FiniteGroup, g2: FiniteGroup) -> GroupMap | None:
    """First isomorphism witness in canonical order, or None."""
    for iso in all_isomorphisms(g1, g2):
        return iso
    return None


def automorphisms(group: FiniteGroup) -> list[GroupMap]:
    return list(all_isomorphisms(group, group))


def regular_embedding(group: FiniteGroup, *, cap: int = 8) -> tuple[FiniteGroup, SubgroupHandle]:
    """Left-translation embedding of a group of order n into S_n.

    Roster index 0 (the identity) corresponds to the point n, other indices to
    their own point, so the image meets the stabilizer of n trivially and
    complements it.
    """
    n = group.order
    if n > cap:
        raise CapExceeded(f"regular embedding capped at order {cap}, got {n}")
    sym = symmetric_group(n)
    point = lambda x: n - 1 if x == 0 else x - 1
    indices = []
    for h in range(n):
        images = [0] * n
        for x in range(n):
            images[point(x)] = point(group.mul(h, x))
        idx = sym.index_of(Perm(tuple(images)))
        if idx is None:
            raise RuntimeError("translation permutation missing from the symmetric roster")
        indices.append(idx)
    return sym, SubgroupHandle(sym, tuple(sorted(indices)))
