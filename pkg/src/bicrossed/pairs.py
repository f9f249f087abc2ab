"""Matched pairs of groups: mutual actions, bicrossed products, exact factorizations.

Table conventions used throughout: ``lact[h][a]`` is the A-index of ``h |> a``
(the left action of H on the set A) and ``ract[h][a]`` is the H-index of
``h <| a`` (the right action of A on the set H), rows indexed by H, columns by
A, in roster order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .groups import (
    FiniteGroup,
    GroupMap,
    SubgroupHandle,
    materialize_subgroup,
    validate_subgroup,
)
from .validation import ValidationReport


@dataclass(frozen=True)
class MatchedPair:
    """Two groups with mutual actions satisfying the matched-pair laws."""

    A: FiniteGroup
    H: FiniteGroup
    lact: tuple[tuple[int, ...], ...]
    ract: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        nh, na = self.H.order, self.A.order
        if len(self.lact) != nh or len(self.ract) != nh:
            raise ValueError("action tables must have one row per H element")
        if any(len(row) != na for row in self.lact) or any(
            len(row) != na for row in self.ract
        ):
            raise ValueError("action tables must have one column per A element")

    def left_trivial(self) -> bool:
        return all(row == tuple(range(self.A.order)) for row in self.lact)

    def right_trivial(self) -> bool:
        return all(
            entry == h for h, row in enumerate(self.ract) for entry in row
        )

    @classmethod
    def trivial(cls, A: FiniteGroup, H: FiniteGroup) -> "MatchedPair":
        """Both actions trivial (the direct-product matched pair)."""
        lact = tuple(tuple(range(A.order)) for _ in range(H.order))
        ract = tuple(tuple([h] * A.order) for h in range(H.order))
        return cls(A, H, lact, ract)


@dataclass(frozen=True)
class Factorization:
    """Exact factorization G = A*H with the unique-decomposition table.

    ``decomposition[g]`` is the pair (position in A's handle, position in H's
    handle) with g = a*h.
    """

    G: FiniteGroup
    A: SubgroupHandle
    H: SubgroupHandle
    decomposition: tuple[tuple[int, int], ...]


def check_factorization(
    G: FiniteGroup, A: SubgroupHandle, H: SubgroupHandle
) -> Factorization | None:
    """The factorization record if G = A*H with trivial intersection, else None.

    In the finite case trivial intersection plus |A|*|H| = |G| suffices; the
    decomposition table is still built and sanity-checked.
    """
    for handle, tag in ((A, "A"), (H, "H")):
        if handle.parent is not G:
            raise ValueError(f"handle {tag} does not belong to the given group")
        validate_subgroup(handle).raise_if_failed()
    if A.order * H.order != G.order:
        return None
    if len(A.member_set() & H.member_set()) != 1:
        return None
    decomposition: list[tuple[int, int] | None] = [None] * G.order
    for apos, a in enumerate(A.members):
        for hpos, h in enumerate(H.members):
            g = G.mul(a, h)
            if decomposition[g] is not None:
                return None
            decomposition[g] = (apos, hpos)
    if any(entry is None for entry in decomposition):
        return None
    return Factorization(G, A, H, tuple(decomposition))


def canonical_matched_pair(f: Factorization) -> MatchedPair:
    """Matched pair read off a factorization: h*a = (h |> a)(h <| a) in G.

    A and H are materialized standalone in sorted-parent-index order, matching
    the handle positions used by the decomposition table.
    """
    A_group = materialize_subgroup(f.A, name=f"{f.G.name}.A")
    H_group = materialize_subgroup(f.H, name=f"{f.G.name}.H")
    lact = []
    ract = []
    for h in f.H.members:
        lrow = []
        rrow = []
        for a in f.A.members:
            apos, hpos = f.decomposition[f.G.mul(h, a)]
            lrow.append(apos)
            rrow.append(hpos)
        lact.append(tuple(lrow))
        ract.append(tuple(rrow))
    return MatchedPair(A_group, H_group, tuple(lact), tuple(ract))


def validate_matched_pair(mp: MatchedPair) -> ValidationReport:
    """Exhaustive check of the two action laws, the two mixed product laws and
    the normalization conditions; the report lists every violated instance."""
    A, H = mp.A, mp.H
    A.ensure_table()
    H.ensure_table()
    lact, ract = mp.lact, mp.ract
    na, nh = A.order, H.order
    report = ValidationReport(subject="matched pair")

    for a in range(na):
        report.checks += 2
        if lact[0][a] != a:
            report.add("left-unit", (0, a), "1 |> a != a")
        if ract[0][a] != 0:
            report.add("normalization", (0, a), "1 <| a != 1")
    for h in range(nh):
        report.checks += 2
        if ract[h][0] != h:
            report.add("right-unit", (h, 0), "h <| 1 != h")
        if lact[h][0] != 0:
            report.add("normalization", (h, 0), "h |> 1 != 1")

    # (h g) |> a = h |> (g |> a)
    for h in range(nh):
        for g in range(nh):
            hg = H.mul(h, g)
            lrow_hg = lact[hg]
            for a in range(na):
                report.checks += 1
                if lrow_hg[a] != lact[h][lact[g][a]]:
                    report.add("left-action", (h, g, a))

    # h <| (a b) = (h <| a) <| b
    for h in range(nh):
        rrow = ract[h]
        for a in range(na):
            ha = rrow[a]
            for b in range(na):
                report.checks += 1
                if rrow[A.mul(a, b)] != ract[ha][b]:
                    report.add("right-action", (h, a, b))

    # h |> (a b) = (h |> a)((h <| a) |> b)
    for h in range(nh):
        lrow = lact[h]
        rrow = ract[h]
        for a in range(na):
            la, ha = lrow[a], rrow[a]
            for b in range(na):
                report.checks += 1
                if lrow[A.mul(a, b)] != A.mul(la, lact[ha][b]):
                    report.add("left-product", (h, a, b))

    # (h g) <| a = (h <| (g |> a))(g <| a)
    for h in range(nh):
        for g in range(nh):
            hg = H.mul(h, g)
            for a in range(na):
                report.checks += 1
                if ract[hg][a] != H.mul(ract[h][lact[g][a]], ract[g][a]):
                    report.add("right-product", (h, g, a))
    return report


def bicrossed_product(
    mp: MatchedPair, *, validate: bool = True
) -> tuple[FiniteGroup, SubgroupHandle, SubgroupHandle]:
    """Group on A x H with law (a,h)(b,g) = (a(h |> b), (h <| b)g).

    Returns the product plus the canonical embeddings of A and H (as subgroup
    handles); these two always form an exact factorization of the product.
    """
    if validate:
        validate_matched_pair(mp).raise_if_failed()
    A, H = mp.A, mp.H
    na, nh = A.order, H.order
    lact, ract = mp.lact, mp.ract
    table = []
    for a in range(na):
        for h in range(nh):
            row = []
            lrow, rrow = lact[h], ract[h]
            for b in range(na):
                for g in range(nh):
                    row.append(A.mul(a, lrow[b]) * nh + H.mul(rrow[b], g))
            table.append(row)
    labels = [f"({A.labels[a]},{H.labels[h]})" for a in range(na) for h in range(nh)]
    product = FiniteGroup.from_cayley(
        table, labels, name=f"{A.name}><{H.name}", validate=False
    )
    iA = SubgroupHandle(product, tuple(a * nh for a in range(na)))
    iH = SubgroupHandle(product, tuple(range(nh)))
    return product, iA, iH


def multiplication_map(f: Factorization, mp: MatchedPair) -> GroupMap:
    """The bijective morphism (a,h) -> a*h from the bicrossed product onto G.

    Requires mp to be the canonical matched pair of f; the map is verified to
    be a bijective morphism fixing A pointwise and any failure raises.
    """
    product, iA, _ = bicrossed_product(mp, validate=False)
    nh = mp.H.order
    images = []
    for apos in range(mp.A.order):
        a = f.A.members[apos]
        for hpos in range(nh):
            images.append(f.G.mul(a, f.H.members[hpos]))
    gm = GroupMap(product, f.G, tuple(images))
    if not gm.is_bijective():
        raise ValueError("multiplication map is not bijective; not an exact factorization")
    if not gm.is_morphism():
        raise ValueError("multiplication map is not a morphism; pair does not match the factorization")
    for apos, prod_idx in enumerate(iA.members):
        if gm.images[prod_idx] != f.A.members[apos]:
            raise ValueError("multiplication map does not stabilize A")
    return gm


def morphism_from_pair(
    mp_src: MatchedPair,
    mp_tgt: MatchedPair,
    r: Sequence[int],
    v: Sequence[int],
) -> GroupMap | None:
    """Morphism between bicrossed products determined by a pair of maps.

    ``r`` maps H_src to A, ``v`` maps H_src to H_tgt, both unit-preserving.
    The four compatibility laws tying (r, v) to the two pairs are checked
    exhaustively; when they all hold the morphism (a, h) -> (a r(h), v(h)) is
    returned, flagged bijective exactly when v is bijective.  None otherwise.
    """
    A = mp_src.A
    if mp_tgt.A is not A and (
        mp_tgt.A.order != A.order or mp_tgt.A.cayley != A.cayley
    ):
        raise ValueError("source and target pairs must share the same acting group A")
    nh_src, nh_tgt = mp_src.H.order, mp_tgt.H.order
    if len(r) != nh_src or len(v) != nh_src:
        raise ValueError("r and v must have one entry per source H element")
    if r[0] != 0 or v[0] != 0:
        raise ValueError("r and v must be unit-preserving")
    if any(not 0 <= x < A.order for x in r) or any(not 0 <= x < nh_tgt for x in v):
        raise ValueError("r or v entry out of range")

    lact_s, ract_s = mp_src.lact, mp_src.ract
    lact_t, ract_t = mp_tgt.lact, mp_tgt.ract
    Hs, Ht = mp_src.H, mp_tgt.H

    for h in range(nh_src):
        for a in range(A.order):
            # h |>' a = r(h) (v(h) |> a) r(h <|' a)^-1
            expected = A.mul(A.mul(r[h], lact_t[v[h]][a]), A.inv(r[ract_s[h][a]]))
            if lact_s[h][a] != expected:
                return None
            # v(h <|' a) = v(h) <| a
            if v[ract_s[h][a]] != ract_t[v[h]][a]:
                return None
    for h in range(nh_src):
        for g in range(nh_src):
            hg = Hs.mul(h, g)
            # r(h g) = r(h) (v(h) |> r(g))
            if r[hg] != A.mul(r[h], lact_t[v[h]][r[g]]):
                return None
            # v(h g) = (v(h) <| r(g)) v(g)
            if v[hg] != Ht.mul(ract_t[v[h]][r[g]], v[g]):
                return None

    src_prod, _, _ = bicrossed_product(mp_src, validate=False)
    tgt_prod, _, _ = bicrossed_product(mp_tgt, validate=False)
    images = tuple(
        A.mul(a, r[h]) * nh_tgt + v[h] for a in range(A.order) for h in range(nh_src)
    )
    return GroupMap(src_prod, tgt_prod, images)


@dataclass
class ExtensionResult:
    """Outcome of extending generator-level actions to full tables."""

    pair: MatchedPair | None
    conflict: str | None = None
    unresolved: int = 0
    report: ValidationReport | None = None

    @property
    def ok(self) -> bool:
        return self.pair is not None


def _bfs_words(group: FiniteGroup, gens: Sequence[int]) -> list[tuple[int, int] | None]:
    """Write each element as (earlier element, generator); None for the identity.

    Breadth-first over right multiplication, so parents always precede
    children; raises if the generators do not span the group.
    """
    parents: list[tuple[int, int] | None] = [None] * group.order
    seen = {0}
    frontier = [0]
    while frontier:
        fresh = []
        for w in frontier:
            for g in gens:
                e = group.mul(w, g)
                if e not in seen:
                    seen.add(e)
                    parents[e] = (w, g)
                    fresh.append(e)
        frontier = fresh
    if len(seen) != group.order:
        raise ValueError("the given generators do not generate the group")
    return parents


def extend_actions_from_generators(
    A: FiniteGroup,
    H: FiniteGroup,
    gen_actions: Mapping[tuple[int, int], tuple[int, int]],
) -> ExtensionResult:
    """Extend actions given on generator pairs to full matched-pair tables.

    ``gen_actions[(h, a)] = (h |> a, h <| a)`` must be supplied for every pair
    of a chosen H-generator and a chosen A-generator (the key sets define the
    generating sets).  Entries are derived by saturating the action laws and
    the two mixed product laws; every derived entry is consistency-checked and
    the completed tables must pass full validation, otherwise the extension is
    reported as absent with the first conflicting word pair named.
    """
    h_gens = sorted({h for h, _ in gen_actions})
    a_gens = sorted({a for _, a in gen_actions})
    for h in h_gens:
        for a in a_gens:
            if (h, a) not in gen_actions:
                raise ValueError(f"missing generator action for pair ({h}, {a})")
    a_words = _bfs_words(A, a_gens)
    h_words = _bfs_words(H, h_gens)

    na, nh = A.order, H.order
    lact: list[list[int | None]] = [[None] * na for _ in range(nh)]
    ract: list[list[int | None]] = [[None] * na for _ in range(nh)]
    conflict: str | None = None

    def describe(h: int, a: int) -> str:
        return f"(h={H.labels[h]}, a={A.labels[a]})"

    queue: list[tuple[int, int]] = []
    # waiting[(h, a)] holds derivations suspended on that cell becoming known
    waiting: dict[tuple[int, int], list[tuple]] = {}
    h_gen_set = set(h_gens)

    def fill(h: int, a: int, la: int, ra: int, source: str) -> None:
        nonlocal conflict
        if lact[h][a] is not None:
            if (lact[h][a], ract[h][a]) != (la, ra):
                if conflict is None:
                    conflict = f"inconsistent value at {describe(h, a)} via {source}"
            return
        lact[h][a] = la
        ract[h][a] = ra
        queue.append((h, a))

    def known(h: int, a: int) -> bool:
        return lact[h][a] is not None

    def attempt_a_step(h: int, a: int, g: int) -> None:
        """From (h, a) and the A-generator g derive the cell (h, a*g)."""
        h1 = ract[h][a]
        if known(h1, g):
            fill(
                h,
                A.mul(a, g),
                A.mul(lact[h][a], lact[h1][g]),
                ract[h1][g],
                f"A-word step {describe(h, a)}*{A.labels[g]}",
            )
        else:
            waiting.setdefault((h1, g), []).append(("A", h, a, g))

    def attempt_h_step(w: int, v: int, a: int) -> None:
        """From (v, a), v an H-generator, and (w, v |> a) derive (w*v, a)."""
        va = lact[v][a]
        if known(w, va):
            fill(
                H.mul(w, v),
                a,
                lact[w][va],
                H.mul(ract[w][va], ract[v][a]),
                f"H-word step {H.labels[w]}*{describe(v, a)}",
            )
        else:
            waiting.setdefault((w, va), []).append(("H", w, v, a))

    def process(h: int, a: int) -> None:
        la, ra = lact[h][a], ract[h][a]
        # (h <| a) |> a^-1 = (h |> a)^-1 and (h <| a) <| a^-1 = h
        fill(ra, A.inv(a), A.inv(la), h, f"A-inverse of {describe(h, a)}")
        # h^-1 |> (h |> a) = a and h^-1 <| (h |> a) = (h <| a)^-1
        fill(H.inv(h), la, a, H.inv(ra), f"H-inverse of {describe(h, a)}")
        for g in a_gens:
            attempt_a_step(h, a, g)
        if h in h_gen_set:
            for w in range(nh):
                attempt_h_step(w, h, a)
        for item in waiting.pop((h, a), []):
            if item[0] == "A":
                attempt_a_step(item[1], item[2], item[3])
            else:
                attempt_h_step(item[1], item[2], item[3])

    for a in range(na):
        fill(0, a, a, 0, "unit row")
    for h in range(1, nh):
        fill(h, 0, 0, h, "unit column")
    for (h, a), (la, ra) in sorted(gen_actions.items()):
        if not 0 <= la < na or not 0 <= ra < nh:
            raise ValueError(f"generator action out of range at ({h}, {a})")
        fill(h, a, la, ra, "given")

    while queue and conflict is None:
        cell = queue.pop()
        process(*cell)

    if conflict is not None:
        return ExtensionResult(pair=None, conflict=conflict)

    unresolved = sum(1 for row in lact for entry in row if entry is None)
    if unresolved:
        return ExtensionResult(
            pair=None,
            conflict=f"saturation stalled with {unresolved} underived entries",
            unresolved=unresolved,
        )
    pair = MatchedPair(
        A,
        H,
        tuple(tuple(row) for row in lact),
        tuple(tuple(row) for row in ract),
    )
    report = validate_matched_pair(pair)
    if not report.ok:
        v = report.violations[0]
        return ExtensionResult(
            pair=None,
            conflict=f"derived tables violate {v.rule} at {v.where}",
            report=report,
        )
    return ExtensionResult(pair=pair, report=report)
