"""Deformation maps, r-deformations, and the classification of complements.

A deformation map of a matched pair is a table r: H -> A with r(1) = 1 whose
entries satisfy, for all g, h in H,

    r((h <| r(g)) g) = r(h) (h |> r(g)).

Each such r deforms H into a new group H_r on the same roster with product
``h * g = (h <| r(g)) g``; classifying the maps up to the unit-preserving
re-labellings that intertwine these products classifies the complements.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .budget import Budget, BudgetExceeded
from .groups import FiniteGroup, GroupMap, are_isomorphic
from .pairs import MatchedPair, bicrossed_product, validate_matched_pair
from .validation import ValidationReport


def validate_deformation_map(mp: MatchedPair, r: Sequence[int]) -> ValidationReport:
    """Check r(1) = 1 and the deformation law over all |H|^2 argument pairs."""
    A, H = mp.A, mp.H
    report = ValidationReport(subject="deformation map")
    if len(r) != H.order:
        raise ValueError(f"r has {len(r)} entries for |H| = {H.order}")
    if any(not 0 <= x < A.order for x in r):
        raise ValueError("r entry out of range")
    report.checks += 1
    if r[0] != 0:
        report.add("unit", (0,), "r(1) != 1")
    lact, ract = mp.lact, mp.ract
    for h in range(H.order):
        for g in range(H.order):
            report.checks += 1
            rg = r[g]
            lhs = r[H.mul(ract[h][rg], g)]
            rhs = A.mul(r[h], lact[h][rg])
            if lhs != rhs:
                report.add("compatibility", (h, g))
    return report


@dataclass(frozen=True)
class DeformationMap:
    """A valid deformation table attached to its matched pair."""

    pair: MatchedPair
    r: tuple[int, ...]

    def __post_init__(self):
        validate_deformation_map(self.pair, self.r).raise_if_failed()

    @classmethod
    def trivial(cls, mp: MatchedPair) -> "DeformationMap":
        return cls(mp, tuple([0] * mp.H.order))

    def is_trivial(self) -> bool:
        return all(x == 0 for x in self.r)


@dataclass(frozen=True)
class DeformedGroup:
    """The group H_r: H's roster with the deformed product (h <| r(g)) g."""

    base: FiniteGroup
    provenance: DeformationMap

    @property
    def group(self) -> FiniteGroup:
        return self.base


def deform_group(mp: MatchedPair, rmap: DeformationMap) -> DeformedGroup:
    """Build H_r, validate it as a group, and check the closed-form inverse.

    The inverse of h in H_r is h^-1 <| r(h)^-1, which is verified against the
    built table entry by entry.
    """
    _require_same_pair(mp, rmap)
    A, H = mp.A, mp.H
    r = rmap.r
    ract = mp.ract
    n = H.order
    table = [[H.mul(ract[h][r[g]], g) for g in range(n)] for h in range(n)]
    deformed = FiniteGroup.from_cayley(
        table, H.labels, name=f"{H.name}_r", validate=True, assoc_cap=max(n, 1)
    )
    for h in range(n):
        closed_form = ract[H.inv(h)][A.inv(r[h])]
        if deformed.inv(h) != closed_form:
            raise ValueError(f"deformed inverse of {H.labels[h]} differs from the closed form")
    return DeformedGroup(deformed, rmap)


def deformed_matched_pair(mp: MatchedPair, rmap: DeformationMap) -> MatchedPair:
    """The matched pair (A, H_r) with left action r(h)(h |> a) r(h <| a)^-1.

    The right action is unchanged; the output passes full validation.
    """
    _require_same_pair(mp, rmap)
    A, H = mp.A, mp.H
    r = rmap.r
    lact, ract = mp.lact, mp.ract
    deformed = deform_group(mp, rmap).base
    new_lact = tuple(
        tuple(
            A.mul(A.mul(r[h], lact[h][a]), A.inv(r[ract[h][a]]))
            for a in range(A.order)
        )
        for h in range(H.order)
    )
    pair = MatchedPair(A, deformed, new_lact, ract)
    validate_matched_pair(pair).raise_if_failed()
    return pair


def psi_isomorphism(mp: MatchedPair, rmap: DeformationMap) -> GroupMap:
    """The isomorphism (a, h) -> (a r(h), h) from A >< H_r onto A >< H.

    Verified to be a bijective morphism stabilizing A; its inverse is
    (a, h) -> (a r(h)^-1, h).
    """
    _require_same_pair(mp, rmap)
    A, H = mp.A, mp.H
    r = rmap.r
    nh = H.order
    source, _, _ = bicrossed_product(deformed_matched_pair(mp, rmap), validate=False)
    target, tA, _ = bicrossed_product(mp, validate=False)
    images = tuple(A.mul(a, r[h]) * nh + h for a in range(A.order) for h in range(nh))
    psi = GroupMap(source, target, images)
    if not (psi.is_bijective() and psi.is_morphism()):
        raise ValueError("deformation does not induce an isomorphism of the products")
    for a, idx in enumerate(tA.members):
        if psi.images[idx] != idx:
            raise ValueError("product isomorphism does not stabilize A")
    inverse = psi.inverted()
    for a in range(A.order):
        for h in range(nh):
            if inverse.images[a * nh + h] != A.mul(a, A.inv(r[h])) * nh + h:
                raise ValueError("inverse of the product isomorphism has unexpected form")
    return psi


# -- enumeration ---------------------------------------------------------------


def _propagate(
    mp: MatchedPair,
    r: list[int | None],
    fresh: list[int],
    trail: list[int],
    budget: Budget,
) -> bool:
    """Close the partial table under forced deformation-law instances.

    Each evaluation of the law costs one budget unit.  Newly forced values are
    appended to ``trail`` for undo.  Returns False on contradiction.
    """
    A, H = mp.A, mp.H
    lact, ract = mp.lact, mp.ract
    queue = list(fresh)
    while queue:
        p = queue.pop()
        assigned = [h for h in range(H.order) if r[h] is not None]
        for q in assigned:
            for h, g in ((p, q), (q, p)):
                if r[h] is None or r[g] is None:
                    continue
                budget.charge()
                rg = r[g]
                pos = H.mul(ract[h][rg], g)
                val = A.mul(r[h], lact[h][rg])
                have = r[pos]
                if have is None:
                    r[pos] = val
                    trail.append(pos)
                    queue.append(pos)
                elif have != val:
                    return False
    return True


def _enumerate_serial(
    mp: MatchedPair, prefix: dict[int, int], budget: Budget
) -> list[tuple[int, ...]]:
    """All completions of a partial assignment, as sorted r-tuples."""
    A, H = mp.A, mp.H
    n = H.order
    r: list[int | None] = [None] * n
    r[0] = 0
    trail0: list[int] = []
    for pos, val in prefix.items():
        if r[pos] is None:
            r[pos] = val
            trail0.append(pos)
        elif r[pos] != val:
            return []
    if not _propagate(mp, r, list(prefix.keys()) or [0], trail0, budget):
        return []
    found: list[tuple[int, ...]] = []

    def descend() -> None:
        pos = next((h for h in range(n) if r[h] is None), None)
        if pos is None:
            found.append(tuple(r))  # every law instance was checked by propagation
            return
        for val in range(A.order):
            trail = [pos]
            r[pos] = val
            if _propagate(mp, r, [pos], trail, budget):
                descend()
            for t in trail:
                r[t] = None

    try:
        descend()
    except BudgetExceeded as exc:
        raise BudgetExceeded(str(exc), partial=sorted(found)) from None
    return found


_WORKER_STATE: dict = {}


def _worker_init(mp: MatchedPair) -> None:
    _WORKER_STATE["mp"] = mp


def _worker_enumerate(args: tuple[dict[int, int], int | None]) -> list[tuple[int, ...]]:
    prefix, limit = args
    return _enumerate_serial(_WORKER_STATE["mp"], prefix, Budget(limit))


def enumerate_deformation_maps(
    mp: MatchedPair,
    *,
    budget: int | None = None,
    workers: int = 1,
) -> list[DeformationMap]:
    """All deformation maps of the pair, sorted by their r-tuples.

    Backtracks over assignments of r in roster order, propagating every
    deformation-law instance whose arguments are already assigned; instances
    that force a value at an unassigned point assign it immediately.  The
    budget bounds law evaluations per top-level branch (one branch per
    candidate value of the first free position), which keeps serial and
    parallel runs byte-identical; on exhaustion the exception carries the
    flagged partial results.
    """
    n = mp.H.order
    if n == 1:
        return [DeformationMap.trivial(mp)]
    if workers < 1:
        raise ValueError("workers must be >= 1")
    mp.A.ensure_table()
    branches = [({1: val}, budget) for val in range(mp.A.order)]
    results: list[tuple[int, ...]] = []
    partial_failure: BudgetExceeded | None = None
    if workers == 1:
        for prefix, limit in branches:
            try:
                results.extend(_enumerate_serial(mp, prefix, Budget(limit)))
            except BudgetExceeded as exc:
                results.extend(exc.partial)
                partial_failure = exc
                break
    else:
        try:
            with ProcessPoolExecutor(
                max_workers=workers, initializer=_worker_init, initargs=(mp,)
            ) as pool:
                for out in pool.map(_worker_enumerate, branches):
                    results.extend(out)
        except BudgetExceeded as exc:
            partial_failure = exc
    if partial_failure is not None:
        raise BudgetExceeded(str(partial_failure), partial=sorted(set(results)))
    return [DeformationMap(mp, r) for r in sorted(set(results))]


# -- equivalence and classification --------------------------------------------


@dataclass(frozen=True)
class EquivalenceWitness:
    """Unit-preserving permutation of H intertwining two deformed products."""

    sigma: tuple[int, ...]


def check_equivalence_witness(
    mp: MatchedPair,
    r: Sequence[int],
    big_r: Sequence[int],
    sigma: Sequence[int],
) -> ValidationReport:
    """Direct check of the intertwining law for sigma against maps r and R:

    sigma((h <| r(g)) g) = (sigma(h) <| R(sigma(g))) sigma(g) for all g, h.
    """
    A, H = mp.A, mp.H
    ract = mp.ract
    report = ValidationReport(subject="equivalence witness")
    report.checks += 1
    if sigma[0] != 0:
        report.add("unit", (0,), "sigma(1) != 1")
    if sorted(sigma) != list(range(H.order)):
        report.add("bijection", (), "sigma is not a permutation of H")
        return report
    for h in range(H.order):
        for g in range(H.order):
            report.checks += 1
            lhs = sigma[H.mul(ract[h][r[g]], g)]
            rhs = H.mul(ract[sigma[h]][big_r[sigma[g]]], sigma[g])
            if lhs != rhs:
                report.add("intertwine", (h, g))
    return report


def are_equivalent(
    mp: MatchedPair, rmap: DeformationMap, big_rmap: DeformationMap
) -> EquivalenceWitness | None:
    """A witness permutation iff the two deformed groups are isomorphic.

    Decided by isomorphism search between the deformed Cayley tables (any
    unit-preserving bijection intertwining the deformed products is exactly an
    isomorphism H_r -> H_R); the returned witness is re-checked against the
    intertwining law directly.
    """
    _require_same_pair(mp, rmap)
    _require_same_pair(mp, big_rmap)
    iso = are_isomorphic(deform_group(mp, rmap).base, deform_group(mp, big_rmap).base)
    if iso is None:
        return None
    witness = EquivalenceWitness(iso.images)
    check_equivalence_witness(mp, rmap.r, big_rmap.r, witness.sigma).raise_if_failed()
    return witness


@dataclass
class ClassificationResult:
    """Deformation maps grouped into equivalence classes.

    ``classes`` holds member positions into ``all_maps`` (representative
    first); ``witnesses`` maps each non-representative position to a witness
    against its class representative; ``index`` is the factorization index.
    """

    pair: MatchedPair
    all_maps: list[DeformationMap]
    classes: list[list[int]]
    witnesses: dict[int, EquivalenceWitness] = field(default_factory=dict)
    deformed_types: list[DeformedGroup] = field(default_factory=list)

    @property
    def index(self) -> int:
        return len(self.classes)

    @property
    def representatives(self) -> list[DeformationMap]:
        return [self.all_maps[cls[0]] for cls in self.classes]


def classify(
    mp: MatchedPair,
    *,
    maps: Sequence[DeformationMap] | None = None,
    budget: int | None = None,
    workers: int = 1,
) -> ClassificationResult:
    """Partition all deformation maps by equivalence; representatives are the
    first members in enumeration order and classes are pairwise non-isomorphic."""
    if maps is None:
        maps = enumerate_deformation_maps(mp, budget=budget, workers=workers)
    classes: list[list[int]] = []
    witnesses: dict[int, EquivalenceWitness] = {}
    rep_groups: list[DeformedGroup] = []
    for pos, rmap in enumerate(maps):
        deformed = deform_group(mp, rmap)
        placed = False
        for cls, rep_group in zip(classes, rep_groups):
            rep_map = maps[cls[0]]
            iso = are_isomorphic(deformed.base, rep_group.base)
            if iso is not None:
                witness = EquivalenceWitness(iso.images)
                check_equivalence_witness(
                    mp, rmap.r, rep_map.r, witness.sigma
                ).raise_if_failed()
                cls.append(pos)
                witnesses[pos] = witness
                placed = True
                break
        if not placed:
            classes.append([pos])
            rep_groups.append(deformed)
    return ClassificationResult(
        pair=mp,
        all_maps=list(maps),
        classes=classes,
        witnesses=witnesses,
        deformed_types=rep_groups,
    )


def _require_same_pair(mp: MatchedPair, rmap: DeformationMap) -> None:
    if rmap.pair is mp:
        return
    if (
        rmap.pair.lact != mp.lact
        or rmap.pair.ract != mp.ract
        or rmap.pair.A.order != mp.A.order
        or rmap.pair.H.order != mp.H.order
    ):
        raise ValueError("deformation map belongs to a different matched pair")
