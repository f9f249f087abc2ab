"""Direct complement enumeration and the complement <-> deformation-map dictionary.

This is the independent oracle against the deformation-map enumerator: it
finds complements of a subgroup A in G by a coset-transversal backtracking
search over the group itself, never touching the deformation law.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .budget import Budget, BudgetExceeded, CapExceeded
from .deform import ClassificationResult, DeformationMap, classify, deform_group
from .groups import (
    FiniteGroup,
    GroupMap,
    SubgroupHandle,
    are_isomorphic,
    closure,
    cyclic_table_group,
    dihedral_table_group,
    direct_product,
    materialize_subgroup,
    validate_subgroup,
)
from .pairs import (
    Factorization,
    MatchedPair,
    bicrossed_product,
    canonical_matched_pair,
    check_factorization,
)
from .perms import Perm, format_cycles


@dataclass
class ComplementSet:
    """All complements of A in G, partitioned by isomorphism type.

    ``iso_classes`` holds member positions (representative first) and
    ``witnesses`` an isomorphism onto the class representative for every
    non-representative member.
    """

    G: FiniteGroup
    A: SubgroupHandle
    complements: list[SubgroupHandle]
    iso_classes: list[list[int]]
    witnesses: dict[int, GroupMap] = field(default_factory=dict)

    @property
    def index(self) -> int:
        return len(self.iso_classes)


@dataclass(frozen=True)
class FactorizationIndex:
    """The factorization index together with its witnessing complement set."""

    index: int
    complements: ComplementSet


def _coset_labels(G: FiniteGroup, A: SubgroupHandle) -> tuple[list[int], list[list[int]]]:
    """Right-coset id per element (ids in first-seen roster order) and members per id."""
    labels = [-1] * G.order
    members: list[list[int]] = []
    for g in range(G.order):
        if labels[g] != -1:
            continue
        cid = len(members)
        block = sorted(G.mul(a, g) for a in A.members)
        for x in block:
            labels[x] = cid
        members.append(block)
    return labels, members


def _cyclic_admissible(G: FiniteGroup, A_set: frozenset[int], target: int) -> list[bool]:
    """Elements whose cyclic subgroup could sit inside a complement of order ``target``:
    the order divides the target and no non-identity power falls into A."""
    ok = [False] * G.order
    ok[0] = True
    for g in range(1, G.order):
        power = g
        length = 1
        good = True
        while power != 0:
            if power in A_set or length > target:
                good = False
                break
            power = G.mul(power, g)
            length += 1
        ok[g] = good and target % length == 0
    return ok


def _make_mul(G: FiniteGroup):
    """Fast local multiplication closure (bypasses method dispatch)."""
    if G._cayley is not None:
        table = G._cayley
        return lambda i, j: table[i][j]
    if G.perms is not None:
        imgs = [p.images for p in G.perms]
        index = G._perm_index
        return lambda i, j: index[tuple(map(imgs[i].__getitem__, imgs[j]))]
    return G.mul


class _TransversalSearch:
    """Backtracking search for complements as closed right transversals of A.

    State is one growing closure (element list plus coset -> element map); two
    closure elements may never share an A-coset, which caps the size at the
    complement order and keeps the intersection with A trivial in one test.
    """

    def __init__(self, G, coset_of, coset_members, admissible, target, limit):
        self.mul = _make_mul(G)
        self.coset_of = coset_of
        self.coset_members = coset_members
        self.admissible = admissible
        self.target = target
        self.limit = limit
        self.budget = Budget(limit)
        self.out: list[tuple[int, ...]] = []
        self.elems: list[int] = [0]
        self.by_coset: dict[int, int] = {0: 0}

    def _grow(self, cand: int) -> int:
        """Close over ``cand``; returns elements added (0 = collision/abort).

        On abort the state is rolled back by the caller via the return count
        convention: -1 signals failure after ``popped`` additions were undone
        here already.
        """
        mul = self.mul
        coset_of = self.coset_of
        elems = self.elems
        by_coset = self.by_coset
        budget = self.budget
        added = 0
        start = len(elems)
        cid = coset_of[cand]
        if cid in by_coset:
            return -1 if by_coset[cid] != cand else 0
        elems.append(cand)
        by_coset[cid] = cand
        added += 1
        frontier = start
        ok = True
        while frontier < len(elems) and ok:
            y = elems[frontier]
            frontier += 1
            i = 0
            while i < len(elems):
                x = elems[i]
                i += 1
                for prod in (mul(x, y), mul(y, x)):
                    budget.charge()
                    pcid = coset_of[prod]
                    known = by_coset.get(pcid)
                    if known is None:
                        elems.append(prod)
                        by_coset[pcid] = prod
                        added += 1
                    elif known != prod:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if not ok or self.target % len(elems) != 0:
            for _ in range(added):
                gone = elems.pop()
                del by_coset[coset_of[gone]]
            return -1
        return added

    def run(self, cand: int) -> None:
        added = self._grow(cand)
        if added < 0:
            return
        if len(self.elems) == self.target:
            self.out.append(tuple(sorted(self.elems)))
        else:
            covered = self.by_coset
            target_coset = next(
                cid for cid in range(len(self.coset_members)) if cid not in covered
            )
            admissible = self.admissible
            for nxt in self.coset_members[target_coset]:
                if admissible[nxt]:
                    self.run(nxt)
        for _ in range(added):
            gone = self.elems.pop()
            del self.by_coset[self.coset_of[gone]]


_SEARCH_STATE: dict = {}


def _search_init(G, coset_of, coset_members, admissible, target, limit) -> None:
    _SEARCH_STATE.update(
        G=G,
        coset_of=coset_of,
        coset_members=coset_members,
        admissible=admissible,
        target=target,
        limit=limit,
    )


def _search_branch(cand: int) -> list[tuple[int, ...]]:
    s = _SEARCH_STATE
    search = _TransversalSearch(
        s["G"], s["coset_of"], s["coset_members"], s["admissible"], s["target"], s["limit"]
    )
    search.run(cand)
    return search.out


def find_complements(
    G: FiniteGroup,
    A: SubgroupHandle,
    *,
    budget: int | None = None,
    workers: int = 1,
) -> ComplementSet:
    """All subgroups H with G = A*H and trivial intersection, canonically ordered.

    Backtracks over generator candidates restricted to elements whose A-coset
    is not yet covered (a complement is a right transversal of A, so its
    generating sequence under this rule is unique and every complement is
    discovered exactly once), pruning branches whose partial closure exceeds
    the complement order, fails Lagrange, or meets A beyond the identity.
    The budget bounds closure products per top-level branch.
    """
    if A.parent is not G:
        raise ValueError("handle does not belong to the given group")
    validate_subgroup(A).raise_if_failed()
    if G.order % A.order != 0:
        raise ValueError(
            f"|A| = {A.order} does not divide |G| = {G.order}: no complement possible"
        )
    target = G.order // A.order
    A_set = A.member_set()
    found: list[tuple[int, ...]]
    if target == 1:
        found = [(0,)]
    else:
        coset_of, coset_members = _coset_labels(G, A)
        admissible = _cyclic_admissible(G, A_set, target)
        # the identity (roster index 0) is scanned first, so A's coset has id 0
        first_candidates = [c for c in coset_members[1] if admissible[c]]
        found = []
        if workers == 1:
            _search_init(G, coset_of, coset_members, admissible, target, budget)
            for cand in first_candidates:
                found.extend(_search_branch(cand))
        else:
            with ProcessPoolExecutor(
                max_workers=workers,
                initializer=_search_init,
                initargs=(G, coset_of, coset_members, admissible, target, budget),
            ) as pool:
                for out in pool.map(_search_branch, first_candidates, chunksize=8):
                    found.extend(out)
    found = sorted(set(found))
    complements = [SubgroupHandle(G, members) for members in found]

    iso_classes: list[list[int]] = []
    witnesses: dict[int, GroupMap] = {}
    rep_groups: list[FiniteGroup] = []
    for pos, handle in enumerate(complements):
        group = materialize_subgroup(handle)
        placed = False
        for cls, rep in zip(iso_classes, rep_groups):
            iso = are_isomorphic(group, rep)
            if iso is not None:
                cls.append(pos)
                witnesses[pos] = iso
                placed = True
                break
        if not placed:
            iso_classes.append([pos])
            rep_groups.append(group)
    return ComplementSet(G, A, complements, iso_classes, witnesses)


def complement_to_deformation_map(
    f: Factorization, mp: MatchedPair, complement: SubgroupHandle
) -> DeformationMap:
    """The map r with graph {r(h) h} equal to the complement, element for element.

    Each complement element decomposes uniquely as a*h; sending h to a defines
    r.  Raises if the h-projection is not bijective (the handle was not a
    complement of A).
    """
    r: list[int | None] = [None] * f.H.order
    for member in complement.members:
        apos, hpos = f.decomposition[member]
        if r[hpos] is not None:
            raise ValueError("complement meets a right coset of A twice; not a transversal")
        r[hpos] = apos
    if any(entry is None for entry in r):
        raise ValueError("complement misses a right coset of A; not a transversal")
    return DeformationMap(mp, tuple(r))


def deformation_map_to_complement(f: Factorization, rmap: DeformationMap) -> SubgroupHandle:
    """The subgroup {r(h) h : h in H} of G; always a complement of A."""
    members = sorted(
        f.G.mul(f.A.members[rmap.r[hpos]], f.H.members[hpos]) for hpos in range(f.H.order)
    )
    handle = SubgroupHandle(f.G, tuple(members))
    if check_factorization(f.G, f.A, handle) is None:
        raise ValueError("graph of the deformation map is not a complement")
    return handle


def factorization_index_direct(
    G: FiniteGroup,
    A: SubgroupHandle,
    *,
    budget: int | None = None,
    workers: int = 1,
) -> FactorizationIndex:
    """Number of isomorphism classes of A-complements (0 when none exist)."""
    if G.order % A.order != 0:
        return FactorizationIndex(0, ComplementSet(G, A, [], [], {}))
    complements = find_complements(G, A, budget=budget, workers=workers)
    return FactorizationIndex(complements.index, complements)


@dataclass
class RigidityReport:
    """Outcome of the unique-complement check for a semidirect product."""

    product_order: int
    direct_index: int
    classified_index: int
    complement_count: int
    all_isomorphic_to_h: bool

    @property
    def ok(self) -> bool:
        return self.direct_index == 1 and self.classified_index == 1 and self.all_isomorphic_to_h

    def as_dict(self) -> dict:
        return {
            "product_order": self.product_order,
            "direct_index": self.direct_index,
            "classified_index": self.classified_index,
            "complement_count": self.complement_count,
            "all_isomorphic_to_h": self.all_isomorphic_to_h,
            "ok": self.ok,
        }


def check_semidirect_rigidity(
    mp: MatchedPair, *, budget: int | None = None, workers: int = 1
) -> RigidityReport:
    """For a pair with trivial right action: both index computations must give 1.

    Builds the semidirect product, runs the direct complement search and the
    deformation classification, and checks every complement found is
    isomorphic to H.  A failed assertion would contradict the rigidity of
    semidirect products, so it raises instead of reporting.
    """
    if not mp.right_trivial():
        raise ValueError("rigidity check needs a trivial right action")
    product, iA, iH = bicrossed_product(mp)
    f = check_factorization(product, iA, iH)
    if f is None:
        raise RuntimeError("embeddings of a bicrossed product failed to factorize it")
    direct = factorization_index_direct(product, iA, budget=budget, workers=workers)
    classified = classify(canonical_matched_pair(f), budget=budget, workers=workers)
    h_group = materialize_subgroup(iH)
    all_iso = all(
        are_isomorphic(materialize_subgroup(handle), h_group) is not None
        for handle in direct.complements.complements
    )
    report = RigidityReport(
        product_order=product.order,
        direct_index=direct.index,
        classified_index=classified.index,
        complement_count=len(direct.complements.complements),
        all_isomorphic_to_h=all_iso,
    )
    if not report.ok:
        raise RuntimeError(
            f"semidirect rigidity violated (direct={direct.index}, "
            f"classified={classified.index}); this flags an implementation bug"
        )
    return report


# -- the alternating-group double factorization -------------------------------


@dataclass
class AlternatingReport:
    """Representation-level verification of the two factorizations of A_{4k}."""

    k: int
    degree: int
    dihedral_generators: tuple[str, str]
    abelian_generators: tuple[str, str]
    checks: dict[str, bool]
    complements_isomorphic: bool
    degenerate: bool
    index_lower_bound: int

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "degree": self.degree,
            "dihedral_generators": list(self.dihedral_generators),
            "abelian_generators": list(self.abelian_generators),
            "checks": dict(self.checks),
            "complements_isomorphic": self.complements_isomorphic,
            "degenerate": self.degenerate,
            "index_lower_bound": self.index_lower_bound,
            "ok": self.ok,
        }


def _alternating_generators(k: int) -> tuple[Perm, Perm, Perm, Perm]:
    """The four generators inside A_{4k} (1-based formulas, degree 4k).

    tau pairs the odd point 2j-1 with the even point 2((k+2-j) mod 2k); this
    keeps tau an even fixed-point-free involution whose conjugation inverts
    sigma, so the pair generates a dihedral group of order 4k.
    """
    n = 4 * k
    sigma = [0] * n
    # (1 3 5 ... 4k-1)(2 4 6 ... 4k)
    odds = list(range(0, n, 2))
    evens = list(range(1, n, 2))
    for cyc in (odds, evens):
        for i, p in enumerate(cyc):
            sigma[p] = cyc[(i + 1) % len(cyc)]
    tau = list(range(n))
    # (1 2k+2)(2 2k+1)(3 2k)(4 2k-1) ...: odd 2j-1 <-> even 2((k+2-j) mod 2k)
    for j in range(1, 2 * k + 1):
        m = (k + 2 - j) % (2 * k) or 2 * k
        odd_pt, even_pt = 2 * j - 2, 2 * m - 1
        tau[odd_pt] = even_pt
        tau[even_pt] = odd_pt
    sigma_p = [0] * n
    # (1 2 ... 2k)(2k+1 ... 4k)
    for block in (list(range(0, 2 * k)), list(range(2 * k, n))):
        for i, p in enumerate(block):
            sigma_p[p] = block[(i + 1) % len(block)]
    tau_p = list(range(n))
    # (1 2k+1)(2 2k+2) ... (2k 4k)
    for i in range(2 * k):
        tau_p[i], tau_p[i + 2 * k] = tau_p[i + 2 * k], tau_p[i]
    return Perm(tuple(sigma)), Perm(tuple(tau)), Perm(tuple(sigma_p)), Perm(tuple(tau_p))


def alternating_double_factorization(k: int, *, cap: int = 3) -> AlternatingReport:
    """Verify both printed complements of A_{4k-1} in A_{4k} at permutation level.

    Never materializes A_{4k}: membership is parity plus fixed-point tests and
    the factorization follows from a cardinality count once the intersections
    are trivial.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if k > cap:
        raise CapExceeded(f"alternating check capped at k = {cap}, got {k}")
    n = 4 * k
    last = n - 1
    sigma, tau, sigma_p, tau_p = _alternating_generators(k)
    dihedral = closure([sigma, tau], cap=4 * n, name=f"D-part-{n}")
    abelian = closure([sigma_p, tau_p], cap=4 * n, name=f"C-part-{n}")

    checks: dict[str, bool] = {}
    checks["generators_even"] = all(p.is_even() for p in (sigma, tau, sigma_p, tau_p))
    checks["dihedral_order"] = dihedral.order == n
    checks["abelian_order"] = abelian.order == n
    checks["sigma_order"] = sigma.order() == 2 * k
    checks["tau_involution"] = tau.order() == 2
    checks["dihedral_relation"] = (tau * sigma * tau).images == sigma.inverse().images
    checks["abelian_commutes"] = (sigma_p * tau_p).images == (tau_p * sigma_p).images
    for name, grp in (("dihedral", dihedral), ("abelian", abelian)):
        checks[f"{name}_even"] = all(p.is_even() for p in grp.perms)
        checks[f"{name}_meets_stabilizer_trivially"] = all(
            p.images[last] != last for p in grp.perms[1:]
        )
    # |A_{4k-1}| * 4k = |A_{4k}| certifies the factorization by cardinality
    checks["cardinality"] = math.factorial(n - 1) // 2 * n == math.factorial(n) // 2

    checks["dihedral_type"] = are_isomorphic(dihedral, dihedral_table_group(2 * k)) is not None
    abelian_model = direct_product(cyclic_table_group(2), cyclic_table_group(2 * k))
    checks["abelian_type"] = are_isomorphic(abelian, abelian_model) is not None

    iso = are_isomorphic(dihedral, abelian)
    report = AlternatingReport(
        k=k,
        degree=n,
        dihedral_generators=(format_cycles(sigma), format_cycles(tau)),
        abelian_generators=(format_cycles(sigma_p), format_cycles(tau_p)),
        checks=checks,
        complements_isomorphic=iso is not None,
        degenerate=k == 1,
        index_lower_bound=2 if iso is None else 1,
    )
    return report
