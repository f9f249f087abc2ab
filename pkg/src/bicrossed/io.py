"""JSON file formats for groups, matched pairs, and deformation maps.

All emitted JSON is canonically ordered (sorted keys, compact separators,
trailing newline) so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .groups import FiniteGroup, closure, default_order_cap
from .pairs import MatchedPair
from .deform import DeformationMap
from .perms import CycleParseError, format_cycles, parse_cycles


class MalformedInput(ValueError):
    """Input file or document that does not match the expected schema."""


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _load_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path} is not valid JSON: {exc}") from exc


def group_from_dict(doc: Any, *, cap: int | None = None, name: str = "G") -> FiniteGroup:
    """Group from either {"degree", "generators"} or {"cayley", "labels"}."""
    if not isinstance(doc, dict):
        raise MalformedInput("group document must be a JSON object")
    if "generators" in doc:
        degree = doc.get("degree")
        if not isinstance(degree, int) or degree < 1:
            raise MalformedInput("generator form needs a positive integer degree")
        gens_raw = doc["generators"]
        if not isinstance(gens_raw, list) or not all(isinstance(g, str) for g in gens_raw):
            raise MalformedInput("generators must be a list of cycle strings")
        try:
            gens = [parse_cycles(text, degree) for text in gens_raw]
        except CycleParseError as exc:
            raise MalformedInput(str(exc)) from exc
        return closure(gens, degree=degree, cap=cap or default_order_cap(), name=name)
    if "cayley" in doc:
        cayley = doc["cayley"]
        if not isinstance(cayley, list) or not all(isinstance(row, list) for row in cayley):
            raise MalformedInput("cayley must be a list of rows")
        labels = doc.get("labels")
        if labels is not None and (
            not isinstance(labels, list) or len(labels) != len(cayley)
        ):
            raise MalformedInput("labels must match the table size")
        try:
            return FiniteGroup.from_cayley(cayley, labels, name=name)
        except ValueError as exc:
            raise MalformedInput(f"bad Cayley table: {exc}") from exc
    raise MalformedInput("group document needs either generators or a cayley table")


def group_to_dict(group: FiniteGroup) -> dict:
    """Prefer the generator form (it rebuilds the identical roster); fall back
    to the explicit table."""
    if group.generators is not None and group.perms is not None:
        return {
            "degree": group.perms[0].degree,
            "generators": [format_cycles(g) for g in group.generators],
        }
    return {
        "cayley": [list(row) for row in group.cayley],
        "labels": list(group.labels),
    }


def load_group(path: str | Path, *, cap: int | None = None) -> FiniteGroup:
    return group_from_dict(_load_json(path), cap=cap, name=Path(path).stem)


def pair_from_dict(doc: Any, *, cap: int | None = None) -> MatchedPair:
    if not isinstance(doc, dict):
        raise MalformedInput("matched-pair document must be a JSON object")
    for key in ("A", "H", "lact", "ract"):
        if key not in doc:
            raise MalformedInput(f"matched-pair document is missing {key!r}")
    A = group_from_dict(doc["A"], cap=cap, name="A")
    H = group_from_dict(doc["H"], cap=cap, name="H")
    lact, ract = doc["lact"], doc["ract"]
    for tag, table in (("lact", lact), ("ract", ract)):
        if (
            not isinstance(table, list)
            or len(table) != H.order
            or any(not isinstance(row, list) or len(row) != A.order for row in table)
        ):
            raise MalformedInput(f"{tag} must be a {H.order}x{A.order} table")
    bound = {"lact": A.order, "ract": H.order}
    for tag, table in (("lact", lact), ("ract", ract)):
        if any(not isinstance(x, int) or not 0 <= x < bound[tag] for row in table for x in row):
            raise MalformedInput(f"{tag} entry out of range")
    try:
        return MatchedPair(
            A, H, tuple(tuple(row) for row in lact), tuple(tuple(row) for row in ract)
        )
    except ValueError as exc:
        raise MalformedInput(str(exc)) from exc


def pair_to_dict(mp: MatchedPair) -> dict:
    return {
        "A": group_to_dict(mp.A),
        "H": group_to_dict(mp.H),
        "lact": [list(row) for row in mp.lact],
        "ract": [list(row) for row in mp.ract],
    }


def load_pair(path: str | Path, *, cap: int | None = None) -> MatchedPair:
    return pair_from_dict(_load_json(path), cap=cap)


def deformation_from_dict(
    doc: Any,
    *,
    pair: MatchedPair | None = None,
    base_dir: Path | None = None,
    cap: int | None = None,
) -> DeformationMap:
    """Deformation map from {"pair": <inline pair or path string>, "r": [...]}.

    A pre-loaded pair overrides the document's pair reference.
    """
    if not isinstance(doc, dict) or "r" not in doc:
        raise MalformedInput("deformation document needs an r table")
    if pair is None:
        ref = doc.get("pair")
        if isinstance(ref, str):
            path = (base_dir or Path(".")) / ref
            pair = load_pair(path, cap=cap)
        elif isinstance(ref, dict):
            pair = pair_from_dict(ref, cap=cap)
        else:
            raise MalformedInput("deformation document needs a pair (inline or path)")
    r = doc["r"]
    if (
        not isinstance(r, list)
        or len(r) != pair.H.order
        or any(not isinstance(x, int) or not 0 <= x < pair.A.order for x in r)
    ):
        raise MalformedInput(f"r must list {pair.H.order} A-indices")
    try:
        return DeformationMap(pair, tuple(r))
    except ValueError as exc:
        raise MalformedInput(f"not a deformation map: {exc}") from exc


def deformation_to_dict(rmap: DeformationMap, *, inline_pair: bool = True) -> dict:
    doc: dict = {"r": list(rmap.r)}
    if inline_pair:
        doc["pair"] = pair_to_dict(rmap.pair)
    return doc


def load_deformation(
    path: str | Path, *, pair: MatchedPair | None = None, cap: int | None = None
) -> DeformationMap:
    return deformation_from_dict(
        _load_json(path), pair=pair, base_dir=Path(path).parent, cap=cap
    )
