"""Grounding candidate functional relations into scene edge groups.

A proposal names two interacting items by label, either between the parts
of one object (part level) or between objects anywhere in the scene
(object level). Grounding instantiates every label-compatible ordered node
pair as a candidate edge and wraps them in an edge group that carries the
group's characteristic length scale and the factor plan deciding which
probabilistic treatment the group receives.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from funfact.scene import NodeKind, SceneFormatError, SceneGraph, SceneNode, distance

logger = logging.getLogger(__name__)


class ProposalError(ValueError):
    """A proposal that cannot be grounded against the given scene."""


@dataclass(frozen=True)
class FunctionalProposal:
    """One candidate interaction between two kinds of scene items.

    scope_object is the id of the owning object for part-level proposals
    and None for object-level ones. Part-level proposals are local by
    construction, so is_local only carries information at object level.
    """

    first_item: str
    second_item: str
    interaction: str
    confidence: float
    is_one_to_one: bool
    is_local: bool = True
    scope_object: str | None = None

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ProposalError(
                f"proposal {self.first_item!r}->{self.second_item!r} confidence "
                f"{self.confidence} outside [0, 1]"
            )

    @property
    def part_level(self) -> bool:
        return self.scope_object is not None


class FactorPlan(Enum):
    NONE = "none"
    PROXIMITY_ONLY = "proximity_only"
    PROXIMITY_AND_CARDINALITY = "proximity_and_cardinality"


def factor_plan(proposal: FunctionalProposal) -> FactorPlan:
    """Probabilistic treatment for a proposal's edges.

    Part-level relations always sit between physically adjacent elements,
    so they always get the proximity prior, plus cardinality preferences
    when the relation is one-to-one. Object-level relations get both for
    one-to-one relations, only the prior when the interaction requires
    physical proximity, and are otherwise left at their semantic
    confidence (a remote can operate a TV from anywhere).
    """
    if proposal.part_level:
        if proposal.is_one_to_one:
            return FactorPlan.PROXIMITY_AND_CARDINALITY
        return FactorPlan.PROXIMITY_ONLY
    if proposal.is_one_to_one:
        return FactorPlan.PROXIMITY_AND_CARDINALITY
    if proposal.is_local:
        return FactorPlan.PROXIMITY_ONLY
    return FactorPlan.NONE


@dataclass(frozen=True)
class CandidateEdge:
    id: str
    source: str
    target: str
    interaction: str
    semantic_confidence: float
    length: float
    group_id: str


@dataclass(frozen=True)
class EdgeGroup:
    """All candidate edges instantiated from one proposal."""

    id: str
    proposal: FunctionalProposal
    edges: tuple[CandidateEdge, ...]
    lam: float
    plan: FactorPlan


def _label_eq(a: str, b: str) -> bool:
    return a.strip().lower() == b.strip().lower()


def _resolve_item(scene: SceneGraph, proposal: FunctionalProposal, item: str) -> list[SceneNode]:
    if proposal.part_level:
        owner = scene.node(proposal.scope_object)  # raises on unknown id
        if owner.kind is not NodeKind.OBJECT:
            raise ProposalError(
                f"part-level proposal scoped to non-object node {owner.id!r}"
            )
        matches = [p for p in scene.parts_of(owner.id) if _label_eq(p.label, item)]
        if not matches and _label_eq(owner.label, item):
            # Naming the owning object itself targets the object node, so
            # part-to-whole relations (handle opens cabinet) stay expressible.
            matches = [owner]
        return matches
    return [n for n in scene.objects() if _label_eq(n.label, item)]


def instantiate_edges(
    scene: SceneGraph, proposal: FunctionalProposal
) -> list[tuple[SceneNode, SceneNode]]:
    """Ordered node pairs matching the proposal's item labels.

    The full cross product of first-item matches and second-item matches,
    minus self-pairs, in scene node order (first-item major). Unresolvable
    labels yield an empty list; the caller decides whether that warrants a
    warning. An unknown scope object raises.
    """
    sources = _resolve_item(scene, proposal, proposal.first_item)
    targets = _resolve_item(scene, proposal, proposal.second_item)
    return [(s, t) for s in sources for t in targets if s.id != t.id]


def _group_lambda(lengths: Sequence[float]) -> float:
    """Characteristic length: the lower-middle median of the group."""
    if not lengths:
        return 0.0
    ordered = sorted(lengths)
    return ordered[(len(ordered) - 1) // 2]


def build_all_groups(
    scene: SceneGraph, proposals: Sequence[FunctionalProposal]
) -> tuple[list[EdgeGroup], list[str]]:
    """Ground every proposal, returning groups plus grounding warnings.

    Groups are ordered deterministically: part-level proposals first,
    sorted by (scope object id, input position), then object-level ones in
    input position order. Ids follow that order. Proposals that resolve to
    no node pair still produce an (empty) group so reports stay aligned
    with the input.
    """
    def sort_key(item: tuple[int, FunctionalProposal]):
        idx, prop = item
        if prop.part_level:
            return (0, prop.scope_object, idx)
        return (1, "", idx)

    warnings: list[str] = []
    groups: list[EdgeGroup] = []
    for group_idx, (input_idx, prop) in enumerate(sorted(enumerate(proposals), key=sort_key)):
        gid = f"g{group_idx:03d}"
        pairs = instantiate_edges(scene, prop)
        if not pairs:
            warnings.append(
                f"proposal #{input_idx} {prop.first_item!r}->{prop.second_item!r} "
                f"matched no node pair"
            )
        lengths = [distance(s, t) for s, t in pairs]
        lam = _group_lambda(lengths)
        edges = tuple(
            CandidateEdge(
                id=f"{gid}.e{j:03d}",
                source=s.id,
                target=t.id,
                interaction=prop.interaction,
                semantic_confidence=prop.confidence,
                length=length,
                group_id=gid,
            )
            for j, ((s, t), length) in enumerate(zip(pairs, lengths))
        )
        groups.append(EdgeGroup(id=gid, proposal=prop, edges=edges, lam=lam, plan=factor_plan(prop)))
    for message in warnings:
        logger.warning("%s", message)
    return groups, warnings


def _proposal_from_dict(
    data: Mapping, scope_object: str | None, require_is_local: bool
) -> FunctionalProposal:
    try:
        return FunctionalProposal(
            first_item=str(data["first_item_name"]),
            second_item=str(data["second_item_name"]),
            interaction=str(data["interaction"]),
            confidence=float(data["confidence"]),
            is_one_to_one=bool(data["is_one_to_one"]),
            is_local=bool(data["is_local"]) if require_is_local else True,
            scope_object=scope_object,
        )
    except ProposalError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneFormatError(f"malformed proposal entry: {exc}") from exc


def proposals_from_dict(data: Mapping) -> list[FunctionalProposal]:
    if not isinstance(data, Mapping):
        raise SceneFormatError("proposal document must be a JSON object")
    out: list[FunctionalProposal] = []
    for entry in data.get("part_level", []):
        if not isinstance(entry, Mapping) or "object_id" not in entry:
            raise SceneFormatError("part-level entries need an 'object_id'")
        scope = str(entry["object_id"])
        for raw in entry.get("proposals", []):
            out.append(_proposal_from_dict(raw, scope, require_is_local=False))
    for raw in data.get("object_level", []):
        out.append(_proposal_from_dict(raw, None, require_is_local=True))
    return out


def proposals_to_dict(proposals: Sequence[FunctionalProposal]) -> dict:
    part_level: dict[str, list[dict]] = {}
    object_level: list[dict] = []
    for prop in proposals:
        entry = {
            "first_item_name": prop.first_item,
            "second_item_name": prop.second_item,
            "interaction": prop.interaction,
            "confidence": prop.confidence,
            "is_one_to_one": prop.is_one_to_one,
        }
        if prop.part_level:
            part_level.setdefault(prop.scope_object, []).append(entry)
        else:
            entry["is_local"] = prop.is_local
            object_level.append(entry)
    return {
        "part_level": [
            {"object_id": oid, "proposals": entries} for oid, entries in part_level.items()
        ],
        "object_level": object_level,
    }


def load_proposals(path: str | Path) -> list[FunctionalProposal]:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"not valid JSON: {exc}") from exc
    return proposals_from_dict(data)


def save_proposals(proposals: Sequence[FunctionalProposal], path: str | Path) -> None:
    Path(path).write_text(json.dumps(proposals_to_dict(proposals), indent=2) + "\n")
