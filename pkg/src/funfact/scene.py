"""Object- and part-centric 3D scene graphs with box geometry.

A scene graph is a forest of depth at most two: object nodes at the root,
functional part nodes (knobs, handles, buttons) attached to exactly one
object. Every node carries an axis-aligned 3D bounding box, a center point
and an optional confidence. The geometric helpers shared by fusion and
evaluation live here too: 3D box IoU and the 2D filter that rejects part
detections which are really background or the whole object.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator, Mapping, Sequence

Vec3 = tuple[float, float, float]
Vec2 = tuple[float, float]

# 2D part-vs-object filter: a part detection must cover at least this share
# of its own box with the object box, and at most this share of the object.
PART_OVERLAP_MIN = 0.3
OBJECT_OVERLAP_MAX = 0.7


class SceneFormatError(ValueError):
    """Scene content that cannot be parsed into the schema at all."""


class SceneValidationError(ValueError):
    """Structurally invalid scene content; carries the offending node id."""

    def __init__(self, message: str, node_id: str | None = None):
        super().__init__(message)
        self.node_id = node_id


class NodeKind(str, Enum):
    OBJECT = "object"
    PART = "part"


def _vec(values: Sequence[float], dim: int, what: str) -> tuple[float, ...]:
    values = tuple(float(v) for v in values)
    if len(values) != dim:
        raise SceneFormatError(f"{what} needs {dim} components, got {len(values)}")
    return values


@dataclass(frozen=True)
class Box3:
    """Axis-aligned box in meters. min <= max holds per axis."""

    min: Vec3
    max: Vec3

    def __post_init__(self):
        object.__setattr__(self, "min", _vec(self.min, 3, "box min"))
        object.__setattr__(self, "max", _vec(self.max, 3, "box max"))
        if any(lo > hi for lo, hi in zip(self.min, self.max)):
            raise SceneValidationError(f"inverted box: min={self.min} max={self.max}")

    def volume(self) -> float:
        v = 1.0
        for lo, hi in zip(self.min, self.max):
            v *= hi - lo
        return v

    def center(self) -> Vec3:
        return tuple(0.5 * (lo + hi) for lo, hi in zip(self.min, self.max))  # type: ignore[return-value]

    def contains(self, point: Sequence[float]) -> bool:
        """Inclusive membership test."""
        return all(lo <= p <= hi for lo, p, hi in zip(self.min, point, self.max))

    def hull(self, other: "Box3") -> "Box3":
        return Box3(
            tuple(min(a, b) for a, b in zip(self.min, other.min)),
            tuple(max(a, b) for a, b in zip(self.max, other.max)),
        )

    def to_dict(self) -> dict:
        return {"min": list(self.min), "max": list(self.max)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Box3":
        try:
            return cls(tuple(data["min"]), tuple(data["max"]))
        except (KeyError, TypeError) as exc:
            raise SceneFormatError(f"malformed 3D box: {data!r}") from exc


def _overlap(lo_a: float, hi_a: float, lo_b: float, hi_b: float) -> float:
    return max(0.0, min(hi_a, hi_b) - max(lo_a, lo_b))


def iou3(a: Box3, b: Box3) -> float:
    """3D intersection-over-union.

    Degenerate boxes (zero volume on either side) score 0, identical
    point-boxes included: without extent there is no meaningful overlap
    ratio, and downstream association treats such detections as unmatchable.
    """
    vol_a = a.volume()
    vol_b = b.volume()
    if vol_a == 0.0 or vol_b == 0.0:
        return 0.0
    inter = 1.0
    for axis in range(3):
        inter *= _overlap(a.min[axis], a.max[axis], b.min[axis], b.max[axis])
        if inter == 0.0:
            return 0.0
    return inter / (vol_a + vol_b - inter)


@dataclass(frozen=True)
class Box2:
    """Axis-aligned box in normalized image coordinates ([0, 1] range)."""

    min: Vec2
    max: Vec2

    def __post_init__(self):
        object.__setattr__(self, "min", _vec(self.min, 2, "box min"))
        object.__setattr__(self, "max", _vec(self.max, 2, "box max"))
        if any(lo > hi for lo, hi in zip(self.min, self.max)):
            raise SceneValidationError(f"inverted box: min={self.min} max={self.max}")
        if any(v < 0.0 or v > 1.0 for v in self.min + self.max):
            raise SceneValidationError(f"2D box outside [0, 1]: {self}")

    def area(self) -> float:
        return (self.max[0] - self.min[0]) * (self.max[1] - self.min[1])

    def intersection_area(self, other: "Box2") -> float:
        inter = 1.0
        for axis in range(2):
            inter *= _overlap(self.min[axis], self.max[axis], other.min[axis], other.max[axis])
        return inter


class PartBoxVerdict(Enum):
    KEEP = "keep"
    DISCARD_BACKGROUND = "discard_background"
    DISCARD_OBJECT_SIZED = "discard_object_sized"


def part_box_filter(part: Box2, obj: Box2) -> PartBoxVerdict:
    """Decide whether a 2D part detection plausibly belongs to an object.

    Background check first: if less than PART_OVERLAP_MIN of the part box
    lies inside the object box (strict <), the detection is off-object.
    Otherwise, if the overlap covers more than OBJECT_OVERLAP_MAX of the
    object box (strict >), the "part" is really the object itself. Exact
    boundary ratios keep the detection.
    """
    part_area = part.area()
    obj_area = obj.area()
    if part_area == 0.0:
        raise SceneValidationError("part box has zero area")
    if obj_area == 0.0:
        raise SceneValidationError("object box has zero area")
    inter = part.intersection_area(obj)
    if inter / part_area < PART_OVERLAP_MIN:
        return PartBoxVerdict.DISCARD_BACKGROUND
    if inter / obj_area > OBJECT_OVERLAP_MAX:
        return PartBoxVerdict.DISCARD_OBJECT_SIZED
    return PartBoxVerdict.KEEP


@dataclass(frozen=True)
class SceneNode:
    id: str
    label: str
    kind: NodeKind
    center: Vec3
    box: Box3
    description: str = ""
    parent: str | None = None
    confidence: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", NodeKind(self.kind))
        object.__setattr__(self, "center", _vec(self.center, 3, "center"))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "label": self.label,
            "description": self.description,
            "kind": self.kind.value,
            "parent": self.parent,
            "center": list(self.center),
            "box": self.box.to_dict(),
            "confidence": self.confidence,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SceneNode":
        try:
            return cls(
                id=str(data["id"]),
                label=str(data["label"]),
                kind=NodeKind(data["kind"]),
                center=tuple(data["center"]),
                box=Box3.from_dict(data["box"]),
                description=str(data.get("description", "") or ""),
                parent=data.get("parent"),
                confidence=None if data.get("confidence") is None else float(data["confidence"]),
            )
        except SceneValidationError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise SceneFormatError(f"malformed scene node: {exc}") from exc


def distance(a: SceneNode, b: SceneNode) -> float:
    """Euclidean distance between node centers, in meters."""
    return math.sqrt(sum((p - q) ** 2 for p, q in zip(a.center, b.center)))


class SceneGraph:
    """Validated collection of scene nodes with stable order.

    Construction enforces the structural invariants, naming the offending
    node in every error: unique ids, parts reference an existing object
    node, objects have no parent, centers lie inside (inclusive) the node's
    box, confidences in [0, 1].
    """

    def __init__(self, nodes: Sequence[SceneNode] = ()):
        self._nodes: tuple[SceneNode, ...] = tuple(nodes)
        self._by_id: dict[str, SceneNode] = {}
        for node in self._nodes:
            if node.id in self._by_id:
                raise SceneValidationError(f"duplicate node id {node.id!r}", node.id)
            self._by_id[node.id] = node
        for node in self._nodes:
            self._validate_node(node)

    def _validate_node(self, node: SceneNode) -> None:
        if node.kind is NodeKind.OBJECT:
            if node.parent is not None:
                raise SceneValidationError(
                    f"object node {node.id!r} must not have a parent", node.id
                )
        else:
            if node.parent is None:
                raise SceneValidationError(f"part node {node.id!r} has no parent", node.id)
            parent = self._by_id.get(node.parent)
            if parent is None:
                raise SceneValidationError(
                    f"part node {node.id!r} references missing parent {node.parent!r}", node.id
                )
            if parent.kind is not NodeKind.OBJECT:
                raise SceneValidationError(
                    f"part node {node.id!r} has non-object parent {node.parent!r}", node.id
                )
        if not node.box.contains(node.center):
            raise SceneValidationError(
                f"node {node.id!r} center {node.center} outside its box", node.id
            )
        if node.confidence is not None and not 0.0 <= node.confidence <= 1.0:
            raise SceneValidationError(
                f"node {node.id!r} confidence {node.confidence} outside [0, 1]", node.id
            )

    def __len__(self) -> int:
        return len(self._nodes)

    def __iter__(self) -> Iterator[SceneNode]:
        return iter(self._nodes)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._by_id

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SceneGraph) and self._nodes == other._nodes

    @property
    def nodes(self) -> tuple[SceneNode, ...]:
        return self._nodes

    def node(self, node_id: str) -> SceneNode:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise SceneValidationError(f"unknown node id {node_id!r}", node_id) from None

    def objects(self) -> list[SceneNode]:
        return [n for n in self._nodes if n.kind is NodeKind.OBJECT]

    def parts(self) -> list[SceneNode]:
        return [n for n in self._nodes if n.kind is NodeKind.PART]

    def parts_of(self, object_id: str) -> list[SceneNode]:
        return [n for n in self._nodes if n.kind is NodeKind.PART and n.parent == object_id]

    def to_dict(self) -> dict:
        return {"nodes": [n.to_dict() for n in self._nodes]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "SceneGraph":
        if not isinstance(data, Mapping) or "nodes" not in data:
            raise SceneFormatError("scene document needs a top-level 'nodes' list")
        nodes_raw = data["nodes"]
        if not isinstance(nodes_raw, list):
            raise SceneFormatError("'nodes' must be a list")
        return cls([SceneNode.from_dict(entry) for entry in nodes_raw])


def load_scene(path: str | Path) -> SceneGraph:
    try:
        text = Path(path).read_text()
    except OSError:
        raise
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"not valid JSON: {exc}") from exc
    return SceneGraph.from_dict(data)


def save_scene(graph: SceneGraph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(graph.to_dict(), indent=2) + "\n")
