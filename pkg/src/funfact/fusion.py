"""Streaming fusion of per-frame detections into scene instances.

Detections arrive frame by frame, each frame holding object detections with
their nested part detections. An incoming detection merges into the first
existing instance of the same kind that passes both association gates, a 3D
box IoU gate and a feature cosine gate, otherwise it founds a new instance.
Objects of a frame are processed before parts, and a part detection only
considers part instances of the object instance its parent detection was
merged into.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from funfact.scene import Box3, NodeKind, SceneFormatError, SceneGraph, SceneNode, iou3

logger = logging.getLogger(__name__)

# Association gates are deliberately permissive: boxes from different views
# of one object overlap only partially, so the IoU gate mostly rejects
# detections in entirely different places.
DEFAULT_IOU_THRESH = 0.03
DEFAULT_COS_THRESH = 0.5


@dataclass(frozen=True)
class Detection:
    """One detection in one frame."""

    box: Box3
    feature: np.ndarray
    label: str
    kind: NodeKind

    def __post_init__(self):
        object.__setattr__(self, "feature", np.asarray(self.feature, dtype=float))
        object.__setattr__(self, "kind", NodeKind(self.kind))


@dataclass(frozen=True)
class DetectedObject:
    """An object detection with its frame-local part detections."""

    detection: Detection
    parts: tuple[Detection, ...] = ()


Frame = Sequence[DetectedObject]


@dataclass
class Instance:
    """Accumulated evidence for one scene element across frames."""

    id: int
    kind: NodeKind
    box: Box3
    label_votes: list[str]
    feature_sum: np.ndarray
    n: int
    parts: list["Instance"] = field(default_factory=list)

    @classmethod
    def from_detection(cls, instance_id: int, det: Detection) -> "Instance":
        return cls(
            id=instance_id,
            kind=det.kind,
            box=det.box,
            label_votes=[det.label],
            feature_sum=det.feature.copy(),
            n=1,
        )

    def absorb(self, det: Detection) -> None:
        if det.feature.shape != self.feature_sum.shape:
            raise ValueError(
                f"feature dimension mismatch: instance {self.id} has "
                f"{self.feature_sum.shape[0]}, detection has {det.feature.shape[0]}"
            )
        self.box = self.box.hull(det.box)
        self.label_votes.append(det.label)
        self.feature_sum = self.feature_sum + det.feature
        self.n += 1

    @property
    def label(self) -> str:
        """Majority label; ties go to the earliest-seen label."""
        counts: dict[str, int] = {}
        for vote in self.label_votes:
            counts[vote] = counts.get(vote, 0) + 1
        best = max(counts.values())
        for vote in self.label_votes:
            if counts[vote] == best:
                return vote
        raise AssertionError("unreachable: no label votes")

    @property
    def feature(self) -> np.ndarray:
        """Mean member feature, renormalized to unit length."""
        mean = self.feature_sum / self.n
        norm = float(np.linalg.norm(mean))
        if norm == 0.0:
            return mean
        return mean / norm


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise ValueError(f"feature dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def associate(
    det: Detection,
    instances: Sequence[Instance],
    iou_thresh: float = DEFAULT_IOU_THRESH,
    cos_thresh: float = DEFAULT_COS_THRESH,
) -> Instance | None:
    """First instance (in the given order) the detection merges into.

    Both gates are strict: the box IoU must exceed iou_thresh and the
    feature cosine must exceed cos_thresh. Instances of a different kind
    never match. Returns None when nothing passes.
    """
    for inst in instances:
        if inst.kind is not det.kind:
            continue
        if iou3(det.box, inst.box) <= iou_thresh:
            continue
        if _cosine(det.feature, inst.feature) <= cos_thresh:
            continue
        return inst
    return None


def merge_stream(
    frames: Iterable[Frame],
    iou_thresh: float = DEFAULT_IOU_THRESH,
    cos_thresh: float = DEFAULT_COS_THRESH,
) -> list[Instance]:
    """Fuse an ordered detection stream into object instances with parts.

    Deterministic given the input order: objects of each frame are merged
    first (so parts resolve against up-to-date object instances), then each
    part detection is associated only against the part instances of its
    parent object's instance.
    """
    objects: list[Instance] = []
    next_id = 0
    for frame in frames:
        frame_hosts: list[tuple[Instance, DetectedObject]] = []
        for detected in frame:
            if detected.detection.kind is not NodeKind.OBJECT:
                raise ValueError("top-level detections must be objects")
            host = associate(detected.detection, objects, iou_thresh, cos_thresh)
            if host is None:
                host = Instance.from_detection(next_id, detected.detection)
                next_id += 1
                objects.append(host)
            else:
                host.absorb(detected.detection)
            frame_hosts.append((host, detected))
        for host, detected in frame_hosts:
            for part_det in detected.parts:
                if part_det.kind is not NodeKind.PART:
                    raise ValueError("nested detections must be parts")
                part_inst = associate(part_det, host.parts, iou_thresh, cos_thresh)
                if part_inst is None:
                    part_inst = Instance.from_detection(next_id, part_det)
                    next_id += 1
                    host.parts.append(part_inst)
                else:
                    part_inst.absorb(part_det)
    logger.debug("merged stream into %d object instances", len(objects))
    return objects


def instances_to_scene(instances: Sequence[Instance]) -> SceneGraph:
    """Project fused instances onto a scene graph.

    Node ids follow creation order (obj000, obj000.p00, ...), centers sit at
    box centers, labels come from the majority vote.
    """
    nodes: list[SceneNode] = []
    for obj_idx, obj in enumerate(instances):
        obj_id = f"obj{obj_idx:03d}"
        nodes.append(
            SceneNode(
                id=obj_id,
                label=obj.label,
                kind=NodeKind.OBJECT,
                center=obj.box.center(),
                box=obj.box,
            )
        )
        for part_idx, part in enumerate(obj.parts):
            nodes.append(
                SceneNode(
                    id=f"{obj_id}.p{part_idx:02d}",
                    label=part.label,
                    kind=NodeKind.PART,
                    parent=obj_id,
                    center=part.box.center(),
                    box=part.box,
                )
            )
    return SceneGraph(nodes)


def _detection_from_dict(data: dict, kind: NodeKind) -> Detection:
    try:
        return Detection(
            box=Box3.from_dict(data["box"]),
            feature=np.asarray(data["feature"], dtype=float),
            label=str(data["label"]),
            kind=kind,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SceneFormatError):
            raise
        raise SceneFormatError(f"malformed detection entry: {exc}") from exc


def load_detections(path: str | Path) -> list[Frame]:
    """Read a detection stream file: {"frames": [{"objects": [...]}]}."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("frames"), list):
        raise SceneFormatError("detection document needs a top-level 'frames' list")
    frames: list[Frame] = []
    for frame_entry in data["frames"]:
        objects_raw = frame_entry.get("objects", []) if isinstance(frame_entry, dict) else None
        if objects_raw is None or not isinstance(objects_raw, list):
            raise SceneFormatError("each frame needs an 'objects' list")
        frame: list[DetectedObject] = []
        for obj_entry in objects_raw:
            det = _detection_from_dict(obj_entry, NodeKind.OBJECT)
            parts = tuple(
                _detection_from_dict(part_entry, NodeKind.PART)
                for part_entry in obj_entry.get("parts", [])
            )
            frame.append(DetectedObject(det, parts))
        frames.append(frame)
    return frames
