"""Calibrated functional scene-graph edges via dual factor graphs.

The pipeline turns candidate functional relations between scene elements
(knob controls burner, switch turns on light, ...) into binary variables of
a factor graph, combines distance-based priors with one-to-one cardinality
preferences, and runs component-wise probabilistic inference to attach a
calibrated confidence to every relation. A synthetic room generator and an
evaluation protocol close the loop, and a small HTTP service supports
interactive verification of individual relations.
"""

from funfact.scene import (
    Box2,
    Box3,
    NodeKind,
    PartBoxVerdict,
    SceneFormatError,
    SceneGraph,
    SceneNode,
    SceneValidationError,
    iou3,
    load_scene,
    part_box_filter,
    save_scene,
)

__all__ = [
    "Box2",
    "Box3",
    "NodeKind",
    "PartBoxVerdict",
    "SceneFormatError",
    "SceneGraph",
    "SceneNode",
    "SceneValidationError",
    "iou3",
    "load_scene",
    "part_box_filter",
    "save_scene",
]

__version__ = "0.1.0"
