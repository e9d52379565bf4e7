from __future__ import annotations

import json
import math

import numpy as np
import pytest

from funfact.fusion import (
    DEFAULT_COS_THRESH,
    DEFAULT_IOU_THRESH,
    Detection,
    DetectedObject,
    Instance,
    associate,
    instances_to_scene,
    load_detections,
    merge_stream,
)
from funfact.scene import Box3, NodeKind, SceneFormatError


def det(box_min, box_max, feature=(1.0, 0.0), label="mug", kind=NodeKind.OBJECT):
    return Detection(
        box=Box3(tuple(box_min), tuple(box_max)),
        feature=np.asarray(feature, dtype=float),
        label=label,
        kind=kind,
    )


def unit_det(height=1.0, **kwargs):
    return det((0.0, 0.0, 0.0), (1.0, 1.0, height), **kwargs)


def test_associate_requires_matching_kind():
    obj = Instance.from_detection(0, unit_det())
    part = unit_det(kind=NodeKind.PART)
    assert associate(part, [obj]) is None


def test_associate_picks_first_passing_instance():
    a = Instance.from_detection(0, unit_det())
    b = Instance.from_detection(1, unit_det())
    assert associate(unit_det(), [a, b]) is a


def test_associate_iou_gate_is_strict():
    # Nested boxes: base [0,1]^3 against [0,1]x[0,1]x[0,h] overlap with
    # IoU exactly h, so h brackets the gate directly.
    base = Instance.from_detection(0, unit_det())
    above = unit_det(height=DEFAULT_IOU_THRESH + 1e-9)
    below = unit_det(height=DEFAULT_IOU_THRESH - 1e-9)
    at = unit_det(height=DEFAULT_IOU_THRESH)
    assert associate(above, [base]) is base
    assert associate(below, [base]) is None
    assert associate(at, [base]) is None


def cos_det(cosine):
    return unit_det(feature=(cosine, math.sqrt(1.0 - cosine * cosine)))


def test_associate_cosine_gate_is_strict():
    # The exact-threshold case is not float-constructible through the
    # norm/sqrt path (it lands 1 ulp off), so only the brackets are pinned.
    base = Instance.from_detection(0, unit_det(feature=(1.0, 0.0)))
    assert associate(cos_det(DEFAULT_COS_THRESH + 1e-9), [base]) is base
    assert associate(cos_det(DEFAULT_COS_THRESH - 1e-9), [base]) is None


def test_associate_rejects_mismatched_feature_dims():
    base = Instance.from_detection(0, unit_det(feature=(1.0, 0.0)))
    with pytest.raises(ValueError):
        associate(unit_det(feature=(1.0, 0.0, 0.0)), [base])


def test_instance_absorb_updates_box_and_label_votes():
    inst = Instance.from_detection(0, unit_det(label="mug"))
    inst.absorb(det((0.5, 0.0, 0.0), (1.5, 1.0, 1.0), label="cup"))
    inst.absorb(det((0.2, 0.0, 0.0), (1.2, 1.0, 1.0), label="cup"))
    assert inst.box.min == (0.0, 0.0, 0.0)
    assert inst.box.max == (1.5, 1.0, 1.0)
    assert inst.n == 3
    assert inst.label == "cup"


def test_instance_label_ties_go_to_earliest_vote():
    inst = Instance.from_detection(0, unit_det(label="mug"))
    inst.absorb(unit_det(label="cup"))
    assert inst.label == "mug"


def test_instance_feature_is_unit_mean():
    inst = Instance.from_detection(0, unit_det(feature=(2.0, 0.0)))
    inst.absorb(unit_det(feature=(0.0, 2.0)))
    feat = inst.feature
    assert np.linalg.norm(feat) == pytest.approx(1.0, abs=1e-12)
    assert feat[0] == pytest.approx(feat[1], abs=1e-12)


def test_merge_stream_fuses_repeated_views():
    frames = [
        [DetectedObject(unit_det(label="stove"))],
        [DetectedObject(unit_det(label="stove"))],
        [DetectedObject(det((5.0, 0.0, 0.0), (6.0, 1.0, 1.0), label="sink"))],
    ]
    instances = merge_stream(frames)
    assert [inst.label for inst in instances] == ["stove", "sink"]
    assert instances[0].n == 2
    assert instances[1].n == 1


def test_merge_stream_parts_attach_to_their_object():
    knob = det((0.1, 0.1, 0.0), (0.3, 0.3, 0.2), label="knob", kind=NodeKind.PART)
    frames = [
        [DetectedObject(unit_det(label="stove"), parts=(knob,))],
        [DetectedObject(unit_det(label="stove"), parts=(knob,))],
    ]
    instances = merge_stream(frames)
    assert len(instances) == 1
    assert len(instances[0].parts) == 1
    assert instances[0].parts[0].n == 2


def test_merge_stream_part_instances_do_not_cross_objects():
    knob = det((0.1, 0.1, 0.0), (0.3, 0.3, 0.2), label="knob", kind=NodeKind.PART)
    far = det((8.0, 0.0, 0.0), (9.0, 1.0, 1.0), label="stove")
    far_knob = det((8.1, 0.1, 0.0), (8.3, 0.3, 0.2), label="knob", kind=NodeKind.PART)
    frames = [
        [DetectedObject(unit_det(label="stove"), parts=(knob,))],
        [DetectedObject(far, parts=(far_knob,))],
    ]
    instances = merge_stream(frames)
    assert len(instances) == 2
    assert all(len(inst.parts) == 1 for inst in instances)


def test_merge_stream_rejects_part_at_top_level():
    with pytest.raises(ValueError):
        merge_stream([[DetectedObject(unit_det(kind=NodeKind.PART))]])


def test_merge_stream_rejects_object_nested_as_part():
    with pytest.raises(ValueError):
        merge_stream([[DetectedObject(unit_det(), parts=(unit_det(),))]])


def test_instances_to_scene_ids_and_hierarchy():
    knob = det((0.1, 0.1, 0.0), (0.3, 0.3, 0.2), label="knob", kind=NodeKind.PART)
    frames = [[DetectedObject(unit_det(label="stove"), parts=(knob,))]]
    scene = instances_to_scene(merge_stream(frames))
    ids = [n.id for n in scene]
    assert ids == ["obj000", "obj000.p00"]
    part = scene.node("obj000.p00")
    assert part.parent == "obj000"
    assert part.kind is NodeKind.PART


def test_load_detections_round_trip(tmp_path):
    doc = {
        "frames": [
            {
                "objects": [
                    {
                        "box": {"min": [0, 0, 0], "max": [1, 1, 1]},
                        "feature": [1.0, 0.0],
                        "label": "stove",
                        "parts": [
                            {
                                "box": {"min": [0.1, 0.1, 0], "max": [0.3, 0.3, 0.2]},
                                "feature": [0.0, 1.0],
                                "label": "knob",
                            }
                        ],
                    }
                ]
            }
        ]
    }
    path = tmp_path / "stream.json"
    path.write_text(json.dumps(doc))
    frames = load_detections(path)
    assert len(frames) == 1
    assert frames[0][0].detection.label == "stove"
    assert frames[0][0].parts[0].kind is NodeKind.PART


def test_load_detections_rejects_malformed_document(tmp_path):
    path = tmp_path / "stream.json"
    path.write_text(json.dumps({"images": []}))
    with pytest.raises(SceneFormatError):
        load_detections(path)
    path.write_text("nope{")
    with pytest.raises(SceneFormatError):
        load_detections(path)
