"""Synthetic benchmark scenes with rule-derived functional ground truth.

Procedural room layouts place appliance archetypes whose functional wiring
is known by construction: stoves with knob and burner rows, switch columns
with sconce lights, faucet and sink stations, cabinets with handles, wall
outlets with nearby appliances, and remote and television pairs. Each
generated scene ships with the matching relation proposals, the annotation
rules that recover its ground truth, and a visibility filter that mimics
partial observation by discarding nodes whose surface points went unseen.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .proposals import FunctionalProposal, _label_eq
from .scene import Box3, NodeKind, SceneGraph, SceneNode, distance

# Strict upper bound for the nearest-neighbor rule, in meters.
PROXIMITY_MAX_DIST = 1.0
# Surface samples drawn per node when the caller supplies none.
SURFACE_SAMPLES = 256
DEFAULT_VIS_RADIUS = 0.05
DEFAULT_MIN_POINTS = 10
_POINT_SEED = 613566757

ROOM_TYPES = ("kitchen", "livingroom", "bedroom", "bathroom")


class SynthError(ValueError):
    """Invalid generator configuration or annotation input."""


class RuleStrategy(str, Enum):
    EXACT = "Exact"
    PROXIMITY = "Proximity"
    PART_OBJECT = "PartObject"
    MANUAL = "Manual"


@dataclass(frozen=True)
class AnnotationRule:
    """Label-level recipe for materializing ground-truth triplets.

    Exact joins every first-label node with every second-label node.
    Proximity links each first-label node to its single nearest
    second-label node when their centers sit closer than one meter.
    PartObject links parts to their own parent object. Manual defers to
    an explicit pair list recorded alongside the scene.
    """

    first_label: str
    relation: str
    second_label: str
    strategy: RuleStrategy

    def to_dict(self) -> dict:
        return {
            "first_label": self.first_label,
            "relation": self.relation,
            "second_label": self.second_label,
            "strategy": self.strategy.value,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "AnnotationRule":
        try:
            return cls(
                first_label=str(data["first_label"]),
                relation=str(data["relation"]),
                second_label=str(data["second_label"]),
                strategy=RuleStrategy(data["strategy"]),
            )
        except (KeyError, ValueError) as exc:
            raise SynthError(f"malformed rule: {exc}") from exc


@dataclass(frozen=True)
class ManualPair:
    first_id: str
    second_id: str
    relation: str


@dataclass(frozen=True)
class Triplet:
    subject: str
    relation: str
    object: str

    def to_dict(self) -> dict:
        return {"subject": self.subject, "relation": self.relation, "object": self.object}


@dataclass(frozen=True)
class GroundTruthGraph:
    """A scene plus the exhaustive set of true functional triplets."""

    scene: SceneGraph
    triplets: tuple[Triplet, ...]

    def __post_init__(self):
        object.__setattr__(self, "triplets", tuple(self.triplets))
        seen = set()
        for t in self.triplets:
            if t.subject not in self.scene or t.object not in self.scene:
                raise SynthError(f"triplet endpoint missing from scene: {t}")
            if t in seen:
                raise SynthError(f"duplicate triplet: {t}")
            seen.add(t)

    def to_dict(self) -> dict:
        return {
            "scene": self.scene.to_dict(),
            "triplets": [t.to_dict() for t in self.triplets],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "GroundTruthGraph":
        try:
            scene = SceneGraph.from_dict(data["scene"])
            trips = tuple(
                Triplet(str(t["subject"]), str(t["relation"]), str(t["object"]))
                for t in data["triplets"]
            )
        except (KeyError, TypeError) as exc:
            raise SynthError(f"malformed ground truth: {exc}") from exc
        return cls(scene=scene, triplets=trips)


# Catalog of every relation family the generator knows how to annotate.
# Instantiated archetypes use the subset below; the rest are available to
# callers annotating their own scenes and are intentionally extensible.
RULE_CATALOG: tuple[AnnotationRule, ...] = (
    AnnotationRule("stove knob", "controls", "burner", RuleStrategy.MANUAL),
    AnnotationRule("light switch", "turns on", "sconce light", RuleStrategy.MANUAL),
    AnnotationRule("handle", "opens", "cabinet", RuleStrategy.PART_OBJECT),
    AnnotationRule("handle", "opens", "door", RuleStrategy.PART_OBJECT),
    AnnotationRule("faucet", "fills with water", "sink", RuleStrategy.PROXIMITY),
    AnnotationRule("faucet", "fills with water", "bathtub", RuleStrategy.PROXIMITY),
    AnnotationRule("faucet", "fills with water", "kettle", RuleStrategy.PROXIMITY),
    AnnotationRule("curtain", "covers", "window", RuleStrategy.PROXIMITY),
    AnnotationRule("remote control", "controls", "television", RuleStrategy.EXACT),
    AnnotationRule("wall outlet", "provides power to", "kettle", RuleStrategy.PROXIMITY),
    AnnotationRule("wall outlet", "provides power to", "floor lamp", RuleStrategy.PROXIMITY),
    AnnotationRule("key", "unlocks", "lock", RuleStrategy.MANUAL),
    AnnotationRule("knife", "cuts", "apple", RuleStrategy.MANUAL),
    AnnotationRule("sponge", "cleans", "countertop", RuleStrategy.PROXIMITY),
    AnnotationRule("lever", "operates", "toaster", RuleStrategy.PART_OBJECT),
    AnnotationRule("pedal", "opens", "trash can", RuleStrategy.PART_OBJECT),
)


def _rule_for(first: str, second: str) -> AnnotationRule:
    for rule in RULE_CATALOG:
        if _label_eq(rule.first_label, first) and _label_eq(rule.second_label, second):
            return rule
    raise SynthError(f"no catalog rule for {first!r} -> {second!r}")


# ---------------------------------------------------------------------------
# Annotation strategies


def _apply_exact(scene: SceneGraph, rule: AnnotationRule) -> Iterable[Triplet]:
    firsts = [n for n in scene if _label_eq(n.label, rule.first_label)]
    seconds = [n for n in scene if _label_eq(n.label, rule.second_label)]
    for a in firsts:
        for b in seconds:
            if a.id != b.id:
                yield Triplet(a.id, rule.relation, b.id)


def _apply_proximity(scene: SceneGraph, rule: AnnotationRule) -> Iterable[Triplet]:
    firsts = [n for n in scene if _label_eq(n.label, rule.first_label)]
    seconds = [n for n in scene if _label_eq(n.label, rule.second_label)]
    for a in firsts:
        candidates = [b for b in seconds if b.id != a.id]
        if not candidates:
            continue
        # Equidistant nearest candidates resolve to the smaller id.
        best = min(candidates, key=lambda b: (distance(a, b), b.id))
        if distance(a, best) < PROXIMITY_MAX_DIST:
            yield Triplet(a.id, rule.relation, best.id)


def _apply_part_object(scene: SceneGraph, rule: AnnotationRule) -> Iterable[Triplet]:
    for part in scene.parts():
        if not _label_eq(part.label, rule.first_label):
            continue
        parent = scene.node(part.parent)
        if _label_eq(parent.label, rule.second_label):
            yield Triplet(part.id, rule.relation, parent.id)


def _apply_manual(
    scene: SceneGraph, rule: AnnotationRule, pairs: Sequence[ManualPair]
) -> Iterable[Triplet]:
    for pair in pairs:
        if pair.relation != rule.relation:
            continue
        first = scene.node(pair.first_id)
        second = scene.node(pair.second_id)
        if _label_eq(first.label, rule.first_label) and _label_eq(
            second.label, rule.second_label
        ):
            yield Triplet(first.id, rule.relation, second.id)


def annotate(
    scene: SceneGraph,
    rules: Sequence[AnnotationRule],
    manual_pairs: Sequence[ManualPair] = (),
) -> GroundTruthGraph:
    """Materialize ground-truth triplets by applying each rule to the scene.

    Rules never consume nodes, so the result is independent of rule order
    and repeated application. Duplicates collapse and the triplet list is
    sorted for reproducibility.

    Raises SynthError when a manual pair references an unknown node id.
    """
    for pair in manual_pairs:
        for node_id in (pair.first_id, pair.second_id):
            if node_id not in scene:
                raise SynthError(f"manual pair references unknown node {node_id!r}")
    found: set[Triplet] = set()
    for rule in rules:
        if rule.strategy is RuleStrategy.EXACT:
            found.update(_apply_exact(scene, rule))
        elif rule.strategy is RuleStrategy.PROXIMITY:
            found.update(_apply_proximity(scene, rule))
        elif rule.strategy is RuleStrategy.PART_OBJECT:
            found.update(_apply_part_object(scene, rule))
        else:
            found.update(_apply_manual(scene, rule, manual_pairs))
    ordered = sorted(found, key=lambda t: (t.subject, t.relation, t.object))
    return GroundTruthGraph(scene=scene, triplets=tuple(ordered))


# ---------------------------------------------------------------------------
# Visibility filtering


def sample_box_surface(box: Box3, count: int = SURFACE_SAMPLES, rng=None) -> np.ndarray:
    """Uniform samples over the six faces of a box, area weighted.

    Degenerate boxes fall back to sampling whatever extent remains (a
    point box yields `count` copies of that point).
    """
    rng = np.random.default_rng(0) if rng is None else rng
    lo = np.asarray(box.min, dtype=float)
    hi = np.asarray(box.max, dtype=float)
    ext = hi - lo
    # Face k pins axis k // 2 at its low (even k) or high (odd k) bound.
    areas = np.empty(6)
    for axis in range(3):
        other = [a for a in range(3) if a != axis]
        areas[2 * axis] = areas[2 * axis + 1] = ext[other[0]] * ext[other[1]]
    total = areas.sum()
    points = lo + rng.uniform(size=(count, 3)) * ext
    if total <= 0.0:
        return points
    faces = rng.choice(6, size=count, p=areas / total)
    axes = faces // 2
    bound = np.where(faces % 2 == 0, lo[axes], hi[axes])
    points[np.arange(count), axes] = bound
    return points


def default_node_points(scene: SceneGraph, count: int = SURFACE_SAMPLES) -> dict[str, np.ndarray]:
    """Deterministic per-node surface samples, keyed by node id."""
    rng = np.random.default_rng(_POINT_SEED)
    return {node.id: sample_box_surface(node.box, count, rng) for node in scene}


def visibility_filter(
    gt: GroundTruthGraph,
    observed_points: Sequence[Sequence[float]] | np.ndarray,
    radius: float = DEFAULT_VIS_RADIUS,
    min_points: int = DEFAULT_MIN_POINTS,
    node_points: Mapping[str, np.ndarray] | None = None,
) -> GroundTruthGraph:
    """Drop nodes whose surface went mostly unseen, and their triplets.

    A node survives when at least min_points of its surface samples lie
    within radius of some observed point (boundary inclusive). Parts of a
    dropped object are dropped with it, and every triplet touching a
    dropped node disappears.
    """
    if radius < 0.0:
        raise SynthError(f"negative visibility radius: {radius}")
    if node_points is None:
        node_points = default_node_points(gt.scene)
    observed = np.asarray(observed_points, dtype=float).reshape(-1, 3)
    tree = cKDTree(observed) if len(observed) else None
    kept: set[str] = set()
    for node in gt.scene:
        if node.id not in node_points:
            raise SynthError(f"no surface samples supplied for node {node.id!r}")
        samples = np.asarray(node_points[node.id], dtype=float)
        if tree is None:
            retained = 0
        else:
            retained = int(np.count_nonzero(
                tree.query_ball_point(samples, r=radius, return_length=True)
            ))
        if retained >= min_points:
            kept.add(node.id)
    survivors = [
        node
        for node in gt.scene
        if node.id in kept and (node.parent is None or node.parent in kept)
    ]
    scene = SceneGraph(survivors)
    triplets = tuple(t for t in gt.triplets if t.subject in scene and t.object in scene)
    return GroundTruthGraph(scene=scene, triplets=triplets)


# ---------------------------------------------------------------------------
# Procedural generation

ROOM_DEFAULTS: dict[str, dict[str, int]] = {
    "kitchen": {"stoves": 1, "switch_clusters": 1, "faucets": 1, "cabinets": 2, "outlets": 1, "remotes": 0},
    "livingroom": {"stoves": 0, "switch_clusters": 1, "faucets": 0, "cabinets": 1, "outlets": 1, "remotes": 1},
    "bedroom": {"stoves": 0, "switch_clusters": 1, "faucets": 0, "cabinets": 1, "outlets": 1, "remotes": 0},
    "bathroom": {"stoves": 0, "switch_clusters": 1, "faucets": 1, "cabinets": 1, "outlets": 0, "remotes": 0},
}

# Station grid pitch; the row gap leaves >1 m of clearance beyond the
# deepest in-station offset so nearest-neighbor rules never cross stations.
_STATION_DX = 2.5
_STATION_DY = 3.5
_STATIONS_PER_ROW = 3
_KNOB_DROP = 0.15
_SWITCH_PITCH = 0.8
_SCONCE_RISE = 0.3


@dataclass(frozen=True)
class GenConfig:
    """Knobs for one procedural scene.

    Counts left at None fall back to the room type's defaults. spread is
    the knob and burner pitch in meters; shrinking it toward the knob
    drop of 0.15 m makes the pairing maximally ambiguous. jitter adds
    zero-mean Gaussian noise to every element center.
    """

    seed: int = 0
    room_type: str = "kitchen"
    stoves: int | None = None
    burners_per_stove: int = 4
    switch_clusters: int | None = None
    lights_per_cluster: int = 2
    faucets: int | None = None
    cabinets: int | None = None
    outlets: int | None = None
    appliances_per_outlet: int = 3
    remotes: int | None = None
    spread: float = 0.3
    jitter: float = 0.0

    def __post_init__(self):
        if self.room_type not in ROOM_DEFAULTS:
            raise SynthError(f"unknown room type {self.room_type!r}")
        for name in ("stoves", "switch_clusters", "faucets", "cabinets", "outlets", "remotes"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise SynthError(f"negative count for {name}: {value}")
        for name in ("burners_per_stove", "lights_per_cluster", "appliances_per_outlet"):
            if getattr(self, name) < 0:
                raise SynthError(f"negative count for {name}: {getattr(self, name)}")
        if self.appliances_per_outlet > 6:
            # Station layout reserves room for at most six appliances.
            raise SynthError("appliances_per_outlet exceeds layout capacity (6)")
        if not self.spread > 0.0:
            raise SynthError(f"spread must be positive, got {self.spread}")
        if self.jitter < 0.0:
            raise SynthError(f"negative jitter: {self.jitter}")

    def counts(self) -> dict[str, int]:
        resolved = dict(ROOM_DEFAULTS[self.room_type])
        for name in resolved:
            value = getattr(self, name)
            if value is not None:
                resolved[name] = value
        return resolved


@dataclass(frozen=True)
class GenResult:
    """Everything generate_scene knows about one synthetic scene."""

    scene: SceneGraph
    gt: GroundTruthGraph
    proposals: tuple[FunctionalProposal, ...]
    rules: tuple[AnnotationRule, ...]
    manual_pairs: tuple[ManualPair, ...]


class _Builder:
    """Accumulates nodes, rules, pairs, and proposals during placement."""

    def __init__(self, rng: np.random.Generator, jitter: float):
        self.rng = rng
        self.jitter = jitter
        self.nodes: list[SceneNode] = []
        self.rules: dict[AnnotationRule, None] = {}
        self.pairs: list[ManualPair] = []
        self.proposals: list[FunctionalProposal] = []
        self._station = 0
        self._obj = 0

    def next_station(self) -> tuple[float, float]:
        i = self._station
        self._station += 1
        return (
            1.0 + _STATION_DX * (i % _STATIONS_PER_ROW),
            1.0 + _STATION_DY * (i // _STATIONS_PER_ROW),
        )

    def place(self, x: float, y: float, z: float) -> tuple[float, float, float]:
        if self.jitter > 0.0:
            dx, dy, dz = self.rng.normal(0.0, self.jitter, 3)
            return (x + dx, y + dy, z + dz)
        return (x, y, z)

    def add_object(
        self, label: str, center: Sequence[float], half: Sequence[float], description: str = ""
    ) -> SceneNode:
        node = SceneNode(
            id=f"obj_{self._obj}",
            label=label,
            kind=NodeKind.OBJECT,
            center=tuple(center),
            box=_box_at(center, half),
            description=description,
            confidence=1.0,
        )
        self._obj += 1
        self.nodes.append(node)
        return node

    def add_part(
        self,
        owner: SceneNode,
        index: int,
        label: str,
        center: Sequence[float],
        half: Sequence[float],
        description: str = "",
    ) -> SceneNode:
        owner_idx = int(owner.id.split("_")[1])
        node = SceneNode(
            id=f"part_{owner_idx}_{index}",
            label=label,
            kind=NodeKind.PART,
            center=tuple(center),
            box=_box_at(center, half),
            description=description,
            parent=owner.id,
            confidence=1.0,
        )
        self.nodes.append(node)
        return node

    def use_rule(self, first: str, second: str) -> AnnotationRule:
        rule = _rule_for(first, second)
        self.rules[rule] = None
        return rule


def _box_at(center: Sequence[float], half: Sequence[float]) -> Box3:
    return Box3(
        tuple(c - h for c, h in zip(center, half)),
        tuple(c + h for c, h in zip(center, half)),
    )


def _build_stove(b: _Builder, burners: int, spread: float) -> None:
    ox, oy = b.next_station()
    width = spread * max(burners - 1, 0)
    # Chassis top stays below the knob row so parent and part boxes never
    # overlap; the matching protocol scans boxes in creation order.
    half = (width / 2 + 0.25, 0.35, 0.325)
    stove = b.add_object("stove", (ox, oy, 0.425), half, "freestanding range with knob row")
    burner_nodes = []
    knob_nodes = []
    for i in range(burners):
        x = ox - width / 2 + spread * i
        c_burner = b.place(x, oy, 0.95)
        burner_nodes.append(
            b.add_part(stove, i, "burner", c_burner, (0.1, 0.1, 0.02), "circular heating element")
        )
    for i in range(burners):
        x = ox - width / 2 + spread * i
        c_knob = b.place(x, oy, 0.95 - _KNOB_DROP)
        knob_nodes.append(
            b.add_part(stove, burners + i, "stove knob", c_knob, (0.02, 0.02, 0.02), "rotary control dial")
        )
    rule = b.use_rule("stove knob", "burner")
    # Pair leftmost knob with leftmost burner and so on across the row.
    for knob, burner in zip(
        sorted(knob_nodes, key=lambda n: n.center[0]),
        sorted(burner_nodes, key=lambda n: n.center[0]),
    ):
        b.pairs.append(ManualPair(knob.id, burner.id, rule.relation))
    if burners:
        b.proposals.append(
            FunctionalProposal(
                first_item="stove knob",
                second_item="burner",
                interaction=rule.relation,
                confidence=0.7,
                is_one_to_one=True,
                scope_object=stove.id,
            )
        )


def _build_switch_cluster(b: _Builder, lights: int) -> None:
    ox, oy = b.next_station()
    width = _SWITCH_PITCH * max(lights - 1, 0)
    rule = b.use_rule("light switch", "sconce light")
    for i in range(lights):
        x = ox - width / 2 + _SWITCH_PITCH * i
        switch = b.add_object(
            "light switch", b.place(x, oy, 1.2), (0.04, 0.02, 0.06), "rocker switch on the wall"
        )
        sconce = b.add_object(
            "sconce light",
            b.place(x, oy, 1.2 + _SCONCE_RISE),
            (0.08, 0.06, 0.1),
            "wall-mounted lamp",
        )
        b.pairs.append(ManualPair(switch.id, sconce.id, rule.relation))
    if lights:
        b.proposals.append(
            FunctionalProposal(
                first_item="light switch",
                second_item="sconce light",
                interaction=rule.relation,
                confidence=0.7,
                is_one_to_one=True,
                is_local=True,
            )
        )


def _build_faucet_station(b: _Builder) -> None:
    ox, oy = b.next_station()
    b.add_object("faucet", b.place(ox, oy, 1.0), (0.04, 0.1, 0.12), "swivel spout tap")
    b.add_object("sink", b.place(ox, oy + 0.3, 0.9), (0.25, 0.2, 0.1), "basin under the tap")
    b.use_rule("faucet", "sink")
    b.proposals.append(
        FunctionalProposal(
            first_item="faucet",
            second_item="sink",
            interaction="fills with water",
            confidence=0.75,
            is_one_to_one=True,
            is_local=True,
        )
    )


def _build_cabinet(b: _Builder) -> None:
    ox, oy = b.next_station()
    cabinet = b.add_object(
        "cabinet", b.place(ox, oy, 0.4), (0.3, 0.3, 0.4), "single-door storage unit"
    )
    cx, cy, cz = cabinet.center
    b.add_part(cabinet, 0, "handle", (cx, cy - 0.31, cz), (0.08, 0.01, 0.02), "door pull")
    b.use_rule("handle", "cabinet")
    b.proposals.append(
        FunctionalProposal(
            first_item="handle",
            second_item="cabinet",
            interaction="opens",
            confidence=0.8,
            is_one_to_one=True,
            scope_object=cabinet.id,
        )
    )


def _build_outlet_station(b: _Builder, appliances: int, appliance_label: str) -> None:
    ox, oy = b.next_station()
    b.add_object("wall outlet", b.place(ox, oy, 0.3), (0.04, 0.02, 0.05), "duplex receptacle")
    # One appliance sits within reach, the rest beyond the one-meter rule.
    offsets = [(0.0, 0.7)]
    for k in range(appliances - 1):
        offsets.append(((k % 3 - 1) * 0.45, 1.4 + 0.45 * (k // 3)))
    for i in range(appliances):
        dx, dy = offsets[i]
        b.add_object(
            appliance_label,
            b.place(ox + dx, oy + dy, 0.15),
            (0.1, 0.1, 0.12),
            "countertop appliance",
        )
    if appliances:
        b.use_rule("wall outlet", appliance_label)
        b.proposals.append(
            FunctionalProposal(
                first_item="wall outlet",
                second_item=appliance_label,
                interaction="provides power to",
                confidence=0.6,
                is_one_to_one=False,
                is_local=True,
            )
        )


def _build_remote_station(b: _Builder) -> None:
    ox, oy = b.next_station()
    b.add_object(
        "remote control", b.place(ox, oy, 0.45), (0.03, 0.08, 0.02), "handheld clicker"
    )
    b.add_object(
        "television", b.place(ox + 1.5, oy, 1.2), (0.55, 0.05, 0.35), "flat panel display"
    )
    b.use_rule("remote control", "television")
    b.proposals.append(
        FunctionalProposal(
            first_item="remote control",
            second_item="television",
            interaction="controls",
            confidence=0.9,
            is_one_to_one=False,
            is_local=False,
        )
    )


def generate_detail(config: GenConfig) -> GenResult:
    """Build one scene and everything needed to evaluate against it."""
    rng = np.random.default_rng(config.seed)
    b = _Builder(rng, config.jitter)
    counts = config.counts()
    appliance_label = "kettle" if config.room_type == "kitchen" else "floor lamp"
    for _ in range(counts["stoves"]):
        _build_stove(b, config.burners_per_stove, config.spread)
    for _ in range(counts["switch_clusters"]):
        _build_switch_cluster(b, config.lights_per_cluster)
    for _ in range(counts["faucets"]):
        _build_faucet_station(b)
    for _ in range(counts["cabinets"]):
        _build_cabinet(b)
    for _ in range(counts["outlets"]):
        _build_outlet_station(b, config.appliances_per_outlet, appliance_label)
    for _ in range(counts["remotes"]):
        _build_remote_station(b)
    scene = SceneGraph(b.nodes)
    rules = tuple(b.rules)
    pairs = tuple(b.pairs)
    gt = annotate(scene, rules, pairs)
    # Repeated stations of one archetype contribute the same object-level
    # proposal; a second copy would double every candidate edge.
    unique: dict[FunctionalProposal, None] = {}
    for prop in b.proposals:
        unique[prop] = None
    return GenResult(
        scene=scene,
        gt=gt,
        proposals=tuple(unique),
        rules=rules,
        manual_pairs=pairs,
    )


def generate_scene(
    config: GenConfig,
) -> tuple[SceneGraph, GroundTruthGraph, list[FunctionalProposal]]:
    """Scene, ground truth, and proposal list for one seeded layout."""
    result = generate_detail(config)
    return result.scene, result.gt, list(result.proposals)


# ---------------------------------------------------------------------------
# File formats


def rules_from_dict(data: Mapping) -> list[AnnotationRule]:
    try:
        entries = data["rules"]
    except (KeyError, TypeError) as exc:
        raise SynthError("rule file must contain a 'rules' list") from exc
    return [AnnotationRule.from_dict(entry) for entry in entries]


def rules_to_dict(rules: Sequence[AnnotationRule]) -> dict:
    return {"rules": [rule.to_dict() for rule in rules]}


def manual_pairs_from_dict(data: Mapping) -> list[ManualPair]:
    try:
        entries = data["pairs"]
    except (KeyError, TypeError) as exc:
        raise SynthError("manual pair file must contain a 'pairs' list") from exc
    pairs = []
    for entry in entries:
        try:
            pairs.append(
                ManualPair(
                    first_id=str(entry["first_id"]),
                    second_id=str(entry["second_id"]),
                    relation=str(entry["relation"]),
                )
            )
        except (KeyError, TypeError) as exc:
            raise SynthError(f"malformed manual pair: {entry!r}") from exc
    return pairs


def manual_pairs_to_dict(pairs: Sequence[ManualPair]) -> dict:
    return {
        "pairs": [
            {"first_id": p.first_id, "second_id": p.second_id, "relation": p.relation}
            for p in pairs
        ]
    }


def load_ground_truth(path: str | Path) -> GroundTruthGraph:
    with open(path, encoding="utf-8") as fh:
        return GroundTruthGraph.from_dict(json.load(fh))


def save_ground_truth(gt: GroundTruthGraph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(gt.to_dict(), fh, indent=2)
        fh.write("\n")
