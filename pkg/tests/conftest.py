"""Shared scene and factor-component builders for the test suite."""
from __future__ import annotations

from funfact.factorgraph import (
    SIDE_SOURCE,
    SIDE_TARGET,
    CardinalityFactor,
    FactorComponent,
    UnaryPrior,
    build_graph,
)
from funfact.proposals import FunctionalProposal, build_all_groups
from funfact.scene import Box3, NodeKind, SceneGraph, SceneNode


def box_around(center, half=0.05):
    if isinstance(half, (int, float)):
        half = (half, half, half)
    return Box3(
        tuple(c - h for c, h in zip(center, half)),
        tuple(c + h for c, h in zip(center, half)),
    )


def object_node(nid, label, center, half=0.4, **kwargs):
    return SceneNode(
        id=nid,
        label=label,
        kind=NodeKind.OBJECT,
        center=tuple(center),
        box=box_around(center, half),
        **kwargs,
    )


def part_node(nid, label, parent, center, half=0.05, **kwargs):
    return SceneNode(
        id=nid,
        label=label,
        kind=NodeKind.PART,
        center=tuple(center),
        box=box_around(center, half),
        parent=parent,
        **kwargs,
    )


def knob_burner_setup(knob_pos, burner_pos, b=0.25):
    """One-to-one knob/burner layout grounded into a single component.

    Returns (groups, component). Knob and burner positions are 3D centers;
    the owning object is a large box so any placement validates.
    """
    nodes = [object_node("stove", "stove", (0.0, 0.0, 0.0), half=50.0)]
    for i, pos in enumerate(knob_pos):
        nodes.append(part_node(f"knob_{i}", "stove knob", "stove", pos))
    for j, pos in enumerate(burner_pos):
        nodes.append(part_node(f"burner_{j}", "burner", "stove", pos))
    scene = SceneGraph(nodes)
    prop = FunctionalProposal(
        first_item="stove knob",
        second_item="burner",
        interaction="controls",
        confidence=0.9,
        is_one_to_one=True,
        scope_object="stove",
    )
    groups, warnings = build_all_groups(scene, [prop])
    assert not warnings
    components = build_graph(groups, base=b)
    assert len(components) == 1
    return groups, components[0]


def square_knob_burner_component(k, rng, b=0.25):
    """k x k knob/burner component with jittered grid positions."""
    knob_pos = [
        (i * 0.3 + rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), 0.15)
        for i in range(k)
    ]
    burner_pos = [
        (j * 0.3 + rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), 0.75)
        for j in range(k)
    ]
    return knob_burner_setup(knob_pos, burner_pos, b=b)


def _component_from_cells(cells, n_src, n_tgt, rng, b, comp_id="t0000"):
    ordered = sorted(cells)
    names = {cell: f"v{idx:02d}" for idx, cell in enumerate(ordered)}
    variables = tuple(names[cell] for cell in ordered)
    priors = tuple(
        UnaryPrior(names[cell], float(rng.uniform(0.01, 0.99))) for cell in ordered
    )
    factors = []
    for i in range(n_src):
        vs = tuple(names[c] for c in ordered if c[0] == i)
        if vs:
            factors.append(CardinalityFactor(node=f"s{i}", side=SIDE_SOURCE, variables=vs, base=b))
    for j in range(n_tgt):
        vs = tuple(names[c] for c in ordered if c[1] == j)
        if vs:
            factors.append(CardinalityFactor(node=f"t{j}", side=SIDE_TARGET, variables=vs, base=b))
    return FactorComponent(id=comp_id, variables=variables, priors=priors, factors=tuple(factors))


def random_two_sided_component(rng, b, max_vars=12):
    """Random connected one-to-one block: every variable sits in exactly
    one source-side and one target-side cardinality factor."""
    n_src = rng.randrange(1, 5)
    n_tgt = rng.randrange(1, 5)
    # Random bipartite spanning tree keeps the block connected.
    cells = set()
    pending = [("s", i) for i in range(1, n_src)] + [("t", j) for j in range(n_tgt)]
    rng.shuffle(pending)
    seen = {"s": [0], "t": []}
    while pending:
        side, idx = pending.pop(0)
        opposite = "t" if side == "s" else "s"
        if not seen[opposite]:
            pending.append((side, idx))
            continue
        anchor = rng.choice(seen[opposite])
        cells.add((idx, anchor) if side == "s" else (anchor, idx))
        seen[side].append(idx)
    extras = [(i, j) for i in range(n_src) for j in range(n_tgt) if (i, j) not in cells]
    rng.shuffle(extras)
    for cell in extras:
        if len(cells) >= max_vars:
            break
        if rng.random() < 0.45:
            cells.add(cell)
    return _component_from_cells(cells, n_src, n_tgt, rng, b)


def random_tree_component(rng, b, max_vars=12):
    """Random acyclic component: a star (one factor) or a factor chain."""
    if rng.random() < 0.5:
        k = rng.randrange(1, 7)
        variables = tuple(f"v{idx:02d}" for idx in range(k))
        priors = tuple(UnaryPrior(v, float(rng.uniform(0.01, 0.99))) for v in variables)
        factor = CardinalityFactor(node="s0", side=SIDE_SOURCE, variables=variables, base=b)
        return FactorComponent(id="t0000", variables=variables, priors=priors, factors=(factor,))
    k = rng.randrange(2, min(7, max_vars + 1))
    variables = tuple(f"v{idx:02d}" for idx in range(k))
    priors = tuple(UnaryPrior(v, float(rng.uniform(0.01, 0.99))) for v in variables)
    factors = []
    for i in range(k - 1):
        side = SIDE_SOURCE if i % 2 == 0 else SIDE_TARGET
        factors.append(
            CardinalityFactor(
                node=f"n{i}", side=side, variables=(variables[i], variables[i + 1]), base=b
            )
        )
    return FactorComponent(id="t0000", variables=variables, priors=priors, factors=tuple(factors))


def random_match_pair(rng, grid=4, vocab=("lamp", "chair", "table", "plant", "shelf", "stove")):
    """Random ground-truth/predicted scene pair for matching protocol tests.

    Boxes live on a cell grid; predictions overlap only the boxes of their
    own cell and every prediction within a cell carries one shared label,
    like duplicate detections of the same thing.
    """
    gt_nodes = []
    pred_nodes = []
    for cx in range(grid):
        for cy in range(grid):
            if rng.random() < 0.25:
                continue
            base = (cx * 2.0, cy * 2.0, 0.0)
            label = rng.choice(vocab)
            n_gt = 1 + int(rng.random() < 0.3)
            for g in range(n_gt):
                nid = f"gt_{cx}_{cy}_{g}"
                gt_nodes.append(object_node(nid, label, base, half=0.45))
            pred_label = label if rng.random() < 0.8 else rng.choice(vocab)
            for p in range(rng.randrange(0, 4)):
                center = tuple(c + rng.uniform(-0.1, 0.1) for c in base)
                pred_nodes.append(object_node(f"pr_{cx}_{cy}_{p}", pred_label, center, half=0.4))
    return SceneGraph(gt_nodes), SceneGraph(pred_nodes)


def max_marginal_gap(a: dict, b: dict) -> float:
    assert set(a) == set(b)
    return max((abs(a[k] - b[k]) for k in a), default=0.0)
