"""Inference checked against independently derived closed forms.

The expected values below were worked out by hand from the potential
definitions (enumerating states on paper), not by running the code, so
they can catch a consistently wrong implementation.
"""
from __future__ import annotations

import math
import random

import pytest

from funfact.factorgraph import (
    SIDE_SOURCE,
    SIDE_TARGET,
    CardinalityFactor,
    FactorComponent,
    UnaryPrior,
    build_graph,
)
from funfact.inference import (
    DEFAULT_TAU,
    METHOD_BP,
    METHOD_EXACT,
    METHOD_SEMANTIC,
    InferenceConfig,
    ScoredEdge,
    binary_entropy,
    brute_force_marginals,
    infer,
    infer_all,
    threshold_edges,
    update_confidences,
)

from conftest import (
    knob_burner_setup,
    max_marginal_gap,
    random_tree_component,
    random_two_sided_component,
    square_knob_burner_component,
)


def single_var_component(p, factor_base=None):
    factors = ()
    if factor_base is not None:
        factors = (CardinalityFactor("n1", SIDE_SOURCE, ("e0",), factor_base),)
    return FactorComponent(
        id="c0000",
        variables=("e0",),
        priors=(UnaryPrior("e0", p),),
        factors=factors,
    )


def two_by_two_component(p, b):
    variables = ("e11", "e12", "e21", "e22")
    return FactorComponent(
        id="c0000",
        variables=variables,
        priors=tuple(UnaryPrior(v, p) for v in variables),
        factors=(
            CardinalityFactor("s1", SIDE_SOURCE, ("e11", "e12"), b),
            CardinalityFactor("s2", SIDE_SOURCE, ("e21", "e22"), b),
            CardinalityFactor("t1", SIDE_TARGET, ("e11", "e21"), b),
            CardinalityFactor("t2", SIDE_TARGET, ("e12", "e22"), b),
        ),
    )


def two_by_two_closed_form(p, b):
    """Partition function and per-edge active mass, derived on paper.

    States grouped by number of active edges; q is the inactive potential.
    Zero active edges puts every endpoint at count 0 (b^2 each, four
    endpoints); a perfect matching (two disjoint edges) puts every endpoint
    at count 1 and costs nothing.
    """
    q = 1.0 - p
    z = (
        q**4 * b**8
        + 4 * p * q**3 * b**4
        + 4 * p**2 * q**2 * b**3
        + 2 * p**2 * q**2
        + 4 * p**3 * q * b**2
        + p**4 * b**4
    )
    mass = (
        p * q**3 * b**4
        + p**2 * q**2 * (2 * b**3 + 1)
        + 3 * p**3 * q * b**2
        + p**4 * b**4
    )
    return z, mass


def test_single_variable_prior_is_returned_unchanged():
    result = infer(single_var_component(0.5))
    assert result.marginals["e0"] == 0.5
    assert result.log_partition == pytest.approx(0.0, abs=1e-12)
    assert result.method == METHOD_EXACT
    assert result.converged

    result = infer(single_var_component(0.7))
    assert result.marginals["e0"] == pytest.approx(0.7, abs=1e-12)


def test_single_variable_with_cardinality_factor():
    # x=0 weighs (1-p) * b^2, x=1 weighs p * 1.
    # p=0.5, b=0.5: marginal 0.5/0.625 = 0.8, Z = 0.625.
    result = infer(single_var_component(0.5, factor_base=0.5))
    assert result.marginals["e0"] == pytest.approx(0.8, abs=1e-12)
    assert result.log_partition == pytest.approx(math.log(0.625), abs=1e-12)


@pytest.mark.parametrize("p", [0.3, 0.5, 0.62])
@pytest.mark.parametrize("b", [0.25, 0.5])
def test_two_by_two_matches_hand_derived_closed_form(p, b):
    z, mass = two_by_two_closed_form(p, b)
    result = infer(two_by_two_component(p, b))
    assert result.method == METHOD_EXACT
    for var in ("e11", "e12", "e21", "e22"):
        assert result.marginals[var] == pytest.approx(mass / z, abs=1e-12)
    assert result.log_partition == pytest.approx(math.log(z), abs=1e-12)


def test_brute_oracle_matches_closed_form_too():
    z, mass = two_by_two_closed_form(0.4, 0.25)
    marginals, log_z = brute_force_marginals(two_by_two_component(0.4, 0.25))
    for value in marginals.values():
        assert value == pytest.approx(mass / z, abs=1e-12)
    assert log_z == pytest.approx(math.log(z), abs=1e-12)


def test_enumeration_matches_brute_oracle_on_random_components():
    rng = random.Random(7)
    for trial in range(40):
        b = [0.1, 0.25, 0.5, 0.9][trial % 4]
        component = random_two_sided_component(rng, b)
        result = infer(component)
        assert result.method == METHOD_EXACT
        expected, log_z = brute_force_marginals(component)
        assert max_marginal_gap(result.marginals, expected) <= 1e-9
        assert result.log_partition == pytest.approx(log_z, abs=1e-9)


def test_structured_sweep_matches_brute_oracle():
    rng = random.Random(11)
    config = InferenceConfig(exact_max_vars=0)
    for trial in range(25):
        b = [0.1, 0.25, 0.5, 0.9][trial % 4]
        _, component = square_knob_burner_component(rng.randrange(2, 5), rng, b)
        result = infer(component, config=config)
        assert result.method == METHOD_EXACT
        assert "two_sided_sweep" in result.diagnostics
        expected, log_z = brute_force_marginals(component)
        assert max_marginal_gap(result.marginals, expected) <= 1e-12
        assert result.log_partition == pytest.approx(log_z, abs=1e-12)


def test_structured_sweep_handles_evidence():
    rng = random.Random(3)
    config = InferenceConfig(exact_max_vars=0)
    _, component = square_knob_burner_component(3, rng, 0.25)
    evidence = {component.variables[0]: True, component.variables[4]: False}
    result = infer(component, evidence, config)
    assert "two_sided_sweep" in result.diagnostics
    expected, log_z = brute_force_marginals(component, evidence)
    assert max_marginal_gap(result.marginals, expected) <= 1e-12
    assert result.log_partition == pytest.approx(log_z, abs=1e-12)


def test_forced_bp_is_tight_on_trees():
    rng = random.Random(19)
    config = InferenceConfig(force_bp=True)
    for _ in range(30):
        component = random_tree_component(rng, 0.25)
        result = infer(component, config=config)
        assert result.method == METHOD_BP
        assert result.converged
        expected, log_z = brute_force_marginals(component)
        assert max_marginal_gap(result.marginals, expected) <= 1e-6
        # Bethe log partition is exact on acyclic structure.
        assert result.log_partition == pytest.approx(log_z, abs=1e-5)


def test_forced_bp_stays_close_on_loopy_components():
    rng = random.Random(23)
    config = InferenceConfig(force_bp=True)
    for trial in range(30):
        b = [0.5, 0.9][trial % 2]
        component = random_two_sided_component(rng, b)
        result = infer(component, config=config)
        assert result.method == METHOD_BP
        expected, _ = brute_force_marginals(component)
        assert max_marginal_gap(result.marginals, expected) <= 5e-2


def test_evidence_clamp_pins_marginals():
    _, component = knob_burner_setup(
        [(0.0, 0.0, 0.0), (0.4, 0.0, 0.0)], [(0.0, 0.0, 0.6), (0.4, 0.0, 0.6)]
    )
    var = component.variables[0]
    on = infer(component, {var: True})
    off = infer(component, {var: False})
    assert on.marginals[var] == 1.0
    assert off.marginals[var] == 0.0
    for clamped, result in ((True, on), (False, off)):
        expected, log_z = brute_force_marginals(component, {var: clamped})
        assert max_marginal_gap(result.marginals, expected) <= 1e-12
        assert result.log_partition == pytest.approx(log_z, abs=1e-12)


def test_evidence_retraction_restores_baseline():
    _, component = knob_burner_setup(
        [(0.0, 0.0, 0.0), (0.4, 0.0, 0.0)], [(0.0, 0.0, 0.6), (0.4, 0.0, 0.6)]
    )
    before = infer(component)
    infer(component, {component.variables[0]: True})
    after = infer(component)
    assert max_marginal_gap(before.marginals, after.marginals) == 0.0
    assert before.log_partition == after.log_partition


def test_infer_all_merges_independent_components():
    a = single_var_component(0.5, factor_base=0.5)
    b = FactorComponent(
        id="c0001",
        variables=("f0",),
        priors=(UnaryPrior("f0", 0.7),),
        factors=(),
    )
    aggregate = infer_all([a, b])
    assert aggregate.marginals["e0"] == pytest.approx(0.8, abs=1e-12)
    assert aggregate.marginals["f0"] == pytest.approx(0.7, abs=1e-12)
    assert aggregate.component_of == {"e0": "c0000", "f0": "c0001"}
    total = aggregate.results["c0000"].log_partition + aggregate.results["c0001"].log_partition
    assert aggregate.log_partition == pytest.approx(total, abs=1e-12)


def test_infer_all_rejects_unknown_evidence_variable():
    with pytest.raises(ValueError):
        infer_all([single_var_component(0.5)], {"nope": True})


def test_update_confidences_uses_marginals_for_planned_edges():
    groups, component = knob_burner_setup(
        [(0.0, 0.0, 0.0), (0.4, 0.0, 0.0)], [(0.0, 0.0, 0.6), (0.4, 0.0, 0.6)]
    )
    aggregate = infer_all([component])
    scored = update_confidences(groups, aggregate)
    assert [e.id for e in scored] == list(component.variables)
    for edge in scored:
        assert edge.confidence == aggregate.marginals[edge.id]
        assert edge.method == METHOD_EXACT
        assert edge.converged


def test_update_confidences_keeps_semantic_confidence_without_plan():
    from funfact.proposals import FunctionalProposal, build_all_groups
    from funfact.scene import SceneGraph

    from conftest import object_node

    scene = SceneGraph(
        [
            object_node("obj_1", "remote", (0.0, 0.0, 0.0)),
            object_node("obj_2", "television", (3.0, 0.0, 0.0)),
        ]
    )
    prop = FunctionalProposal(
        first_item="remote",
        second_item="television",
        interaction="controls",
        confidence=0.65,
        is_one_to_one=False,
        is_local=False,
    )
    groups, _ = build_all_groups(scene, [prop])
    scored = update_confidences(groups, infer_all(build_graph(groups)))
    assert len(scored) == 1
    assert scored[0].confidence == 0.65
    assert scored[0].method == METHOD_SEMANTIC


def test_update_confidences_raises_on_missing_marginal():
    groups, component = knob_burner_setup(
        [(0.0, 0.0, 0.0)], [(0.0, 0.0, 0.6)]
    )
    empty = infer_all([])
    with pytest.raises(RuntimeError):
        update_confidences(groups, empty)


def scored_edge(eid, confidence):
    return ScoredEdge(
        id=eid,
        source="a",
        target="b",
        interaction="controls",
        confidence=confidence,
        method=METHOD_EXACT,
        converged=True,
        group_id="g000",
    )


def test_threshold_is_inclusive():
    edges = [
        scored_edge("e0", DEFAULT_TAU),
        scored_edge("e1", DEFAULT_TAU - 1e-12),
        scored_edge("e2", None),
        scored_edge("e3", 0.99),
    ]
    kept = threshold_edges(edges)
    assert [e.id for e in kept] == ["e0", "e3"]
    assert [e.id for e in threshold_edges(edges, tau=0.0)] == ["e0", "e1", "e3"]


def test_binary_entropy_endpoints_and_peak():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(math.log(2.0), abs=1e-12)
    assert binary_entropy(0.2) == binary_entropy(0.8)


def test_brute_oracle_rejects_oversized_components():
    variables = tuple(f"v{i}" for i in range(25))
    component = FactorComponent(
        id="c0000",
        variables=variables,
        priors=tuple(UnaryPrior(v, 0.5) for v in variables),
        factors=(),
    )
    with pytest.raises(ValueError):
        brute_force_marginals(component)
