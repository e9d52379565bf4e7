"""Factor graphs over candidate functional edges.

Every candidate edge of a factor-planned group becomes one binary variable.
Each variable gets a unary prior derived from the edge length relative to
the group's characteristic length, and one-to-one groups additionally get
a cardinality factor per endpoint node and side that prefers exactly one
active edge at that endpoint. Variables connected through shared factors
form components that can be solved independently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from funfact.proposals import EdgeGroup, FactorPlan

# Lower bound on the inactive-state potential so a zero-length edge
# (prior exactly 1) cannot zero out assignments where it is off.
PHI_ZERO_FLOOR = 1e-9

# Default strength of the one-to-one preference. Must lie in (0, 1):
# smaller values punish deviations from degree one harder.
DEFAULT_CARDINALITY_BASE = 0.25

SIDE_SOURCE = "source"
SIDE_TARGET = "target"


def proximity_prior(length: float, lam: float) -> float:
    """Activation probability of an edge of the given length.

    Exponential falloff in units of the group scale lam. A group whose
    nodes all coincide has lam == 0; every such edge is maximally plausible
    and gets p = 1.
    """
    if length < 0.0:
        raise ValueError(f"edge length must be >= 0, got {length}")
    if lam < 0.0:
        raise ValueError(f"length scale must be >= 0, got {lam}")
    if lam == 0.0:
        return 1.0
    return math.exp(-length / lam)


def cardinality_value(count: int, base: float) -> float:
    """Weight of an endpoint with `count` active incident edges.

    Degree one is ideal (weight 1); every extra active edge costs a factor
    of base; a fully inactive endpoint costs base squared, i.e. slightly
    worse than degree two, because a one-to-one relation losing both sides
    is the least plausible outcome.
    """
    if not 0.0 < base < 1.0:
        raise ValueError(f"cardinality base must lie in (0, 1), got {base}")
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if count == 0:
        return base * base
    return base ** (count - 1)


@dataclass(frozen=True)
class UnaryPrior:
    variable: str
    p: float

    def table(self) -> tuple[float, float]:
        """(inactive, active) potentials with the inactive floor applied."""
        return (max(1.0 - self.p, PHI_ZERO_FLOOR), self.p)


@dataclass(frozen=True)
class CardinalityFactor:
    node: str
    side: str
    variables: tuple[str, ...]
    base: float


@dataclass(frozen=True)
class FactorComponent:
    """A connected block of variables, priors and factors.

    priors is aligned with variables (one prior per variable, same order).
    """

    id: str
    variables: tuple[str, ...]
    priors: tuple[UnaryPrior, ...]
    factors: tuple[CardinalityFactor, ...]

    def __post_init__(self):
        if len(self.priors) != len(self.variables):
            raise ValueError(
                f"component {self.id}: {len(self.variables)} variables but "
                f"{len(self.priors)} priors"
            )
        known = set(self.variables)
        for prior, var in zip(self.priors, self.variables):
            if prior.variable != var:
                raise ValueError(f"component {self.id}: priors out of order at {var}")
        for factor in self.factors:
            missing = [v for v in factor.variables if v not in known]
            if missing:
                raise ValueError(
                    f"component {self.id}: factor at {factor.node} references "
                    f"unknown variables {missing}"
                )


class _UnionFind:
    def __init__(self, items: Iterable[str]):
        self.parent = {item: item for item in items}

    def find(self, item: str) -> str:
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _group_factors(group: EdgeGroup, base: float) -> list[CardinalityFactor]:
    by_source: dict[str, list[str]] = {}
    by_target: dict[str, list[str]] = {}
    for edge in group.edges:
        by_source.setdefault(edge.source, []).append(edge.id)
        by_target.setdefault(edge.target, []).append(edge.id)
    factors = [
        CardinalityFactor(node=node, side=SIDE_SOURCE, variables=tuple(vs), base=base)
        for node, vs in by_source.items()
    ]
    factors.extend(
        CardinalityFactor(node=node, side=SIDE_TARGET, variables=tuple(vs), base=base)
        for node, vs in by_target.items()
    )
    return factors


def build_graph(
    groups: Sequence[EdgeGroup], base: float = DEFAULT_CARDINALITY_BASE
) -> list[FactorComponent]:
    """Build factor-graph components for every factor-planned group.

    Plan-less groups contribute nothing (their edges keep the semantic
    confidence). Proximity-only groups yield one single-variable component
    per edge; one-to-one groups get a cardinality factor per endpoint node
    and side, and their components follow factor connectivity. Component
    ids are assigned in deterministic group-then-edge order.
    """
    components: list[FactorComponent] = []
    counter = 0
    for group in groups:
        if group.plan is FactorPlan.NONE or not group.edges:
            continue
        priors = {
            edge.id: UnaryPrior(edge.id, proximity_prior(edge.length, group.lam))
            for edge in group.edges
        }
        factors: list[CardinalityFactor] = []
        if group.plan is FactorPlan.PROXIMITY_AND_CARDINALITY:
            factors = _group_factors(group, base)

        uf = _UnionFind(priors.keys())
        for factor in factors:
            first = factor.variables[0]
            for other in factor.variables[1:]:
                uf.union(first, other)

        edge_order = [edge.id for edge in group.edges]
        members: dict[str, list[str]] = {}
        for var in edge_order:
            members.setdefault(uf.find(var), []).append(var)
        # Deterministic component order: by first member's edge position.
        for root in sorted(members, key=lambda r: edge_order.index(members[r][0])):
            variables = tuple(members[root])
            var_set = set(variables)
            comp_factors = tuple(
                f for f in factors if uf.find(f.variables[0]) == root and set(f.variables) <= var_set
            )
            components.append(
                FactorComponent(
                    id=f"c{counter:04d}",
                    variables=variables,
                    priors=tuple(priors[v] for v in variables),
                    factors=comp_factors,
                )
            )
            counter += 1
    return components


def component_of(components: Sequence[FactorComponent]) -> dict[str, str]:
    """Map every variable to the id of its component."""
    mapping: dict[str, str] = {}
    for comp in components:
        for var in comp.variables:
            mapping[var] = comp.id
    return mapping
