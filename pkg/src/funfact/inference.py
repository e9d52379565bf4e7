"""Marginal inference over edge-candidate factor components.

Three routes share one contract (per-variable activation marginals plus a
log partition value):

* dense enumeration for small components, vectorized over all states;
* an exact column-sweep for larger components whose factors form a clean
  two-sided one-to-one structure (each variable in exactly one source-side
  and one target-side cardinality factor), tracking joint count vectors of
  the source endpoints, so stove-sized groups stay exactly solvable;
* damped synchronous loopy belief propagation otherwise, with
  factor-to-variable messages computed by an O(k^2) chain sweep over
  partial activation counts.

brute_force_marginals is a deliberately independent reference: plain
Python state enumeration with no shared numerics, used to cross-check the
other routes.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import logsumexp

from funfact.factorgraph import (
    CardinalityFactor,
    FactorComponent,
    SIDE_SOURCE,
    SIDE_TARGET,
    cardinality_value,
)
from funfact.proposals import EdgeGroup, FactorPlan

logger = logging.getLogger(__name__)

METHOD_EXACT = "exact"
METHOD_BP = "loopy_bp"
METHOD_SEMANTIC = "semantic"

# An edge counts as predicted once its confidence reaches this threshold.
DEFAULT_TAU = 0.5

# Enumeration beyond this many variables is off the table no matter what
# the configuration asks for.
HARD_ENUM_CAP = 24

# State budget for the two-sided exact sweep (product of per-row count
# ranges); beyond it the component falls back to belief propagation.
STRUCTURED_STATE_CAP = 2_000_000
STRUCTURED_SUBSET_CAP = 4096

_ENUM_CHUNK = 1 << 16
_LOG_TINY = -1e30


@dataclass(frozen=True)
class InferenceConfig:
    exact_max_vars: int = 16
    bp_damping: float = 0.3
    bp_max_iters: int = 200
    bp_tol: float = 1e-6
    b: float = 0.25
    force_bp: bool = False
    structured_exact: bool = True


@dataclass(frozen=True)
class InferenceResult:
    marginals: dict[str, float]
    log_partition: float
    method: str
    converged: bool
    iterations: int
    diagnostics: tuple[str, ...] = ()


@dataclass(frozen=True)
class AggregateResult:
    """Scene-wide view over per-component inference runs."""

    marginals: dict[str, float]
    log_partition: float
    results: dict[str, InferenceResult]
    component_of: dict[str, str]
    diagnostics: tuple[str, ...] = ()


Evidence = Mapping[str, bool]


def _component_evidence(component: FactorComponent, evidence: Evidence | None) -> dict[str, bool]:
    if not evidence:
        return {}
    return {var: bool(val) for var, val in evidence.items() if var in set(component.variables)}


# ---------------------------------------------------------------------------
# Independent reference: plain-Python enumeration.


class _LogSum:
    """Streaming logsumexp accumulator (max-anchored)."""

    def __init__(self):
        self.anchor = -math.inf
        self.total = 0.0

    def add(self, log_value: float) -> None:
        if log_value == -math.inf:
            return
        if log_value > self.anchor:
            if self.anchor == -math.inf:
                self.anchor = log_value
                self.total = 1.0
                return
            self.total = self.total * math.exp(self.anchor - log_value) + 1.0
            self.anchor = log_value
        else:
            self.total += math.exp(log_value - self.anchor)

    def value(self) -> float:
        if self.anchor == -math.inf:
            return -math.inf
        return self.anchor + math.log(self.total)


def brute_force_marginals(
    component: FactorComponent, evidence: Evidence | None = None
) -> tuple[dict[str, float], float]:
    """Reference marginals and log partition by full state enumeration.

    Kept intentionally simple and separate from the production routes:
    itertools over assignments, per-state potential products, nothing
    shared. Linear-space accumulation up to 20 variables, log-space above,
    hard cap at HARD_ENUM_CAP variables.
    """
    n = len(component.variables)
    if n > HARD_ENUM_CAP:
        raise ValueError(f"component has {n} variables, cap is {HARD_ENUM_CAP}")
    clamps = _component_evidence(component, evidence)
    var_index = {v: i for i, v in enumerate(component.variables)}
    tables = [prior.table() for prior in component.priors]
    factor_slots = [[var_index[v] for v in f.variables] for f in component.factors]
    bases = [f.base for f in component.factors]
    fixed = [(var_index[v], 1 if val else 0) for v, val in clamps.items()]

    if n <= 20:
        z = 0.0
        mass = [0.0] * n
        for bits in itertools.product((0, 1), repeat=n):
            if any(bits[i] != val for i, val in fixed):
                continue
            w = 1.0
            for i, bit in enumerate(bits):
                w *= tables[i][bit]
            for slots, base in zip(factor_slots, bases):
                w *= cardinality_value(sum(bits[s] for s in slots), base)
            z += w
            for i, bit in enumerate(bits):
                if bit:
                    mass[i] += w
        marginals = {v: mass[var_index[v]] / z for v in component.variables}
        log_z = math.log(z)
    else:
        z_acc = _LogSum()
        mass_acc = [_LogSum() for _ in range(n)]
        for bits in itertools.product((0, 1), repeat=n):
            if any(bits[i] != val for i, val in fixed):
                continue
            lw = 0.0
            for i, bit in enumerate(bits):
                value = tables[i][bit]
                lw += math.log(value) if value > 0.0 else _LOG_TINY
            for slots, base in zip(factor_slots, bases):
                lw += math.log(cardinality_value(sum(bits[s] for s in slots), base))
            z_acc.add(lw)
            for i, bit in enumerate(bits):
                if bit:
                    mass_acc[i].add(lw)
        log_z = z_acc.value()
        marginals = {
            v: math.exp(mass_acc[var_index[v]].value() - log_z)
            if mass_acc[var_index[v]].value() != -math.inf
            else 0.0
            for v in component.variables
        }
    for var, val in clamps.items():
        marginals[var] = 1.0 if val else 0.0
    return marginals, log_z


# ---------------------------------------------------------------------------
# Exact route 1: vectorized dense enumeration.


def _log_tables(component: FactorComponent) -> tuple[np.ndarray, np.ndarray]:
    t0 = np.empty(len(component.priors))
    t1 = np.empty(len(component.priors))
    for i, prior in enumerate(component.priors):
        phi0, phi1 = prior.table()
        t0[i] = math.log(phi0) if phi0 > 0.0 else _LOG_TINY
        t1[i] = math.log(phi1) if phi1 > 0.0 else _LOG_TINY
    return t0, t1


def _factor_log_curve(factor: CardinalityFactor) -> np.ndarray:
    k = len(factor.variables)
    return np.array([math.log(cardinality_value(c, factor.base)) for c in range(k + 1)])


def _exact_enumeration(component: FactorComponent, clamps: dict[str, bool]) -> InferenceResult:
    n = len(component.variables)
    var_index = {v: i for i, v in enumerate(component.variables)}
    t0, t1 = _log_tables(component)
    curves = [(_factor_log_curve(f), np.array([var_index[v] for v in f.variables])) for f in component.factors]
    fixed = [(var_index[v], 1 if val else 0) for v, val in clamps.items()]
    shifts = np.arange(n, dtype=np.int64)

    z_parts: list[float] = []
    mass_parts: list[np.ndarray] = []
    for lo in range(0, 1 << n, _ENUM_CHUNK):
        hi = min(lo + _ENUM_CHUNK, 1 << n)
        states = np.arange(lo, hi, dtype=np.int64)
        bits = ((states[:, None] >> shifts) & 1).astype(np.float64)
        if fixed:
            keep = np.ones(len(states), dtype=bool)
            for idx, val in fixed:
                keep &= bits[:, idx] == val
            bits = bits[keep]
            if bits.shape[0] == 0:
                continue
        logw = bits @ t1 + (1.0 - bits) @ t0
        for curve, idx in curves:
            counts = bits[:, idx].sum(axis=1).astype(np.int64)
            logw += curve[counts]
        z_parts.append(float(logsumexp(logw)))
        chunk_mass = np.full(n, -np.inf)
        for i in range(n):
            active = logw[bits[:, i] == 1.0]
            if active.size:
                chunk_mass[i] = float(logsumexp(active))
        mass_parts.append(chunk_mass)

    log_z = float(logsumexp(np.array(z_parts)))
    mass = np.full(n, -np.inf)
    for part in mass_parts:
        mass = np.logaddexp(mass, part)
    marginals = {
        v: float(np.exp(mass[var_index[v]] - log_z)) if mass[var_index[v]] != -np.inf else 0.0
        for v in component.variables
    }
    for var, val in clamps.items():
        marginals[var] = 1.0 if val else 0.0
    return InferenceResult(marginals, log_z, METHOD_EXACT, True, 0)


# ---------------------------------------------------------------------------
# Exact route 2: column sweep for two-sided one-to-one components.


@dataclass(frozen=True)
class _TwoSidedLayout:
    rows: tuple[CardinalityFactor, ...]
    cols: tuple[CardinalityFactor, ...]


def _two_sided_layout(component: FactorComponent) -> _TwoSidedLayout | None:
    """Detect the clean one-to-one shape the column sweep can solve.

    Every variable must appear in exactly one source-side and exactly one
    target-side factor and the component must have no other factors. The
    smaller side becomes the rows (the tracked count vector).
    """
    sources = [f for f in component.factors if f.side == SIDE_SOURCE]
    targets = [f for f in component.factors if f.side == SIDE_TARGET]
    if not sources or not targets or len(sources) + len(targets) != len(component.factors):
        return None
    for side in (sources, targets):
        seen: set[str] = set()
        for f in side:
            for v in f.variables:
                if v in seen:
                    return None
                seen.add(v)
        if seen != set(component.variables):
            return None
    rows, cols = (sources, targets)
    if _state_count(cols) < _state_count(rows):
        rows, cols = cols, rows
    return _TwoSidedLayout(tuple(rows), tuple(cols))


_STATE_GUARD = 1 << 62


def _state_count(side: Sequence[CardinalityFactor]) -> int:
    count = 1
    for f in side:
        count *= len(f.variables) + 1
        if count > _STATE_GUARD:
            return count
    return count


def _structured_budget_ok(layout: _TwoSidedLayout) -> bool:
    states = _state_count(layout.rows)
    if states > STRUCTURED_STATE_CAP:
        return False
    return all(1 << len(c.variables) <= STRUCTURED_SUBSET_CAP for c in layout.cols)


def _shift_slices(dims: Sequence[int], inc: Sequence[int]) -> tuple[tuple, tuple]:
    """(destination, source) index tuples adding `inc` along each axis."""
    dst = tuple(slice(i, None) if i else slice(None) for i in inc)
    src = tuple(slice(None, d - i) if i else slice(None) for d, i in zip(dims, inc))
    return dst, src


def _structured_exact(component: FactorComponent, clamps: dict[str, bool]) -> InferenceResult:
    layout = _two_sided_layout(component)
    assert layout is not None
    rows, cols = layout.rows, layout.cols
    row_of = {v: r for r, f in enumerate(rows) for v in f.variables}
    dims = [len(f.variables) + 1 for f in rows]
    priors = {p.variable: p.table() for p in component.priors}

    # Per-column transition table: subsets of the column's variables with
    # their weight (unary potentials times the column factor) and the row
    # count increments they cause.
    transitions: list[list[tuple[float, tuple[int, ...], tuple[str, ...]]]] = []
    for f in cols:
        entries = []
        options = []
        for v in f.variables:
            if v in clamps:
                options.append((1,) if clamps[v] else (0,))
            else:
                options.append((0, 1))
        for bits in itertools.product(*options):
            weight = 1.0
            inc = [0] * len(rows)
            active: list[str] = []
            for v, bit in zip(f.variables, bits):
                weight *= priors[v][bit]
                if bit:
                    inc[row_of[v]] += 1
                    active.append(v)
            weight *= cardinality_value(sum(bits), f.base)
            entries.append((weight, tuple(inc), tuple(active)))
        transitions.append(entries)

    row_curves = [
        np.array([cardinality_value(c, f.base) for c in range(len(f.variables) + 1)])
        for f in rows
    ]
    end_weight = row_curves[0]
    for curve in row_curves[1:]:
        end_weight = np.multiply.outer(end_weight, curve)
    end_weight = end_weight.reshape(dims)

    def advance(state: np.ndarray, entries) -> np.ndarray:
        out = np.zeros_like(state)
        for weight, inc, _ in entries:
            if weight == 0.0:
                continue
            dst, src = _shift_slices(dims, inc)
            out[dst] += weight * state[src]
        return out

    def retreat(state: np.ndarray, entries) -> np.ndarray:
        out = np.zeros_like(state)
        for weight, inc, _ in entries:
            if weight == 0.0:
                continue
            dst, src = _shift_slices(dims, inc)
            out[src] += weight * state[dst]
        return out

    # Forward pass with per-step rescaling to keep weights in range.
    forward: list[np.ndarray] = []
    log_scale_f = [0.0]
    state = np.zeros(dims)
    state[tuple([0] * len(dims))] = 1.0
    forward.append(state)
    for entries in transitions:
        state = advance(state, entries)
        peak = float(state.max())
        scale = 0.0
        if peak > 0.0:
            state = state / peak
            scale = math.log(peak)
        forward.append(state)
        log_scale_f.append(log_scale_f[-1] + scale)

    final_mass = float((forward[-1] * end_weight).sum())
    if final_mass <= 0.0:
        raise ArithmeticError(f"component {component.id}: zero total mass")
    log_z = math.log(final_mass) + log_scale_f[-1]

    # Backward pass mirrors forward, starting from the row-factor weights.
    backward: list[np.ndarray] = [np.empty(0)] * (len(cols) + 1)
    state = end_weight.copy()
    peak = float(state.max())
    if peak > 0.0:
        state = state / peak
    backward[len(cols)] = state
    for c in range(len(cols) - 1, -1, -1):
        state = retreat(state, transitions[c])
        peak = float(state.max())
        if peak > 0.0:
            state = state / peak
        backward[c] = state

    marginals: dict[str, float] = {}
    for c, entries in enumerate(transitions):
        pref = forward[c]
        suff = backward[c + 1]
        denominator = 0.0
        mass: dict[str, float] = {}
        for weight, inc, active in entries:
            if weight == 0.0:
                continue
            dst, src = _shift_slices(dims, inc)
            contribution = float((pref[src] * suff[dst]).sum()) * weight
            denominator += contribution
            for v in active:
                mass[v] = mass.get(v, 0.0) + contribution
        if denominator <= 0.0:
            raise ArithmeticError(f"component {component.id}: zero column mass")
        for f_var in cols[c].variables:
            marginals[f_var] = mass.get(f_var, 0.0) / denominator
    for var, val in clamps.items():
        marginals[var] = 1.0 if val else 0.0
    marginals = {v: marginals[v] for v in component.variables}
    return InferenceResult(marginals, log_z, METHOD_EXACT, True, 0, ("two_sided_sweep",))


# ---------------------------------------------------------------------------
# Loopy belief propagation.


def _normalize_log(pair: np.ndarray) -> np.ndarray:
    return pair - logsumexp(pair)


def _chain_messages(log_in: np.ndarray, curve: np.ndarray) -> tuple[np.ndarray, float]:
    """Factor-to-variable messages for one cardinality factor.

    log_in is (k, 2): incoming variable-to-factor messages in log space.
    Returns (k, 2) outgoing messages (unnormalized) plus the factor's
    unnormalized belief log-mass. Prefix distributions over activation
    counts run left to right; suffix value sums fold the cardinality curve
    from the right; combining the two around position j yields the message
    that excludes j's own incoming message exactly.
    """
    k = log_in.shape[0]
    prefix: list[np.ndarray] = [np.zeros(1)]
    for j in range(k):
        prev = prefix[-1]
        nxt = np.full(j + 2, -np.inf)
        nxt[: j + 1] = np.logaddexp(nxt[: j + 1], prev + log_in[j, 0])
        nxt[1: j + 2] = np.logaddexp(nxt[1: j + 2], prev + log_in[j, 1])
        prefix.append(nxt)
    suffix: list[np.ndarray] = [np.empty(0)] * (k + 1)
    suffix[k] = curve.copy()  # curve[z], z = 0..k
    for j in range(k - 1, -1, -1):
        nxt = suffix[j + 1]  # length j + 2, counts 0..j+1
        suffix[j] = np.logaddexp(log_in[j, 0] + nxt[: j + 1], log_in[j, 1] + nxt[1: j + 2])
    out = np.empty((k, 2))
    for j in range(k):
        pre = prefix[j]  # counts 0..j
        suf = suffix[j + 1]  # defined for 0..j+1
        out[j, 0] = logsumexp(pre + suf[: j + 1])
        out[j, 1] = logsumexp(pre + suf[1: j + 2])
    log_mass = float(logsumexp(prefix[k] + curve))
    return out, log_mass


def _loopy_bp(
    component: FactorComponent, clamps: dict[str, bool], config: InferenceConfig
) -> InferenceResult:
    n = len(component.variables)
    var_index = {v: i for i, v in enumerate(component.variables)}
    t0, t1 = _log_tables(component)
    unary = np.stack([t0, t1], axis=1)
    for var, val in clamps.items():
        i = var_index[var]
        unary[i] = np.array([0.0, _LOG_TINY]) if not val else np.array([_LOG_TINY, 0.0])

    factors = [
        (np.array([var_index[v] for v in f.variables]), _factor_log_curve(f))
        for f in component.factors
    ]
    adjacency: dict[int, list[tuple[int, int]]] = {i: [] for i in range(n)}
    for f_idx, (slots, _) in enumerate(factors):
        for slot, v_idx in enumerate(slots):
            adjacency[v_idx].append((f_idx, slot))

    msg_vf = [np.full((len(slots), 2), math.log(0.5)) for slots, _ in factors]
    msg_fv = [np.full((len(slots), 2), math.log(0.5)) for slots, _ in factors]

    damping = config.bp_damping
    converged = False
    iterations = 0
    for iteration in range(1, config.bp_max_iters + 1):
        iterations = iteration
        # Variable-to-factor sweep.
        totals = unary.copy()
        for f_idx, (slots, _) in enumerate(factors):
            totals[slots] += msg_fv[f_idx]
        for f_idx, (slots, _) in enumerate(factors):
            for slot, v_idx in enumerate(slots):
                msg_vf[f_idx][slot] = _normalize_log(totals[v_idx] - msg_fv[f_idx][slot])
        # Factor-to-variable sweep with damping.
        delta = 0.0
        for f_idx, (slots, curve) in enumerate(factors):
            fresh, _ = _chain_messages(msg_vf[f_idx], curve)
            for slot in range(len(slots)):
                new = _normalize_log(fresh[slot])
                if damping > 0.0:
                    new = _normalize_log(damping * msg_fv[f_idx][slot] + (1.0 - damping) * new)
                delta = max(delta, abs(math.exp(new[1]) - math.exp(msg_fv[f_idx][slot][1])))
                msg_fv[f_idx][slot] = new
        if delta < config.bp_tol:
            converged = True
            break

    beliefs = unary.copy()
    for f_idx, (slots, _) in enumerate(factors):
        beliefs[slots] += msg_fv[f_idx]
    marginals: dict[str, float] = {}
    for var, i in var_index.items():
        pair = beliefs[i]
        marginals[var] = float(math.exp(pair[1] - logsumexp(pair)))
    for var, val in clamps.items():
        marginals[var] = 1.0 if val else 0.0

    # Fixed-point free-energy assembly of the log partition; exact when the
    # component is a tree.
    log_z = 0.0
    for i in range(n):
        log_z += float(logsumexp(beliefs[i]))
    for f_idx, (slots, curve) in enumerate(factors):
        _, log_mass = _chain_messages(msg_vf[f_idx], curve)
        log_z += log_mass
        for slot in range(len(slots)):
            log_z -= float(logsumexp(msg_vf[f_idx][slot] + msg_fv[f_idx][slot]))

    diagnostics: tuple[str, ...] = ()
    if not converged:
        diagnostics = (
            f"component {component.id}: belief propagation hit max_iters="
            f"{config.bp_max_iters} without converging",
        )
        logger.warning("%s", diagnostics[0])
    return InferenceResult(marginals, log_z, METHOD_BP, converged, iterations, diagnostics)


# ---------------------------------------------------------------------------
# Dispatch.


def infer(
    component: FactorComponent,
    evidence: Evidence | None = None,
    config: InferenceConfig | None = None,
) -> InferenceResult:
    """Marginals for one component under optional evidence clamps.

    Components within the enumeration budget are solved exactly; larger
    two-sided one-to-one components take the exact column sweep; everything
    else runs loopy belief propagation (best-effort marginals with
    converged=False when the message passing does not settle).
    """
    config = config or InferenceConfig()
    clamps = _component_evidence(component, evidence)
    n = len(component.variables)
    if not config.force_bp:
        if n <= min(config.exact_max_vars, HARD_ENUM_CAP):
            return _exact_enumeration(component, clamps)
        if config.structured_exact:
            layout = _two_sided_layout(component)
            if layout is not None and _structured_budget_ok(layout):
                return _structured_exact(component, clamps)
    return _loopy_bp(component, clamps, config)


def infer_all(
    components: Sequence[FactorComponent],
    evidence: Evidence | None = None,
    config: InferenceConfig | None = None,
) -> AggregateResult:
    """Run every component independently and merge the results."""
    config = config or InferenceConfig()
    mapping: dict[str, str] = {}
    for comp in components:
        for var in comp.variables:
            mapping[var] = comp.id
    if evidence:
        unknown = [var for var in evidence if var not in mapping]
        if unknown:
            raise ValueError(f"evidence on unknown variables: {unknown}")
    marginals: dict[str, float] = {}
    results: dict[str, InferenceResult] = {}
    diagnostics: list[str] = []
    log_z = 0.0
    for comp in components:
        result = infer(comp, evidence, config)
        results[comp.id] = result
        marginals.update(result.marginals)
        log_z += result.log_partition
        diagnostics.extend(result.diagnostics)
    return AggregateResult(marginals, log_z, results, mapping, tuple(diagnostics))


# ---------------------------------------------------------------------------
# Posterior edges.


@dataclass(frozen=True)
class ScoredEdge:
    id: str
    source: str
    target: str
    interaction: str
    confidence: float | None
    method: str
    converged: bool
    group_id: str

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "source": self.source,
            "target": self.target,
            "interaction": self.interaction,
            "confidence": self.confidence,
            "method": self.method,
            "converged": self.converged,
            "group_id": self.group_id,
        }


def update_confidences(
    groups: Sequence[EdgeGroup], aggregate: AggregateResult
) -> list[ScoredEdge]:
    """Attach final confidences to every candidate edge.

    Factor-planned edges take their inferred activation marginal; plan-less
    edges keep the proposal's semantic confidence. A factor-planned edge
    without a marginal indicates a graph/inference mismatch and raises.
    """
    scored: list[ScoredEdge] = []
    for group in groups:
        for edge in group.edges:
            if group.plan is FactorPlan.NONE:
                scored.append(
                    ScoredEdge(
                        id=edge.id,
                        source=edge.source,
                        target=edge.target,
                        interaction=edge.interaction,
                        confidence=edge.semantic_confidence,
                        method=METHOD_SEMANTIC,
                        converged=True,
                        group_id=group.id,
                    )
                )
                continue
            if edge.id not in aggregate.marginals:
                raise RuntimeError(f"no marginal for factor-planned edge {edge.id}")
            comp_result = aggregate.results[aggregate.component_of[edge.id]]
            scored.append(
                ScoredEdge(
                    id=edge.id,
                    source=edge.source,
                    target=edge.target,
                    interaction=edge.interaction,
                    confidence=aggregate.marginals[edge.id],
                    method=comp_result.method,
                    converged=comp_result.converged,
                    group_id=group.id,
                )
            )
    return scored


def threshold_edges(edges: Sequence[ScoredEdge], tau: float = DEFAULT_TAU) -> list[ScoredEdge]:
    """Edges whose confidence reaches tau (inclusive)."""
    return [e for e in edges if e.confidence is not None and e.confidence >= tau]


def binary_entropy(p: float) -> float:
    """Entropy of a Bernoulli in nats; 0 at the deterministic ends."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log(p) - (1.0 - p) * math.log(1.0 - p)
