"""Evaluation protocol: node matching, triplet metrics, and calibration.

Node matching pairs each ground-truth node with the first predicted box
it overlaps, then gates on label similarity. Triplet metrics report
precision, recall, and the node-association and edge-prediction
decompositions. Calibration bins predicted confidences into equal-width
bins and reports the expected calibration error, optionally restricted
to an ambiguous label subset.
"""

from __future__ import annotations

import csv
import re
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Protocol

from .scene import SceneGraph, iou3
from .synth import GroundTruthGraph

DEFAULT_K_NODE = 3
DEFAULT_K_REL = 3
DEFAULT_TAU = 0.5
DEFAULT_ECE_BINS = 4
AMBIGUOUS_CLASSES = ("switch", "knob")
BASELINE_SKIP_CLASSES = ("outlet", "switch", "power", "remote")


class EvalError(ValueError):
    """Invalid evaluation input."""


class LabelSimilarity(Protocol):
    """Ranks candidate labels by similarity to a predicted label.

    Implementations must be deterministic and rank every candidate
    exactly once.
    """

    def __call__(self, predicted: str, candidates: Sequence[str]) -> list[str]: ...


def _normalize(label: str) -> str:
    return re.sub(r"\s+", " ", label.strip().lower())


def _tokens(label: str) -> frozenset[str]:
    return frozenset(re.findall(r"[a-z0-9]+", _normalize(label)))


class TokenOverlapSimilarity:
    """Exact normalized match first, then token Jaccard overlap.

    Candidates with zero overlap still receive ranks (after every
    positive-overlap candidate, alphabetically), so top-K membership
    stays well defined on small vocabularies.
    """

    def __call__(self, predicted: str, candidates: Sequence[str]) -> list[str]:
        pred_norm = _normalize(predicted)
        pred_tokens = _tokens(predicted)

        def score(candidate: str) -> tuple[int, float, str]:
            exact = 1 if _normalize(candidate) == pred_norm else 0
            cand_tokens = _tokens(candidate)
            union = pred_tokens | cand_tokens
            overlap = len(pred_tokens & cand_tokens) / len(union) if union else 0.0
            return (-exact, -overlap, candidate)

        return sorted(candidates, key=score)


DEFAULT_SIMILARITY = TokenOverlapSimilarity()


class MatchMode(Enum):
    EXCLUSIVE = "exclusive"
    NON_EXCLUSIVE = "non_exclusive"


class CandidatePolicy(Enum):
    """How the spatial candidate for a ground-truth node is chosen.

    FIRST takes the first predicted box in scan order with non-zero
    overlap. BEST_IOU takes the highest-overlap box instead; it is not
    part of the reference protocol and exists for sensitivity checks.
    """

    FIRST = "first"
    BEST_IOU = "best_iou"


@dataclass(frozen=True)
class MatchReport:
    matches: Mapping[str, str | None]
    mode: MatchMode
    k: int

    @property
    def matched_count(self) -> int:
        return sum(1 for v in self.matches.values() if v is not None)


def match_nodes(
    gt: SceneGraph,
    pred: SceneGraph,
    k: int = DEFAULT_K_NODE,
    sim: LabelSimilarity = DEFAULT_SIMILARITY,
    mode: MatchMode = MatchMode.NON_EXCLUSIVE,
    candidate_policy: CandidatePolicy = CandidatePolicy.FIRST,
) -> MatchReport:
    """Pair ground-truth nodes with predicted nodes.

    For each ground-truth node in graph order, the spatial candidate is
    the first predicted node (in prediction order) whose box overlaps
    it. The candidate counts as a match when the ground-truth label
    ranks in the top k most similar labels for the predicted label,
    over the ground-truth label vocabulary. A failed label test leaves
    the node unmatched; later predictions are not consulted. Exclusive
    mode removes matched predictions from subsequent scans.
    """
    if k < 1:
        raise EvalError(f"k must be at least 1, got {k}")
    vocab = sorted({node.label for node in gt})
    taken: set[str] = set()
    matches: dict[str, str | None] = {}
    for gt_node in gt:
        candidate = None
        best = 0.0
        for pred_node in pred:
            if mode is MatchMode.EXCLUSIVE and pred_node.id in taken:
                continue
            overlap = iou3(gt_node.box, pred_node.box)
            if overlap <= 0.0:
                continue
            if candidate_policy is CandidatePolicy.FIRST:
                candidate = pred_node
                break
            if overlap > best:
                candidate, best = pred_node, overlap
        matched = None
        if candidate is not None:
            ranked = sim(candidate.label, vocab)
            if gt_node.label in ranked[:k]:
                matched = candidate.id
                taken.add(candidate.id)
        matches[gt_node.id] = matched
    return MatchReport(matches=matches, mode=mode, k=k)


# ---------------------------------------------------------------------------
# Triplet metrics


class PredictedEdge(Protocol):
    source: str
    target: str
    interaction: str
    confidence: float | None


@dataclass(frozen=True)
class TripletReport:
    n_ma: int
    n_de: int
    n_gt: int
    precision: float
    recall: float
    f1: float
    node_assoc_recall: float
    edge_pred_recall: float
    overall_triplet_recall: float
    precision_degenerate: bool
    recall_degenerate: bool
    edge_pred_degenerate: bool

    def to_dict(self) -> dict:
        return {
            "n_ma": self.n_ma,
            "n_de": self.n_de,
            "n_gt": self.n_gt,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "node_assoc_recall": self.node_assoc_recall,
            "edge_pred_recall": self.edge_pred_recall,
            "overall_triplet_recall": self.overall_triplet_recall,
            "precision_degenerate": self.precision_degenerate,
            "recall_degenerate": self.recall_degenerate,
            "edge_pred_degenerate": self.edge_pred_degenerate,
        }


def _safe_ratio(num: int, den: int) -> tuple[float, bool]:
    # 0/0 reports 0 with a degenerate flag rather than NaN.
    if den == 0:
        return 0.0, True
    return num / den, False


def triplet_eval(
    gt: GroundTruthGraph,
    pred_scene: SceneGraph,
    pred_edges: Sequence[PredictedEdge],
    k_node: int = DEFAULT_K_NODE,
    k_rel: int = DEFAULT_K_REL,
    node_sim: LabelSimilarity = DEFAULT_SIMILARITY,
    rel_sim: LabelSimilarity = DEFAULT_SIMILARITY,
    tau: float = DEFAULT_TAU,
    mode: MatchMode = MatchMode.NON_EXCLUSIVE,
    candidate_policy: CandidatePolicy = CandidatePolicy.FIRST,
) -> TripletReport:
    """Score predicted functional triplets against ground truth.

    A ground-truth triplet counts as matched when some prediction at or
    above tau connects the matched subject node to the matched object
    node and the true relation ranks in the top k_rel similar relations
    for the predicted one. node_assoc_recall ignores the relation test;
    edge_pred_recall divides matches by predictions whose endpoints hit
    a ground-truth pair.
    """
    match = match_nodes(gt.scene, pred_scene, k_node, node_sim, mode, candidate_policy).matches
    rel_vocab = sorted({t.relation for t in gt.triplets})
    detected = [e for e in pred_edges if e.confidence is not None and e.confidence >= tau]
    n_de = len(detected)
    n_gt = len(gt.triplets)

    by_pair: dict[tuple[str, str], list[str]] = {}
    for edge in detected:
        by_pair.setdefault((edge.source, edge.target), []).append(edge.interaction)

    n_ma = 0
    n_pairs = 0
    gt_pairs: set[tuple[str, str]] = set()
    for trip in gt.triplets:
        ps, po = match[trip.subject], match[trip.object]
        if ps is None or po is None:
            continue
        gt_pairs.add((ps, po))
        interactions = by_pair.get((ps, po), ())
        if not interactions:
            continue
        n_pairs += 1
        if any(trip.relation in rel_sim(pr, rel_vocab)[:k_rel] for pr in interactions):
            n_ma += 1

    correct_pair_preds = sum(
        1 for edge in detected if (edge.source, edge.target) in gt_pairs
    )
    precision, p_degenerate = _safe_ratio(n_ma, n_de)
    recall, r_degenerate = _safe_ratio(n_ma, n_gt)
    node_assoc, _ = _safe_ratio(n_pairs, n_gt)
    edge_pred, e_degenerate = _safe_ratio(n_ma, correct_pair_preds)
    f1 = 0.0 if precision + recall == 0.0 else 2 * precision * recall / (precision + recall)
    return TripletReport(
        n_ma=n_ma,
        n_de=n_de,
        n_gt=n_gt,
        precision=precision,
        recall=recall,
        f1=f1,
        node_assoc_recall=node_assoc,
        edge_pred_recall=edge_pred,
        overall_triplet_recall=recall,
        precision_degenerate=p_degenerate,
        recall_degenerate=r_degenerate,
        edge_pred_degenerate=e_degenerate,
    )


# ---------------------------------------------------------------------------
# Calibration


@dataclass(frozen=True)
class CalibrationSample:
    confidence: float
    correct: bool
    subject_label: str = ""
    object_label: str = ""


@dataclass(frozen=True)
class BinStat:
    lo: float
    hi: float
    count: int
    accuracy: float
    mean_confidence: float


@dataclass(frozen=True)
class CalibrationReport:
    bins: tuple[BinStat, ...]
    ece: float
    n: int

    def to_dict(self) -> dict:
        return {
            "ece": self.ece,
            "n": self.n,
            "bins": [
                {
                    "lo": b.lo,
                    "hi": b.hi,
                    "count": b.count,
                    "accuracy": b.accuracy,
                    "mean_confidence": b.mean_confidence,
                }
                for b in self.bins
            ],
        }


def _as_sample(entry) -> CalibrationSample:
    if isinstance(entry, CalibrationSample):
        return entry
    confidence, correct = entry
    return CalibrationSample(confidence=float(confidence), correct=bool(correct))


def ece(samples: Sequence, bins: int = DEFAULT_ECE_BINS) -> CalibrationReport:
    """Expected calibration error over equal-width confidence bins.

    Each sample lands in bin floor(confidence * bins), so a boundary
    value belongs to the higher bin and 1.0 to the top bin. The error
    is the count-weighted mean absolute gap between each bin's accuracy
    and its average confidence.

    Raises EvalError on an empty sample list (the error is undefined).
    """
    parsed = [_as_sample(s) for s in samples]
    if not parsed:
        raise EvalError("cannot compute calibration error without samples")
    if bins < 1:
        raise EvalError(f"bins must be at least 1, got {bins}")
    for s in parsed:
        if not 0.0 <= s.confidence <= 1.0:
            raise EvalError(f"confidence {s.confidence} outside [0, 1]")
    grouped: list[list[CalibrationSample]] = [[] for _ in range(bins)]
    for s in parsed:
        grouped[min(int(s.confidence * bins), bins - 1)].append(s)
    stats = []
    total = len(parsed)
    error = 0.0
    for m, members in enumerate(grouped):
        count = len(members)
        acc = sum(1 for s in members if s.correct) / count if count else 0.0
        conf = sum(s.confidence for s in members) / count if count else 0.0
        error += (count / total) * abs(acc - conf)
        stats.append(BinStat(lo=m / bins, hi=(m + 1) / bins, count=count, accuracy=acc, mean_confidence=conf))
    return CalibrationReport(bins=tuple(stats), ece=error, n=total)


def ambiguous_subset_ece(
    samples: Sequence,
    classes: Sequence[str] = AMBIGUOUS_CLASSES,
    bins: int = DEFAULT_ECE_BINS,
) -> CalibrationReport:
    """Calibration error restricted to ambiguous label classes.

    Keeps samples whose subject or object label contains one of the
    class substrings (case-insensitive), then defers to ece. Raises
    EvalError when nothing survives the filter.
    """
    lowered = [c.lower() for c in classes]
    kept = [
        s
        for s in (_as_sample(e) for e in samples)
        if any(c in s.subject_label.lower() or c in s.object_label.lower() for c in lowered)
    ]
    if not kept:
        raise EvalError("no samples match the ambiguous class filter")
    return ece(kept, bins)


def calibration_samples(
    gt: GroundTruthGraph,
    pred_scene: SceneGraph,
    pred_edges: Sequence[PredictedEdge],
    k_node: int = DEFAULT_K_NODE,
    k_rel: int = DEFAULT_K_REL,
    node_sim: LabelSimilarity = DEFAULT_SIMILARITY,
    rel_sim: LabelSimilarity = DEFAULT_SIMILARITY,
    mode: MatchMode = MatchMode.NON_EXCLUSIVE,
) -> list[CalibrationSample]:
    """One calibration sample per scored prediction, no threshold.

    A prediction is correct when its endpoints coincide with a matched
    ground-truth pair and the true relation ranks in the predicted
    relation's top k_rel. Unmatched predictions count as incorrect.
    Labels come from the prediction's own endpoint nodes.
    """
    match = match_nodes(gt.scene, pred_scene, k_node, node_sim, mode).matches
    rel_vocab = sorted({t.relation for t in gt.triplets})
    truths: dict[tuple[str, str], list[str]] = {}
    for trip in gt.triplets:
        ps, po = match[trip.subject], match[trip.object]
        if ps is not None and po is not None:
            truths.setdefault((ps, po), []).append(trip.relation)
    samples = []
    for edge in pred_edges:
        if edge.confidence is None:
            continue
        relations = truths.get((edge.source, edge.target), ())
        ranked = rel_sim(edge.interaction, rel_vocab)[:k_rel] if relations else ()
        correct = any(rel in ranked for rel in relations)
        samples.append(
            CalibrationSample(
                confidence=edge.confidence,
                correct=correct,
                subject_label=pred_scene.node(edge.source).label,
                object_label=pred_scene.node(edge.target).label,
            )
        )
    return samples


def baseline_confidence_fill(
    pred_scene: SceneGraph,
    pred_edges: Sequence,
    default: float = 1.0,
    classes: Sequence[str] = BASELINE_SKIP_CLASSES,
) -> tuple[list, list[str]]:
    """Fill missing confidences for the constant-confidence baseline.

    Edges that already carry a confidence pass through unchanged. A
    missing confidence becomes `default` unless either endpoint label
    contains one of the class substrings; those stay missing and their
    edge ids are returned as flagged.
    """
    lowered = [c.lower() for c in classes]
    filled = []
    flagged = []
    for edge in pred_edges:
        if edge.confidence is not None:
            filled.append(edge)
            continue
        labels = (
            pred_scene.node(edge.source).label.lower(),
            pred_scene.node(edge.target).label.lower(),
        )
        if any(c in label for c in lowered for label in labels):
            flagged.append(edge.id)
            filled.append(edge)
        else:
            filled.append(replace(edge, confidence=default))
    return filled, flagged


def write_bins_csv(report: CalibrationReport, path: str | Path) -> None:
    """Reliability-diagram bins as CSV for external plotting."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lo", "hi", "count", "accuracy", "mean_confidence"])
        for b in report.bins:
            writer.writerow([b.lo, b.hi, b.count, b.accuracy, b.mean_confidence])
