"""Command-line entry points for the full pipeline.

Subcommands cover inference over a scene and its proposals, synthetic
scene generation, rule annotation, metric evaluation, detection fusion,
and the HTTP service. Every subcommand writes JSON to --out or stdout.

Exit codes: 0 success, 1 invalid input data, 2 file I/O failure,
64 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .evaluation import (
    DEFAULT_ECE_BINS,
    DEFAULT_K_NODE,
    DEFAULT_K_REL,
    AMBIGUOUS_CLASSES,
    EvalError,
    MatchMode,
    ambiguous_subset_ece,
    calibration_samples,
    ece,
    triplet_eval,
    write_bins_csv,
)
from .factorgraph import DEFAULT_CARDINALITY_BASE, build_graph
from .fusion import instances_to_scene, load_detections, merge_stream
from .inference import (
    DEFAULT_TAU,
    InferenceConfig,
    ScoredEdge,
    infer_all,
    update_confidences,
)
from .proposals import build_all_groups, load_proposals, proposals_to_dict
from .scene import SceneGraph, load_scene
from .synth import (
    GenConfig,
    annotate,
    generate_detail,
    load_ground_truth,
    manual_pairs_from_dict,
    manual_pairs_to_dict,
    rules_from_dict,
    rules_to_dict,
)

USAGE_EXIT = 64


class _Parser(argparse.ArgumentParser):
    # Unknown flags and malformed invocations exit 64 instead of 2.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="funfact", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_infer = sub.add_parser("infer", help="score candidate functional edges")
    p_infer.add_argument("scene", help="scene graph JSON")
    p_infer.add_argument("proposals", help="functional proposal JSON")
    p_infer.add_argument("--b", type=float, default=DEFAULT_CARDINALITY_BASE,
                         help="cardinality penalty base in (0, 1)")
    p_infer.add_argument("--tau", type=float, default=DEFAULT_TAU,
                         help="confidence threshold marking kept edges")
    p_infer.add_argument("--exact-max-vars", type=int, default=16,
                         help="largest component solved by enumeration")
    p_infer.add_argument("--out", help="output path (default stdout)")

    p_gen = sub.add_parser("generate", help="build a synthetic scene with ground truth")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--room", default="kitchen",
                       choices=["kitchen", "livingroom", "bedroom", "bathroom"])
    p_gen.add_argument("--out-dir", help="write scene/gt/proposals/rules/pairs files here")

    p_ann = sub.add_parser("annotate", help="derive ground truth from rules")
    p_ann.add_argument("scene", help="scene graph JSON")
    p_ann.add_argument("rules", help="annotation rule JSON")
    p_ann.add_argument("--manual", help="manual pair JSON for Manual rules")
    p_ann.add_argument("--out", help="output path (default stdout)")

    p_eval = sub.add_parser("eval", help="score predictions against ground truth")
    p_eval.add_argument("gt", help="ground truth JSON")
    p_eval.add_argument("pred", help="prediction JSON (infer output)")
    p_eval.add_argument("--k-node", type=int, default=DEFAULT_K_NODE)
    p_eval.add_argument("--k-rel", type=int, default=DEFAULT_K_REL)
    p_eval.add_argument("--bins", type=int, default=DEFAULT_ECE_BINS)
    p_eval.add_argument("--exclusive", action="store_true",
                        help="consume each predicted node after its first match")
    p_eval.add_argument("--ambiguous-classes", default=",".join(AMBIGUOUS_CLASSES),
                        help="comma-separated label substrings")
    p_eval.add_argument("--bins-csv", help="write reliability-diagram bins as CSV")
    p_eval.add_argument("--out", help="output path (default stdout)")

    p_fuse = sub.add_parser("fuse", help="fuse a detection stream into a scene graph")
    p_fuse.add_argument("detections", help="detection stream JSON")
    p_fuse.add_argument("--out", help="output path (default stdout)")

    p_serve = sub.add_parser("serve", help="run the HTTP API")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8321)
    p_serve.add_argument("--state-dir", help="snapshot sessions as JSON under this directory")
    return parser


def _emit(data: dict, out: str | None) -> None:
    text = json.dumps(data, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_infer(args) -> int:
    scene = load_scene(args.scene)
    proposals = load_proposals(args.proposals)
    groups, warnings = build_all_groups(scene, proposals)
    graph = build_graph(groups, base=args.b)
    config = InferenceConfig(exact_max_vars=args.exact_max_vars, b=args.b)
    aggregate = infer_all(graph, None, config)
    scored = update_confidences(groups, aggregate)
    edges = []
    for edge in scored:
        entry = edge.to_dict()
        entry["kept"] = edge.confidence is not None and edge.confidence >= args.tau
        edges.append(entry)
    _emit(
        {
            "nodes": [node.to_dict() for node in scene],
            "edges": edges,
            "log_partition": aggregate.log_partition,
            "tau": args.tau,
            "warnings": list(warnings),
        },
        args.out,
    )
    return 0


def _cmd_generate(args) -> int:
    detail = generate_detail(GenConfig(seed=args.seed, room_type=args.room))
    scene_doc = detail.scene.to_dict()
    gt_doc = detail.gt.to_dict()
    proposals_doc = proposals_to_dict(detail.proposals)
    rules_doc = rules_to_dict(detail.rules)
    pairs_doc = manual_pairs_to_dict(detail.manual_pairs)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, doc in (
            ("scene.json", scene_doc),
            ("ground_truth.json", gt_doc),
            ("proposals.json", proposals_doc),
            ("rules.json", rules_doc),
            ("manual_pairs.json", pairs_doc),
        ):
            (out / name).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        return 0
    _emit(
        {
            "scene": scene_doc,
            "ground_truth": gt_doc,
            "proposals": proposals_doc,
            "rules": rules_doc,
            "manual_pairs": pairs_doc,
        },
        None,
    )
    return 0


def _cmd_annotate(args) -> int:
    scene = load_scene(args.scene)
    with open(args.rules, encoding="utf-8") as fh:
        rules = rules_from_dict(json.load(fh))
    pairs = []
    if args.manual:
        with open(args.manual, encoding="utf-8") as fh:
            pairs = manual_pairs_from_dict(json.load(fh))
    gt = annotate(scene, rules, pairs)
    _emit(gt.to_dict(), args.out)
    return 0


def _load_predictions(path: str) -> tuple[SceneGraph, list[ScoredEdge]]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "nodes" not in data or "edges" not in data:
        raise EvalError("prediction file needs 'nodes' and 'edges'")
    scene = SceneGraph.from_dict({"nodes": data["nodes"]})
    edges = []
    for entry in data["edges"]:
        edges.append(
            ScoredEdge(
                id=str(entry["id"]),
                source=str(entry["source"]),
                target=str(entry["target"]),
                interaction=str(entry.get("interaction", "")),
                confidence=None if entry.get("confidence") is None else float(entry["confidence"]),
                method=str(entry.get("method", "")),
                converged=bool(entry.get("converged", True)),
                group_id=str(entry.get("group_id", "")),
            )
        )
    return scene, edges


def _cmd_eval(args) -> int:
    gt = load_ground_truth(args.gt)
    pred_scene, pred_edges = _load_predictions(args.pred)
    mode = MatchMode.EXCLUSIVE if args.exclusive else MatchMode.NON_EXCLUSIVE
    report = triplet_eval(
        gt, pred_scene, pred_edges, k_node=args.k_node, k_rel=args.k_rel, mode=mode
    )
    samples = calibration_samples(
        gt, pred_scene, pred_edges, k_node=args.k_node, k_rel=args.k_rel, mode=mode
    )
    classes = [c for c in args.ambiguous_classes.split(",") if c]
    calibration = ece(samples, args.bins) if samples else None
    ambiguous = None
    if samples:
        try:
            ambiguous = ambiguous_subset_ece(samples, classes, args.bins)
        except EvalError:
            ambiguous = None
    if args.bins_csv and calibration is not None:
        write_bins_csv(calibration, args.bins_csv)
    _emit(
        {
            "triplets": report.to_dict(),
            "calibration": calibration.to_dict() if calibration else None,
            "ambiguous_calibration": ambiguous.to_dict() if ambiguous else None,
        },
        args.out,
    )
    return 0


def _cmd_fuse(args) -> int:
    frames = load_detections(args.detections)
    scene = instances_to_scene(merge_stream(frames))
    _emit(scene.to_dict(), args.out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    port = int(os.environ.get("FUNFACT_PORT", args.port))
    app = create_app(state_dir=args.state_dir)
    uvicorn.run(app, host=args.host, port=port)
    return 0


_COMMANDS = {
    "infer": _cmd_infer,
    "generate": _cmd_generate,
    "annotate": _cmd_annotate,
    "eval": _cmd_eval,
    "fuse": _cmd_fuse,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except OSError as exc:
        print(f"funfact: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        # Covers scene/proposal/rule/eval validation errors.
        print(f"funfact: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
