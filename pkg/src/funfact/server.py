"""HTTP API for inspecting graphs and conditioning on verified edges.

Each session owns one scene with its candidate edge groups and factor
components. Posting evidence clamps a single edge variable and
recomputes marginals for the component containing it; every other
component's stored result is left untouched. Sessions live in memory,
optionally snapshotted as JSON for restarts.
"""

from __future__ import annotations

import json
import logging
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .inference import (
    AggregateResult,
    InferenceConfig,
    InferenceResult,
    binary_entropy,
    infer,
    update_confidences,
)
from .factorgraph import build_graph
from .proposals import (
    FactorPlan,
    FunctionalProposal,
    ProposalError,
    build_all_groups,
    proposals_from_dict,
    proposals_to_dict,
)
from .scene import SceneFormatError, SceneGraph, SceneValidationError
from .synth import SynthError

logger = logging.getLogger(__name__)


class SessionBody(BaseModel):
    scene: dict
    proposals: dict


class EvidenceBody(BaseModel):
    edge: str
    observed: bool


class Session:
    """One scene's graph, per-component inference results, and clamps."""

    def __init__(
        self,
        sid: str,
        scene: SceneGraph,
        proposals: list[FunctionalProposal],
        config: InferenceConfig,
        evidence: dict[str, bool] | None = None,
    ):
        self.id = sid
        self.scene = scene
        self.proposals = proposals
        self.config = config
        self.lock = threading.Lock()
        self.groups, self.warnings = build_all_groups(scene, proposals)
        self.components = build_graph(self.groups, base=config.b)
        self.component_by_id = {c.id: c for c in self.components}
        self.component_of: dict[str, str] = {}
        for comp in self.components:
            for var in comp.variables:
                self.component_of[var] = comp.id
        self.edge_plan: dict[str, FactorPlan] = {}
        for group in self.groups:
            for edge in group.edges:
                self.edge_plan[edge.id] = group.plan
        self.evidence: dict[str, bool] = dict(evidence or {})
        self.results: dict[str, InferenceResult] = {
            comp.id: infer(comp, self.evidence, config) for comp in self.components
        }

    def aggregate(self) -> AggregateResult:
        marginals: dict[str, float] = {}
        diagnostics: list[str] = []
        log_z = 0.0
        for comp in self.components:
            result = self.results[comp.id]
            marginals.update(result.marginals)
            log_z += result.log_partition
            diagnostics.extend(result.diagnostics)
        return AggregateResult(
            marginals, log_z, dict(self.results), dict(self.component_of), tuple(diagnostics)
        )

    def recompute(self, comp_id: str) -> None:
        comp = self.component_by_id[comp_id]
        self.results[comp_id] = infer(comp, self.evidence, self.config)

    def edge_rows(self) -> list[dict]:
        rows = []
        aggregate = self.aggregate()
        for edge in update_confidences(self.groups, aggregate):
            row = edge.to_dict()
            row["component"] = self.component_of.get(edge.id)
            row["evidence"] = self.evidence.get(edge.id)
            row["entropy"] = (
                None if edge.confidence is None else binary_entropy(edge.confidence)
            )
            rows.append(row)
        return rows

    def graph_payload(self) -> dict:
        aggregate = self.aggregate()
        return {
            "id": self.id,
            "nodes": [node.to_dict() for node in self.scene],
            "edges": self.edge_rows(),
            "components": [
                {"id": comp.id, "edges": list(comp.variables)} for comp in self.components
            ],
            "log_partition": aggregate.log_partition,
            "warnings": list(self.warnings),
        }

    def component_payload(self, comp_id: str) -> dict:
        aggregate = self.aggregate()
        rows = [row for row in self.edge_rows() if row["component"] == comp_id]
        return {
            "component": comp_id,
            "edges": rows,
            "log_partition": aggregate.log_partition,
        }


class SessionStore:
    """Thread-safe registry with optional JSON snapshots for restarts."""

    def __init__(self, state_dir: str | None, config: InferenceConfig):
        self.config = config
        self.state_dir = Path(state_dir) if state_dir else None
        self.sessions: dict[str, Session] = {}
        self.lock = threading.Lock()
        if self.state_dir is not None:
            self.state_dir.mkdir(parents=True, exist_ok=True)
            self._restore()

    def _restore(self) -> None:
        for path in sorted(self.state_dir.glob("*.json")):
            try:
                data = json.loads(path.read_text(encoding="utf-8"))
                session = Session(
                    sid=path.stem,
                    scene=SceneGraph.from_dict(data["scene"]),
                    proposals=proposals_from_dict(data["proposals"]),
                    config=self.config,
                    evidence={str(k): bool(v) for k, v in data.get("evidence", {}).items()},
                )
            except (OSError, ValueError, KeyError) as exc:
                logger.warning("skipping unreadable snapshot %s: %s", path, exc)
                continue
            self.sessions[session.id] = session

    def snapshot(self, session: Session) -> None:
        if self.state_dir is None:
            return
        doc = {
            "scene": session.scene.to_dict(),
            "proposals": proposals_to_dict(session.proposals),
            "evidence": session.evidence,
        }
        path = self.state_dir / f"{session.id}.json"
        path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")

    def create(self, scene: SceneGraph, proposals: list[FunctionalProposal]) -> Session:
        session = Session(uuid.uuid4().hex[:12], scene, proposals, self.config)
        with self.lock:
            self.sessions[session.id] = session
        self.snapshot(session)
        return session

    def get(self, sid: str) -> Session:
        with self.lock:
            session = self.sessions.get(sid)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {sid!r}")
        return session

    def __len__(self) -> int:
        with self.lock:
            return len(self.sessions)


def _repo_ui_dir() -> Path:
    return Path(__file__).resolve().parents[2] / "frontend" / "dist"


def create_app(
    state_dir: str | None = None,
    config: InferenceConfig | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Build the API application; static UI assets mount when present."""
    config = config or InferenceConfig()
    store = SessionStore(state_dir, config)
    app = FastAPI(title="funfact", version="1")

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "sessions": len(store)}

    @app.post("/v1/sessions", status_code=201)
    def create_session(body: SessionBody) -> dict:
        try:
            scene = SceneGraph.from_dict(body.scene)
            proposals = proposals_from_dict(body.proposals)
        except (SceneFormatError, SceneValidationError, ProposalError, SynthError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        session = store.create(scene, proposals)
        return {"id": session.id}

    @app.get("/v1/sessions/{sid}/graph")
    def get_graph(sid: str) -> dict:
        session = store.get(sid)
        with session.lock:
            return session.graph_payload()

    def _checked_edge(session: Session, edge_id: str) -> str:
        if edge_id not in session.edge_plan:
            raise HTTPException(status_code=404, detail=f"unknown edge {edge_id!r}")
        if session.edge_plan[edge_id] is FactorPlan.NONE:
            raise HTTPException(
                status_code=422,
                detail=f"edge {edge_id!r} keeps its semantic confidence and cannot be clamped",
            )
        return session.component_of[edge_id]

    @app.post("/v1/sessions/{sid}/evidence")
    def post_evidence(sid: str, body: EvidenceBody) -> dict:
        session = store.get(sid)
        with session.lock:
            comp_id = _checked_edge(session, body.edge)
            current = session.evidence.get(body.edge)
            if current is not None and current != body.observed:
                raise HTTPException(
                    status_code=409,
                    detail=f"edge {body.edge!r} already clamped to {current}",
                )
            if current is None:
                session.evidence[body.edge] = body.observed
                session.recompute(comp_id)
                store.snapshot(session)
            return session.component_payload(comp_id)

    @app.delete("/v1/sessions/{sid}/evidence/{edge_id}")
    def delete_evidence(sid: str, edge_id: str) -> dict:
        session = store.get(sid)
        with session.lock:
            comp_id = _checked_edge(session, edge_id)
            if edge_id in session.evidence:
                del session.evidence[edge_id]
                session.recompute(comp_id)
                store.snapshot(session)
            return session.component_payload(comp_id)

    @app.get("/v1/sessions/{sid}/suggest")
    def suggest(sid: str) -> dict:
        session = store.get(sid)
        with session.lock:
            rows = [
                row
                for row in session.edge_rows()
                if row["evidence"] is None
                and session.edge_plan[row["id"]] is not FactorPlan.NONE
            ]
        rows.sort(key=lambda r: (-r["entropy"], r["id"]))
        return {
            "suggestions": [
                {"edge": r["id"], "confidence": r["confidence"], "entropy": r["entropy"]}
                for r in rows
            ]
        }

    ui_path = Path(ui_dir) if ui_dir is not None else _repo_ui_dir()
    if ui_path.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_path, html=True), name="ui")
    return app
