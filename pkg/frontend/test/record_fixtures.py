"""Record real API responses as JSON fixtures for the client tests.

Drives the actual HTTP app in process: creates a kitchen session, reads
the graph and suggestions, clamps the top suggestion true, reads the
updated payloads, retracts the clamp, and reads again. A second session
on a living room captures a semantic (non-clampable) edge and its 422,
plus a 409 from a conflicting re-clamp. The script asserts the
retracted graph equals the baseline byte for byte before writing
anything, so the fixtures themselves encode the round-trip contract.

Run from the repository root:

    python3 frontend/test/record_fixtures.py
"""
from __future__ import annotations

import json
from pathlib import Path

from fastapi.testclient import TestClient

from funfact.server import create_app
from funfact.synth import GenConfig, generate_detail
from funfact.proposals import proposals_to_dict

OUT_DIR = Path(__file__).parent / "fixtures"


def canon(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True)


def write(name: str, payload: dict) -> None:
    path = OUT_DIR / name
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {path.name}")


def session_body(seed: int, room: str) -> dict:
    detail = generate_detail(GenConfig(seed=seed, room_type=room))
    return {
        "scene": detail.scene.to_dict(),
        "proposals": proposals_to_dict(list(detail.proposals)),
    }


def main() -> None:
    OUT_DIR.mkdir(exist_ok=True)
    client = TestClient(create_app(ui_dir="/nonexistent"))

    kitchen = session_body(seed=3, room="kitchen")
    sid = client.post("/v1/sessions", json=kitchen).json()["id"]

    graph_baseline = client.get(f"/v1/sessions/{sid}/graph").json()
    suggest_baseline = client.get(f"/v1/sessions/{sid}/suggest").json()
    assert suggest_baseline["suggestions"], "kitchen must yield suggestions"
    target = suggest_baseline["suggestions"][0]["edge"]

    clamp = client.post(f"/v1/sessions/{sid}/evidence", json={"edge": target, "observed": True})
    assert clamp.status_code == 200
    graph_clamped = client.get(f"/v1/sessions/{sid}/graph").json()
    suggest_clamped = client.get(f"/v1/sessions/{sid}/suggest").json()
    assert target not in [s["edge"] for s in suggest_clamped["suggestions"]]

    conflict = client.post(f"/v1/sessions/{sid}/evidence", json={"edge": target, "observed": False})
    assert conflict.status_code == 409

    retract = client.delete(f"/v1/sessions/{sid}/evidence/{target}")
    assert retract.status_code == 200
    graph_retracted = client.get(f"/v1/sessions/{sid}/graph").json()
    suggest_retracted = client.get(f"/v1/sessions/{sid}/suggest").json()

    # The server must restore the exact pre-clamp state; the client
    # round-trip test replays these fixtures against its own snapshot.
    assert canon(graph_retracted) == canon(graph_baseline)
    assert canon(suggest_retracted) == canon(suggest_baseline)

    # Second pass on a cardinality-coupled edge: verifying it true must
    # visibly suppress every rival sharing one of its endpoints.
    biggest = max(graph_baseline["components"], key=lambda c: len(c["edges"]))
    grid_edge = sorted(biggest["edges"])[0]
    rows = {r["id"]: r for r in graph_baseline["edges"]}
    clamp_grid = client.post(
        f"/v1/sessions/{sid}/evidence", json={"edge": grid_edge, "observed": True}
    )
    assert clamp_grid.status_code == 200
    graph_clamped_grid = client.get(f"/v1/sessions/{sid}/graph").json()
    suggest_clamped_grid = client.get(f"/v1/sessions/{sid}/suggest").json()
    clamped_rows = {r["id"]: r for r in graph_clamped_grid["edges"]}
    rivals = [
        rid
        for rid, row in rows.items()
        if rid != grid_edge
        and (row["source"] == rows[grid_edge]["source"] or row["target"] == rows[grid_edge]["target"])
    ]
    assert rivals, "grid edge must have endpoint-sharing rivals"
    for rid in rivals:
        assert clamped_rows[rid]["confidence"] < rows[rid]["confidence"]
    retract_grid = client.delete(f"/v1/sessions/{sid}/evidence/{grid_edge}")
    assert retract_grid.status_code == 200
    graph_after_grid = client.get(f"/v1/sessions/{sid}/graph").json()
    assert canon(graph_after_grid) == canon(graph_baseline)

    livingroom = session_body(seed=4, room="livingroom")
    sid2 = client.post("/v1/sessions", json=livingroom).json()["id"]
    graph_semantic = client.get(f"/v1/sessions/{sid2}/graph").json()
    semantic_rows = [r for r in graph_semantic["edges"] if r["component"] is None]
    assert semantic_rows, "living room must carry a semantic edge"
    rejected = client.post(
        f"/v1/sessions/{sid2}/evidence",
        json={"edge": semantic_rows[0]["id"], "observed": True},
    )
    assert rejected.status_code == 422

    write("session_create.json", {"request": kitchen, "response": {"id": sid}})
    write("graph_baseline.json", graph_baseline)
    write("suggest_baseline.json", suggest_baseline)
    write("evidence_clamp.json", {"edge": target, "observed": True, "response": clamp.json()})
    write("graph_clamped.json", graph_clamped)
    write("suggest_clamped.json", suggest_clamped)
    write("error_conflict.json", {"status": conflict.status_code, "body": conflict.json()})
    write("graph_retracted.json", graph_retracted)
    write("suggest_retracted.json", suggest_retracted)
    write(
        "evidence_clamp_grid.json",
        {"edge": grid_edge, "observed": True, "response": clamp_grid.json()},
    )
    write("graph_clamped_grid.json", graph_clamped_grid)
    write("suggest_clamped_grid.json", suggest_clamped_grid)
    write("graph_semantic.json", graph_semantic)
    write("error_semantic.json", {"status": rejected.status_code, "body": rejected.json()})


if __name__ == "__main__":
    main()
