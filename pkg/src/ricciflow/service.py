"""Session gateway: create simulations, step them, inject input, stream rows.

Each session owns one SimulationDriver behind a lock (one writer at a time);
telemetry is append-only and identical to what the scripted front end would
produce for the same call sequence. Mutating endpoints accept a client
request token and replay the stored response on retries.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
import time
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import PlainTextResponse, StreamingResponse
from pydantic import BaseModel, Field

from .errors import ValidationFailure
from .flow import TELEMETRY_COLUMNS, ControlConfig, SimulationDriver
from .graph import WeightedGraph, generate_scale_free
from .schedule import InputEvent, realize_event

SNAPSHOT_KAPPA_EDGE_LIMIT = 2000
_STREAM_POLL_S = 0.05


class CreateSessionRequest(BaseModel):
    n: int | None = None
    m: int = 2
    seed: int = 0
    edges: list | None = None
    beta_sq: float = 2.0
    dt: float = 0.05
    normalization: str = "global"
    sign_convention: str = "proof"
    curvature_refresh_every: int = 1


class StepRequest(BaseModel):
    count: int = Field(default=1, ge=0)
    request_token: str | None = None


class InjectRequest(BaseModel):
    p: float
    targets: list | None = None
    top_k: int | None = None
    request_token: str | None = None


@dataclass
class Session:
    id: str
    driver: SimulationDriver
    lock: threading.Lock = field(default_factory=threading.Lock)
    status: str = "paused"
    token_cache: dict[str, dict] = field(default_factory=dict)
    action_log: list[dict] = field(default_factory=list)


def _row_json(row) -> dict:
    return {col: val for col, val in zip(TELEMETRY_COLUMNS, row.as_values())}


def _snapshot(session: Session) -> dict:
    driver = session.driver
    g = driver.state.graph
    ids = g.nodes
    last = driver.telemetry.rows[-1]
    snap: dict = {
        "session_id": session.id,
        "status": session.status,
        "n_nodes": g.n_nodes,
        "n_edges": g.n_edges,
        "nodes": [{"id": ids[i], "degree": int(g.topology.degrees[i])} for i in range(g.n_nodes)],
    }
    include_kappa = g.n_edges <= SNAPSHOT_KAPPA_EDGE_LIMIT
    edges = []
    for k, (u, v) in enumerate(g.edges):
        entry = {"u": ids[u], "v": ids[v], "w": float(g.weights[k])}
        if include_kappa:
            entry["kappa"] = float(driver.field.edge_values[k])
        edges.append(entry)
    snap["edges"] = edges
    snap.update(_row_json(last))
    return snap


def create_app(console_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="ricciflow gateway", version="0.1.0")
    sessions: dict[str, Session] = {}

    if console_dir is None and os.path.isfile(os.path.join("frontend", "index.html")):
        console_dir = "frontend"
    if console_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/console", StaticFiles(directory=console_dir, html=True), name="console")

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id}")
        return session

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest):
        try:
            cfg = ControlConfig(
                beta_sq=req.beta_sq,
                dt=req.dt,
                normalization=req.normalization,
                sign_convention=req.sign_convention,
                curvature_refresh_every=req.curvature_refresh_every,
            )
            if (req.n is None) == (req.edges is None):
                raise ValidationFailure("provide either generator parameter n or an edge list")
            if req.edges is not None:
                g = WeightedGraph.from_edges([tuple(e) for e in req.edges])
            else:
                g = generate_scale_free(req.n, req.m, req.seed)
            driver = SimulationDriver(g, cfg)
        except ValidationFailure as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        session = Session(id=secrets.token_urlsafe(16), driver=driver)
        sessions[session.id] = session
        return {"session_id": session.id, "snapshot": _snapshot(session)}

    @app.get("/sessions/{session_id}/snapshot")
    def snapshot(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return _snapshot(session)

    @app.post("/sessions/{session_id}/step")
    def step(session_id: str, req: StepRequest):
        session = get_session(session_id)
        with session.lock:
            if session.status == "finished":
                raise HTTPException(status_code=400, detail="session is finished")
            if req.request_token and req.request_token in session.token_cache:
                return session.token_cache[req.request_token]
            before = len(session.driver.telemetry.rows)
            session.status = "running"
            try:
                session.driver.step(req.count)
            finally:
                session.status = "paused"
            session.action_log.append(
                {"action": "step", "count": req.count, "iteration": session.driver.iteration}
            )
            response = {
                "snapshot": _snapshot(session),
                "rows": [_row_json(r) for r in session.driver.telemetry.rows[before:]],
            }
            if req.request_token:
                session.token_cache[req.request_token] = response
            return response

    @app.post("/sessions/{session_id}/inject")
    def inject(session_id: str, req: InjectRequest):
        session = get_session(session_id)
        with session.lock:
            if session.status == "finished":
                raise HTTPException(status_code=400, detail="session is finished")
            if req.request_token and req.request_token in session.token_cache:
                return session.token_cache[req.request_token]
            driver = session.driver
            try:
                event = InputEvent(
                    iteration=driver.iteration,
                    magnitude=req.p,
                    targets=tuple(req.targets) if req.targets is not None else None,
                    top_k=req.top_k,
                )
                edge_ids, marker = realize_event(event, driver.state.graph)
            except ValidationFailure as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None
            driver.apply_input(edge_ids, req.p, marker)
            lam = driver.state.lam
            entry: dict = {"action": "inject", "iteration": driver.iteration, "p": req.p}
            if req.targets is not None:
                entry["targets"] = list(req.targets)
            else:
                entry["top_k"] = req.top_k
            session.action_log.append(entry)
            response = {
                "ok": True,
                "iteration": driver.iteration,
                "marker": marker,
                "lambda_summary": {
                    "edges_touched": int(len(edge_ids)),
                    "nonzero": int((lam != 0.0).sum()),
                    "min": float(lam.min()),
                    "max": float(lam.max()),
                },
            }
            if req.request_token:
                session.token_cache[req.request_token] = response
            return response

    @app.get("/sessions/{session_id}/stream")
    def stream(session_id: str, request: Request, since: int | None = None, follow: bool = True):
        session = get_session(session_id)
        last_event_id = request.headers.get("last-event-id")
        if since is None and last_event_id is not None:
            try:
                since = int(last_event_id)
            except ValueError:
                since = None
        if since is None:
            since = session.driver.telemetry.rows[-1].iteration

        def feed():
            # Row index equals iteration: the feed is resumable by sequence.
            cursor = since
            while True:
                rows = session.driver.telemetry.rows
                upper = len(rows)
                for idx in range(cursor + 1, upper):
                    row = rows[idx]
                    yield f"id: {row.iteration}\ndata: {json.dumps(_row_json(row))}\n\n"
                cursor = max(cursor, upper - 1)
                if not follow or session.status == "finished":
                    break
                time.sleep(_STREAM_POLL_S)

        return StreamingResponse(feed(), media_type="text/event-stream")

    @app.get("/sessions/{session_id}/telemetry.csv")
    def telemetry_csv(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return PlainTextResponse(
                session.driver.telemetry.to_csv_text(), media_type="text/csv"
            )

    @app.get("/sessions/{session_id}/actions")
    def actions(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return {"session_id": session.id, "actions": list(session.action_log)}

    @app.delete("/sessions/{session_id}")
    def finish(session_id: str):
        session = get_session(session_id)
        with session.lock:
            session.status = "finished"
        return {"session_id": session.id, "status": "finished"}

    return app
