"""HTTP front end over the knowledge base and the scenario runner.

Stateless endpoints take scenario text in the request. Sessions keep a loaded
knowledge base in memory so several clients can share one, and expose the
named knowledge-base services one route each.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

from fastapi import FastAPI, HTTPException

from .. import ops
from ..events import Diagnostic
from ..kb import KnowledgeBase, ServiceError
from ..mapek import Engine
from ..model.counting import count_elements
from ..model.scenario import ScenarioError, load_scenario
from ..sim import ProcessTable
from . import schemas as m

log = logging.getLogger(__name__)


@dataclass
class Session:
    kb: KnowledgeBase
    engine: Engine


def create_app() -> FastAPI:
    app = FastAPI(title="taca", version="0.1.0")
    sessions: dict[str, Session] = {}
    ids = itertools.count(1)

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok"}

    @app.get("/scenarios", response_model=list[str])
    def scenarios() -> list[str]:
        return ops.bundled_scenarios()

    @app.get("/scenarios/{name}", response_model=m.ScenarioBody)
    def scenario(name: str) -> m.ScenarioBody:
        if name not in ops.bundled_scenarios():
            raise HTTPException(404, f"no bundled scenario {name!r}")
        return m.ScenarioBody(scenario=ops.bundled_text(name))

    @app.post("/validate", response_model=m.ValidateResponse)
    def validate(body: m.ScenarioBody) -> m.ValidateResponse:
        rep = ops.validate_text(body.scenario)
        counts = m.Counts(**rep.counts._asdict()) if rep.counts else None
        return m.ValidateResponse(valid=rep.valid, counts=counts, error=rep.error, line=rep.line, column=rep.column)

    @app.post("/run", response_model=m.RunResponse)
    def run(body: m.RunRequest) -> m.RunResponse:
        out = ops.run_text(body.scenario, body.max_ticks, body.seed)
        return m.RunResponse(
            exit_code=out.exit_code, result=out.result, metrics=out.metrics_text, trace=out.trace_text, error=out.error
        )

    @app.post("/query", response_model=m.QueryResponse)
    def query(body: m.QueryRequest) -> m.QueryResponse:
        try:
            items = ops.query_text(body.scenario, body.query, body.args, body.overrides, body.require)
        except (ScenarioError, ServiceError) as exc:
            raise HTTPException(422, str(exc)) from exc
        return m.QueryResponse(items=items)

    @app.post("/generate", response_model=m.GenerateResponse)
    def generate(body: m.GenerateRequest) -> m.GenerateResponse:
        out = ops.generate(body.n_actions, body.n_sa, body.n_pa)
        return m.GenerateResponse(
            scenario=out.scenario, predicted=out.predicted, counted=out.counted, per_action=out.per_action
        )

    @app.post("/sessions", response_model=m.SessionInfo, status_code=201)
    def create_session(body: m.ScenarioBody) -> m.SessionInfo:
        try:
            _, store = load_scenario(body.scenario)
        except ScenarioError as exc:
            raise HTTPException(422, str(exc)) from exc
        kb = KnowledgeBase(store)
        sid = str(next(ids))
        sessions[sid] = Session(kb, Engine(kb, ProcessTable(lambda: kb.tick)))
        return m.SessionInfo(id=sid, services=kb.service_names, counts=m.Counts(**count_elements(store)._asdict()))

    def get(sid: str) -> Session:
        sess = sessions.get(sid)
        if sess is None:
            raise HTTPException(404, f"no session {sid!r}")
        return sess

    @app.delete("/sessions/{sid}", status_code=204)
    def delete_session(sid: str) -> None:
        get(sid)
        del sessions[sid]

    @app.post("/sessions/{sid}/services/{name:path}", response_model=m.ServiceResult)
    def call_service(sid: str, name: str, body: m.ServiceCall) -> m.ServiceResult:
        sess = get(sid)
        try:
            response = sess.kb.call(name, body.request)
        except ServiceError as exc:
            raise HTTPException(404 if "unknown service" in str(exc) else 422, str(exc)) from exc
        except TypeError as exc:
            raise HTTPException(422, f"bad request for {name}: {exc}") from exc
        # events raised by the call (e.g. an action request) are handled before returning
        sess.engine.drain()
        return m.ServiceResult(response=response)

    @app.post("/sessions/{sid}/diagnostics", response_model=m.DiagnosticResult)
    def diagnostics(sid: str, body: m.DiagnosticBody) -> m.DiagnosticResult:
        """Ingest one diagnostic and run the managing loop to quiescence."""
        sess = get(sid)
        sess.kb.tick = max(sess.kb.tick, body.tick)
        ok = sess.kb.ingest(Diagnostic(body.source, body.kind, body.key, body.value, body.tick))
        handled = sess.engine.drain()
        return m.DiagnosticResult(accepted=ok, events=[e.kind for e in handled])

    return app


app = create_app()
