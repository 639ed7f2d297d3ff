"""HTTP facade for the browser explorer.

Endpoints:
    POST /datasets                   CSV body -> {"session": id, ...}
    GET  /sessions/{id}/plot         query: lines, nlevels, method, naexp, k, locmax
    POST /sessions/{id}/brush        JSON list of {axis, levels|interval}
    POST /sessions/{id}/order        {"order": [col, ...]} or a bare list
    GET  /sessions/{id}/frequencies  tab-separated pattern/frequency text
    GET  /sessions/{id}/metrics      {"recounts": n} - frequency recomputations

Sessions live in memory with LRU eviction. Responses are deterministic given
session state, and brushing or reordering reuses the cached frequency table
rather than recounting.
"""

from __future__ import annotations

import io
import threading
import uuid
from collections import OrderedDict
from typing import Any

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from .counting import export_frequencies, top_patterns
from .discretize import DiscretizeSpec
from .pipeline import COUNT_METHODS, compute_frequencies, density_selection, ensure_discrete
from .plot import PlotModel, apply_brush, brush_from_dict, build_plot, emit_json, permute_columns
from .table import Table, load_csv


class _Session:
    def __init__(self, table: Table) -> None:
        self.table = table
        self.lock = threading.Lock()
        self.freq_cache: dict[tuple, Any] = {}
        self.recounts = 0
        self.model: PlotModel | None = None
        self.params: tuple | None = None
        self.order: list[str] | None = None
        self.brush: tuple = ()


def create_app(
    max_bytes: int = 64 * 1024 * 1024,
    max_sessions: int = 32,
    count_threads: int = 1,
) -> FastAPI:
    app = FastAPI(title="tfpc")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    sessions: OrderedDict[str, _Session] = OrderedDict()
    registry_lock = threading.Lock()

    def get_session(sid: str) -> _Session:
        with registry_lock:
            if sid not in sessions:
                raise HTTPException(status_code=404, detail=f"unknown session {sid!r}")
            sessions.move_to_end(sid)
            return sessions[sid]

    def frequency_table(session: _Session, method: str, nlevels: int, naexp: float):
        key = (method, nlevels, naexp)
        if key not in session.freq_cache:
            table = ensure_discrete(session.table, DiscretizeSpec(nlevels))
            ft = compute_frequencies(table, method=method, naexp=naexp, threads=count_threads)
            session.freq_cache[key] = (table, ft)
            session.recounts += 1
        return session.freq_cache[key]

    def build_model(session: _Session, params: tuple) -> PlotModel:
        kind, lines, nlevels, method, naexp, k, locmax = params
        if kind == "density":
            selection, scaled, kept = density_selection(
                session.table, k=k, lines=lines, locmax=locmax
            )
            model = build_plot(
                selection,
                scaled,
                column_order=session.order,
                labels=True,
                row_labels={i: str(orig) for i, orig in enumerate(kept)},
            )
        else:
            table, ft = frequency_table(session, method, nlevels, naexp)
            selection = top_patterns(ft, lines)
            model = build_plot(selection, table, column_order=session.order)
        if session.brush:
            try:
                model = apply_brush(model, session.brush)
            except ValueError:
                session.brush = ()  # stale conditions from another axis set
        return model

    def current_model(session: _Session) -> PlotModel:
        if session.model is None:
            session.params = ("count", 50, 10, "drop", 1.0, None, False)
            session.model = build_model(session, session.params)
        return session.model

    def model_response(model: PlotModel) -> Response:
        return Response(content=emit_json(model), media_type="application/json")

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/datasets")
    async def upload(request: Request) -> dict:
        body = await request.body()
        if len(body) > max_bytes:
            raise HTTPException(status_code=413, detail="dataset over the size cap")
        try:
            table = load_csv(body)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        sid = uuid.uuid4().hex[:12]
        with registry_lock:
            sessions[sid] = _Session(table)
            while len(sessions) > max_sessions:
                sessions.popitem(last=False)
        return {"session": sid, "n": table.n, "p": table.p, "columns": list(table.names)}

    @app.get("/sessions/{sid}/plot")
    def plot(
        sid: str,
        lines: int = 50,
        nlevels: int = 10,
        method: str = "drop",
        naexp: float = 1.0,
        k: int | None = None,
        locmax: bool = False,
    ) -> Response:
        session = get_session(sid)
        if method not in COUNT_METHODS + ("density",):
            raise HTTPException(status_code=400, detail=f"unknown method {method!r}")
        kind = "density" if method == "density" else "count"
        params = (kind, lines, nlevels, method, naexp, k, locmax)
        with session.lock:
            try:
                model = build_model(session, params)
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            session.params = params
            session.model = model
            return model_response(model)

    @app.post("/sessions/{sid}/brush")
    async def brush(sid: str, request: Request) -> Response:
        session = get_session(sid)
        try:
            payload = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail="body must be JSON")
        if isinstance(payload, dict) and "conditions" in payload:
            payload = payload["conditions"]
        if not isinstance(payload, list):
            raise HTTPException(status_code=400, detail="expected a list of brush conditions")
        with session.lock:
            model = current_model(session)
            try:
                conditions = tuple(brush_from_dict(c) for c in payload)
                model = apply_brush(model, conditions) if conditions else _clear_brush(model)
            except (ValueError, TypeError) as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            session.brush = conditions
            session.model = model
            return model_response(model)

    @app.post("/sessions/{sid}/order")
    async def order(sid: str, request: Request) -> Response:
        session = get_session(sid)
        try:
            payload = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail="body must be JSON")
        if isinstance(payload, dict) and "order" in payload:
            payload = payload["order"]
        if not isinstance(payload, list) or not all(isinstance(c, str) for c in payload):
            raise HTTPException(status_code=400, detail="expected a list of column names")
        with session.lock:
            model = current_model(session)
            try:
                model = permute_columns(model, payload)
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            session.order = list(payload)
            session.model = model
            return model_response(model)

    @app.get("/sessions/{sid}/frequencies")
    def frequencies(sid: str, nlevels: int = 10, method: str = "drop", naexp: float = 1.0):
        session = get_session(sid)
        if method not in COUNT_METHODS:
            raise HTTPException(status_code=400, detail=f"unknown method {method!r}")
        with session.lock:
            try:
                _, ft = frequency_table(session, method, nlevels, naexp)
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            out = io.StringIO()
            export_frequencies(ft, out)
            return Response(content=out.getvalue(), media_type="text/tab-separated-values")

    @app.get("/sessions/{sid}/metrics")
    def metrics(sid: str) -> dict:
        session = get_session(sid)
        return {"recounts": session.recounts}

    return app


def _clear_brush(model: PlotModel) -> PlotModel:
    import dataclasses

    lines = tuple(dataclasses.replace(l, highlighted=False) for l in model.lines)
    facets = None
    if model.facets is not None:
        facets = tuple((lev, _clear_brush(sub)) for lev, sub in model.facets)
    return dataclasses.replace(model, lines=lines, brush=(), facets=facets)


app = create_app()
