"""HTTP surface for the chat engine and molecule utilities.

The service is the single integration point for any UI: all chemistry
(parsing, similarity, validity) happens server-side.  Session turns are
serialized per session with a lock, so concurrent requests against one
session never interleave state.
"""
from __future__ import annotations

import os
from contextlib import asynccontextmanager

from fastapi import Body, FastAPI, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from .chat import (BackendError, SessionStore, generate_turn, session_to_jsonl,
                   understand_turn)
from .config import Config, make_backend
from .fingerprints import morgan, path_fp, structural_keys, tanimoto
from .graph import SmilesError
from .metrics import evaluate_generation, evaluate_understanding, read_records
from .parser import parse


def _smiles_error(exc: SmilesError, status: int = 422) -> JSONResponse:
    return JSONResponse(status_code=status, content={
        "error": {"kind": exc.kind.value, "position": exc.position,
                  "detail": str(exc)}})


def create_app(config: Config | None = None,
               backends: dict | None = None) -> FastAPI:
    """Build the service; backends maps backend id -> instance.

    When backends is not given, the configured backend is built lazily on
    the first session that needs it.
    """
    config = config or Config()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        if not config.log_dir:
            return
        os.makedirs(config.log_dir, exist_ok=True)
        for session in store.all():
            path = os.path.join(config.log_dir, f"{session.id}.jsonl")
            with open(path, "w", encoding="utf-8") as handle:
                handle.write(session_to_jsonl(session))

    app = FastAPI(title="moldialog service", lifespan=lifespan)
    # the browser UI may be served from a different origin than the API;
    # no credentials are involved anywhere, so a blanket allow is safe here
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    store = SessionStore()
    registry: dict = dict(backends) if backends else {}

    def resolve_backend(backend_id: str):
        if backend_id not in registry:
            if backend_id != config.backend_kind:
                return None
            registry[backend_id] = make_backend(config)
        return registry[backend_id]

    app.state.store = store
    app.state.backends = registry

    @app.post("/sessions", status_code=201)
    def create_session(payload: dict = Body(default={})):
        backend_id = payload.get("backend") or config.backend_kind
        if resolve_backend(backend_id) is None:
            return JSONResponse(status_code=400, content={
                "error": {"detail": f"unknown backend: {backend_id}"}})
        session = store.create(backend_id)
        return {"id": session.id, "backend": session.backend_id,
                "created_at": session.created_at}

    @app.post("/sessions/{session_id}/turns")
    def post_turn(session_id: str, payload: dict = Body(...)):
        try:
            session = store.get(session_id)
        except KeyError:
            return JSONResponse(status_code=404, content={
                "error": {"detail": f"no such session: {session_id}"}})
        kind = payload.get("kind")
        content = payload.get("content")
        if kind not in ("text", "molecule") or not isinstance(content, str):
            return JSONResponse(status_code=422, content={
                "error": {"detail": "kind must be text|molecule with string content"}})
        backend = resolve_backend(session.backend_id)
        with store.lock(session_id):
            try:
                if kind == "text":
                    k = payload.get("k", 3)
                    refine_from = payload.get("refine_from")
                    result = generate_turn(session, backend, content, k=k,
                                           refine_from=refine_from)
                    return result.to_dict()
                description = understand_turn(session, backend, content)
                return {"description": description}
            except SmilesError as exc:
                return _smiles_error(exc)
            except ValueError as exc:
                return JSONResponse(status_code=422,
                                    content={"error": {"detail": str(exc)}})
            except BackendError as exc:
                return JSONResponse(status_code=502,
                                    content={"error": {"detail": str(exc)}})

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            session = store.get(session_id)
        except KeyError:
            return JSONResponse(status_code=404, content={
                "error": {"detail": f"no such session: {session_id}"}})
        return PlainTextResponse(session_to_jsonl(session),
                                 media_type="application/x-ndjson")

    @app.get("/molecules/parse")
    def parse_molecule(smiles: str = Query(...)):
        try:
            graph = parse(smiles)
        except SmilesError as exc:
            return _smiles_error(exc)
        return graph.to_json_dict()

    @app.post("/similarity")
    def similarity(payload: dict = Body(...)):
        for side in ("a", "b"):
            if not isinstance(payload.get(side), str):
                return JSONResponse(status_code=422, content={
                    "error": {"detail": f"missing smiles: {side}"}})
        graphs = {}
        for side in ("a", "b"):
            try:
                graphs[side] = parse(payload[side])
            except SmilesError as exc:
                return JSONResponse(status_code=422, content={
                    "error": {"kind": exc.kind.value, "position": exc.position,
                              "detail": str(exc), "which": side}})
        a, b = graphs["a"], graphs["b"]
        return {
            "fts_rdk": tanimoto(path_fp(a), path_fp(b)),
            "fts_maccs": tanimoto(structural_keys(a), structural_keys(b)),
            "fts_morgan": tanimoto(morgan(a), morgan(b)),
        }

    @app.post("/evaluate")
    def evaluate(payload: dict = Body(...)):
        task = payload.get("task")
        if task not in ("generation", "understanding"):
            return JSONResponse(status_code=422, content={
                "error": {"detail": "task must be generation|understanding"}})
        try:
            predictions = (payload["predictions"] if "predictions" in payload
                           else read_records(payload["predictions_path"]))
            references = (payload["references"] if "references" in payload
                          else read_records(payload["references_path"]))
        except (KeyError, OSError, ValueError) as exc:
            return JSONResponse(status_code=422,
                                content={"error": {"detail": str(exc)}})
        try:
            if task == "generation":
                report = evaluate_generation(predictions, references)
            else:
                report = evaluate_understanding(predictions, references)
        except (ValueError, SmilesError) as exc:
            return JSONResponse(status_code=400,
                                content={"error": {"detail": str(exc)}})
        return report.to_dict()

    return app
