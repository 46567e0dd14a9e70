"""Session-based HTTP/JSON API for interactive simulation.

A session holds a parsed program, its derived theories, the chain walked so
far, and the cached successor groups of the last state.  Sessions live in
memory with TTL eviction; an optional append-only JSONL log records every
mutation for replay.  Each session serializes its own mutations; the kernel
values are immutable and shared.

Endpoints:
    POST   /sessions                 {program: text}
    GET    /sessions/{id}
    GET    /sessions/{id}/successors
    POST   /sessions/{id}/step       {choice: k}
    POST   /sessions/{id}/rollback   {to: k}
    GET    /sessions/{id}/history
    DELETE /sessions/{id}
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .inference import (
    Derivation, SuccessorGroup, derive, group_by_exogenous, initialise,
    progress,
)
from .parser import ParseFailure, parse
from .structure import Chain, chain_to_json, state_to_json
from .transform import expand_fluent_macro
from .validate import LtcValidationFailure, check_ltc_theory

AWAITING_INIT = "AwaitingInit"
RUNNING = "Running"
DEADLOCK = "Deadlock"
ENDED = "Ended"


class CreateSession(BaseModel):
    program: str
    theory: str | None = None
    structure: str | None = None


class StepBody(BaseModel):
    choice: int


class RollbackBody(BaseModel):
    to: int


@dataclass
class Session:
    id: str
    derivation: Derivation
    instance: object                  # the partial structure with the domains
    status: str = AWAITING_INIT
    chain: Chain | None = None
    groups: list = field(default_factory=list)   # flattened (label, state)
    truncated: bool = False
    filtered: bool = False            # the cache currently holds a narrowed view
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_used: float = field(default_factory=time.monotonic)


def _flatten_groups(groups: list[SuccessorGroup]) -> list:
    """One (label, state) entry per successor; multi-completion groups get
    an outcome suffix so every entry stays a distinct deterministic choice."""
    out = []
    for g in groups:
        if len(g.states) == 1:
            out.append((g.label, g.states[0]))
        else:
            for i, s in enumerate(g.states):
                out.append((f"{g.label} [outcome {i + 1}]", s))
    return out


def create_app(session_ttl: float = 1800.0, successor_cap: int = 200,
               log_path: str | None = None, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="LTC simulation service")
    _maybe_mount_ui(app, ui_dir)
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()
    log_lock = threading.Lock()

    def log_event(event: dict):
        if log_path is None:
            return
        with log_lock:
            with open(log_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, default=str) + "\n")

    def evict_expired():
        now = time.monotonic()
        with registry_lock:
            dead = [sid for sid, s in sessions.items() if now - s.last_used > session_ttl]
            for sid in dead:
                del sessions[sid]

    def get_session(sid: str) -> Session:
        evict_expired()
        with registry_lock:
            session = sessions.get(sid)
        if session is None:
            raise HTTPException(404, detail=f"unknown session {sid}")
        session.last_used = time.monotonic()
        return session

    def successors_payload(session: Session) -> dict:
        return {
            "groups": [
                {"index": i, "label": label, "state": state_to_json(state)}
                for i, (label, state) in enumerate(session.groups)
            ],
            "truncated": session.truncated,
        }

    def session_payload(session: Session) -> dict:
        return {
            "id": session.id,
            "status": session.status,
            "step": (session.chain.length if session.chain else None),
            "state": (state_to_json(session.chain.last) if session.chain else None),
            "successors": successors_payload(session),
        }

    def recompute_successors(session: Session, label_filter: str | None = None):
        # a filter widens the computation so matching choices beyond the cap
        # become steppable; the narrowed list replaces the cache (indices in
        # the response always match the cache)
        cap = successor_cap * (10 if label_filter else 1)
        if session.status == AWAITING_INIT:
            candidates = initialise(session.derivation, session.instance, cap + 1)
        else:
            candidates = progress(session.derivation, session.chain.last, cap + 1)
        overfull = len(candidates) > cap
        groups = _flatten_groups(
            group_by_exogenous(candidates[:cap], session.derivation.derived))
        if label_filter:
            groups = [(label, state) for label, state in groups if label_filter in label]
        session.truncated = overfull or len(groups) > successor_cap
        session.groups = groups[:successor_cap]
        session.filtered = label_filter is not None
        if session.status != AWAITING_INIT and not session.groups and not label_filter:
            session.status = DEADLOCK

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSession):
        try:
            prog = parse(body.program)
        except ParseFailure as exc:
            raise HTTPException(400, detail=[str(d) for d in exc.diagnostics])
        theories = prog.theories
        if not theories:
            raise HTTPException(400, detail=["program declares no theory"])
        tname = body.theory or next(iter(theories))
        if tname not in theories:
            raise HTTPException(400, detail=[f"unknown theory {tname!r}"])
        theory = theories[tname]
        voc, theory = expand_fluent_macro(theory.vocabulary, theory)
        try:
            derivation = derive(check_ltc_theory(theory))
        except LtcValidationFailure as exc:
            raise HTTPException(422, detail=[str(e) for e in exc.errors])
        structures = prog.structures
        sname = body.structure or (next(iter(structures)) if structures else None)
        if sname is None:
            raise HTTPException(400, detail=["program declares no structure (instance data)"])
        if sname not in structures:
            raise HTTPException(400, detail=[f"unknown structure {sname!r}"])
        sid = secrets.token_urlsafe(16)
        session = Session(sid, derivation, structures[sname])
        recompute_successors(session)
        with registry_lock:
            sessions[sid] = session
        log_event({"event": "create", "id": sid, "theory": tname, "structure": sname})
        return {
            "id": sid,
            "status": session.status,
            "candidates": [
                {"index": i, "label": label, "state": state_to_json(state)}
                for i, (label, state) in enumerate(session.groups)
            ],
            "truncated": session.truncated,
        }

    @app.get("/sessions/{sid}")
    def get_state(sid: str):
        session = get_session(sid)
        with session.lock:
            return session_payload(session)

    @app.get("/sessions/{sid}/successors")
    def list_successors(sid: str, filter: str | None = None):
        session = get_session(sid)
        with session.lock:
            if filter is not None:
                recompute_successors(session, label_filter=filter)
            elif session.filtered:
                recompute_successors(session)
            return successors_payload(session)

    @app.post("/sessions/{sid}/step")
    def step(sid: str, body: StepBody):
        session = get_session(sid)
        with session.lock:
            if session.status in (DEADLOCK, ENDED):
                raise HTTPException(409, detail=f"session is in {session.status}")
            if not (0 <= body.choice < len(session.groups)):
                raise HTTPException(422, detail=f"choice {body.choice} out of range 0..{len(session.groups) - 1}")
            label, state = session.groups[body.choice]
            if session.status == AWAITING_INIT:
                session.chain = Chain(session.derivation.derived, (state,))
                session.status = RUNNING
            else:
                session.chain = session.chain.extend(state)
            recompute_successors(session)
            log_event({"event": "step", "id": sid, "choice": body.choice, "label": label})
            return session_payload(session)

    @app.post("/sessions/{sid}/rollback")
    def rollback(sid: str, body: RollbackBody):
        session = get_session(sid)
        with session.lock:
            if session.chain is None:
                raise HTTPException(409, detail="session has no history yet")
            if not (0 <= body.to <= session.chain.length):
                raise HTTPException(422, detail=f"rollback target {body.to} out of range 0..{session.chain.length}")
            session.chain = session.chain.truncate(body.to)
            session.status = RUNNING
            recompute_successors(session)
            log_event({"event": "rollback", "id": sid, "to": body.to})
            return session_payload(session)

    @app.get("/sessions/{sid}/history")
    def history(sid: str):
        session = get_session(sid)
        with session.lock:
            if session.chain is None:
                return {"states": [], "metadata": {}}
            return chain_to_json(session.chain)

    @app.delete("/sessions/{sid}", status_code=204)
    def delete(sid: str):
        evict_expired()
        with registry_lock:
            if sid not in sessions:
                raise HTTPException(404, detail=f"unknown session {sid}")
            del sessions[sid]
        log_event({"event": "delete", "id": sid})
        return JSONResponse(status_code=204, content=None)

    return app


def _maybe_mount_ui(app: FastAPI, ui_dir: str | None):
    """Serve the browser client under /ui when its build output exists."""
    import os
    candidates = [ui_dir] if ui_dir else [
        os.environ.get("LTC_UI_DIR"),
        os.path.join(os.getcwd(), "frontend", "dist"),
    ]
    for cand in candidates:
        if cand and os.path.isdir(cand):
            from fastapi.staticfiles import StaticFiles
            app.mount("/ui", StaticFiles(directory=cand, html=True), name="ui")
            return
