"""HTTP service exposing episode sessions over a small JSON protocol.

One process serves one immutable bundle. Sessions are independent episodes;
steps within a session are serialized by a per-session lock, and stepping a
finished session is a 409. Malformed transport bodies are 400s, while agent
output that merely fails the action grammar is a normal 200 no-op step —
that distinction keeps transport errors apart from in-episode mistakes.
Endpoint schemas are documented in PROTOCOL.md.
"""

from __future__ import annotations

import base64
import threading
import uuid
from pathlib import Path
from typing import Dict, List, Optional

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .compositor import EnvBundle, load_bundle, render_screen
from .episode import Episode, TaskSpec
from .errors import UnknownNodeError
from .graph import page_label
from .raster import encode_png

PROTOCOL_VERSION = "1"


class SessionCreateRequest(BaseModel):
    start: int
    goal: int
    max_rounds: int = Field(default=12, ge=1, le=1000)
    allow_complete: bool = True
    inline_images: bool = False


class ObservationModel(BaseModel):
    instruction: str
    history: List[str]
    image_url: str
    image_b64: Optional[str] = None


class SessionCreateResponse(BaseModel):
    protocol: str
    session_id: str
    observation: ObservationModel


class StepRequest(BaseModel):
    raw_text: str


class StepInfoModel(BaseModel):
    transitioned: bool
    invalid_click: bool
    reached_target: bool


class StepResponse(BaseModel):
    protocol: str
    observation: ObservationModel
    done: bool
    a2b_reward: int
    info: StepInfoModel


class SessionStateResponse(BaseModel):
    protocol: str
    session_id: str
    instruction: str
    current_page: str
    step_index: int
    max_rounds: int
    allow_complete: bool
    done: bool
    success: bool


class VersionResponse(BaseModel):
    protocol: str
    service: str
    variant: str
    nodes: int


class DeleteResponse(BaseModel):
    protocol: str
    deleted: bool


class _Session:
    def __init__(self, episode: Episode, inline_images: bool):
        self.episode = episode
        self.inline_images = inline_images
        self.lock = threading.Lock()


class SessionStore:
    def __init__(self) -> None:
        self._sessions: Dict[str, _Session] = {}
        self._lock = threading.Lock()

    def create(self, episode: Episode, inline_images: bool) -> str:
        session_id = uuid.uuid4().hex
        with self._lock:
            self._sessions[session_id] = _Session(episode, inline_images)
        return session_id

    def get(self, session_id: str) -> _Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return session

    def delete(self, session_id: str) -> bool:
        with self._lock:
            return self._sessions.pop(session_id, None) is not None


def create_app(bundle: EnvBundle, images_dir: Optional[Path] = None) -> FastAPI:
    """Build the service around one loaded bundle.

    ``images_dir`` points at pre-rendered PNGs (the bundle's screens/
    directory); screens without a cached file are rendered on demand.
    """
    app = FastAPI(title="screennav", version=__version__)
    store = SessionStore()
    png_cache: Dict[int, bytes] = {}
    cache_lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def screen_png(node: int) -> bytes:
        if images_dir is not None:
            path = images_dir / f"{page_label(node)}.png"
            if path.exists():
                return path.read_bytes()
        with cache_lock:
            cached = png_cache.get(node)
        if cached is None:
            cached = encode_png(render_screen(bundle.screen(node)))
            with cache_lock:
                png_cache[node] = cached
        return cached

    def observe(session: _Session) -> ObservationModel:
        obs = session.episode.observation()
        node = session.episode.current
        image_b64 = None
        if session.inline_images:
            image_b64 = base64.b64encode(screen_png(node)).decode("ascii")
        return ObservationModel(
            instruction=obs.instruction,
            history=list(obs.history),
            image_url=f"/screens/{page_label(node)}.png",
            image_b64=image_b64,
        )

    @app.get("/version", response_model=VersionResponse)
    def version() -> VersionResponse:
        return VersionResponse(
            protocol=PROTOCOL_VERSION,
            service=__version__,
            variant=bundle.variant,
            nodes=bundle.node_count(),
        )

    @app.post("/session", response_model=SessionCreateResponse)
    def create_session(body: SessionCreateRequest) -> SessionCreateResponse:
        try:
            task = TaskSpec(start=body.start, goal=body.goal)
            episode = Episode(
                env=bundle,
                task=task,
                max_rounds=body.max_rounds,
                allow_complete=body.allow_complete,
            )
        except (ValueError, UnknownNodeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        session_id = store.create(episode, body.inline_images)
        session = store.get(session_id)
        return SessionCreateResponse(
            protocol=PROTOCOL_VERSION,
            session_id=session_id,
            observation=observe(session),
        )

    @app.post("/session/{session_id}/step", response_model=StepResponse)
    def step_session(session_id: str, body: StepRequest) -> StepResponse:
        session = store.get(session_id)
        with session.lock:
            if session.episode.done:
                raise HTTPException(status_code=409, detail="session already finished")
            result = session.episode.step_text(body.raw_text)
            return StepResponse(
                protocol=PROTOCOL_VERSION,
                observation=observe(session),
                done=result.done,
                a2b_reward=result.a2b_reward,
                info=StepInfoModel(
                    transitioned=result.info.transitioned,
                    invalid_click=result.info.invalid_click,
                    reached_target=result.info.reached_target,
                ),
            )

    @app.get("/session/{session_id}", response_model=SessionStateResponse)
    def session_state(session_id: str) -> SessionStateResponse:
        session = store.get(session_id)
        with session.lock:
            episode = session.episode
            return SessionStateResponse(
                protocol=PROTOCOL_VERSION,
                session_id=session_id,
                instruction=episode.task.instruction,
                current_page=page_label(episode.current),
                step_index=episode.step_index,
                max_rounds=episode.max_rounds,
                allow_complete=episode.allow_complete,
                done=episode.done,
                success=episode.success,
            )

    @app.delete("/session/{session_id}", response_model=DeleteResponse)
    def delete_session(session_id: str) -> DeleteResponse:
        if not store.delete(session_id):
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return DeleteResponse(protocol=PROTOCOL_VERSION, deleted=True)

    @app.get("/screens/page_{node}.png")
    def screen_image(node: int) -> Response:
        if node not in bundle.graph:
            raise HTTPException(status_code=404, detail=f"no such screen page_{node}")
        return Response(content=screen_png(node), media_type="image/png")

    return app


def create_app_from_dir(env_dir: str | Path) -> FastAPI:
    env_dir = Path(env_dir)
    bundle = load_bundle(env_dir)
    return create_app(bundle, images_dir=env_dir / "screens")


def serve(env_dir: str | Path, host: str = "127.0.0.1", port: int = 8321) -> None:
    import uvicorn

    uvicorn.run(create_app_from_dir(env_dir), host=host, port=port, log_level="warning")
