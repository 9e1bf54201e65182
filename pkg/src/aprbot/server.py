"""HTTP service: sessions, chat, chunk lookup, health.

All endpoints speak JSON. Failures use one envelope, {"error": {"code",
"message"}}, so clients can branch on `code` without parsing prose. Message
bodies are never logged; log lines carry ids and sizes only.
"""

from __future__ import annotations

import logging
import threading
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import ServiceConfig, build_providers
from .embeddings import EmbeddingProvider
from .engine import NO_RESULTS_MESSAGE, Answer, answer
from .exceptions import ProviderError
from .index import PassageIndex, build_index
from .kb import Chunk, read_kb
from .llm import Gateway
from .sessions import SessionStore

logger = logging.getLogger(__name__)

SCORE_DECIMALS = 4


class ApiError(Exception):
    """Raised by handlers; rendered as the machine-readable error envelope."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": {"code": code, "message": message}})


class ChatRequest(BaseModel):
    session_id: str
    message: str


class RateLimiter:
    """Per-key token bucket: capacity and refill are both `per_minute`."""

    def __init__(self, per_minute: int, clock: Callable[[], float] = time.monotonic):
        if per_minute < 1:
            raise ValueError(f"per_minute must be >= 1, got {per_minute}")
        self.per_minute = per_minute
        self._clock = clock
        self._buckets: dict[str, tuple[float, float]] = {}  # key -> (tokens, stamp)
        self._lock = threading.Lock()

    def allow(self, key: str) -> bool:
        now = self._clock()
        with self._lock:
            tokens, stamp = self._buckets.get(key, (float(self.per_minute), now))
            tokens = min(float(self.per_minute),
                         tokens + (now - stamp) * self.per_minute / 60.0)
            allowed = tokens >= 1.0
            self._buckets[key] = (tokens - 1.0 if allowed else tokens, now)
            return allowed


@dataclass
class AppState:
    cfg: ServiceConfig
    store: SessionStore
    embedder: EmbeddingProvider | None = None
    gateway: Gateway | None = None
    index: PassageIndex | None = None
    chunks_by_id: dict[str, Chunk] = field(default_factory=dict)
    snapshot_path: str | None = None
    shared_secret: str | None = None

    def attach_index(self, index: PassageIndex) -> None:
        self.index = index
        self.chunks_by_id = {c.chunk_id: c for c in index.chunks}


def answer_to_payload(ans: Answer) -> dict:
    """Wire form of an Answer. Scores are rounded here and only here."""
    return {
        "standalone_query": ans.standalone_query.text,
        "no_results": ans.no_results,
        "no_results_message": NO_RESULTS_MESSAGE if ans.no_results else None,
        "sections": [
            {
                "sub_query": section.sub_query.text,
                "passages": [
                    {
                        "chunk_id": p.chunk.chunk_id,
                        "text": p.chunk.text,
                        "score": round(p.score, SCORE_DECIMALS),
                        "doc_title": p.chunk.doc_title,
                        "doc_url": p.chunk.doc_url,
                        "header_path": list(p.chunk.header_path),
                    }
                    for p in section.passages
                ],
            }
            for section in ans.sections
        ],
    }


def chunk_to_payload(chunk: Chunk) -> dict:
    return {
        "chunk_id": chunk.chunk_id,
        "doc_url": chunk.doc_url,
        "doc_title": chunk.doc_title,
        "header_path": list(chunk.header_path),
        "text": chunk.text,
        "kind": chunk.kind,
    }


def load_index_from_kb(cfg: ServiceConfig, embedder: EmbeddingProvider,
                       cache_path: str | Path | None = None) -> PassageIndex:
    chunks = read_kb(cfg.require_kb())
    return build_index(chunks, embedder, cache_path=cache_path)


def create_app(cfg: ServiceConfig | None = None, *,
               index: PassageIndex | None = None,
               gateway: Gateway | None = None,
               embedder: EmbeddingProvider | None = None,
               store: SessionStore | None = None,
               snapshot_path: str | None = None,
               shared_secret: str | None = None,
               load_kb_on_startup: bool = False) -> FastAPI:
    """Build the app. Tests inject index/gateway directly; `serve` passes
    load_kb_on_startup=True so startup cost lands before the bind."""
    cfg = cfg or ServiceConfig()
    state = AppState(
        cfg=cfg,
        store=store or SessionStore(ttl_secs=cfg.session_ttl_secs),
        embedder=embedder,
        gateway=gateway,
        snapshot_path=snapshot_path,
        shared_secret=shared_secret,
    )
    if index is not None:
        state.attach_index(index)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if state.embedder is None or state.gateway is None:
            built_embedder, built_gateway = build_providers(cfg)
            state.embedder = state.embedder or built_embedder
            state.gateway = state.gateway or built_gateway
        if state.index is None and load_kb_on_startup:
            state.attach_index(load_index_from_kb(cfg, state.embedder))
            logger.info("index loaded: %d chunks", len(state.index.chunks))
        if state.snapshot_path and Path(state.snapshot_path).exists():
            restored = state.store.load_snapshot(state.snapshot_path)
            logger.info("restored %d sessions from snapshot", restored)
        yield
        if state.snapshot_path:
            state.store.save_snapshot(state.snapshot_path)

    app = FastAPI(lifespan=lifespan)
    app.state.apr = state

    @app.exception_handler(ApiError)
    async def on_api_error(request: Request, exc: ApiError):
        return _error_response(exc.status, exc.code, exc.message)

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return _error_response(400, "invalid_request", "malformed request body")

    limiter = (RateLimiter(cfg.rate_limit_per_min)
               if cfg.rate_limit_per_min > 0 else None)

    def check_secret(request: Request) -> None:
        if state.shared_secret is None:
            return
        if request.headers.get("x-apr-secret") != state.shared_secret:
            raise ApiError(401, "unauthorized", "missing or wrong shared secret")

    def check_rate(request: Request) -> None:
        if limiter is None:
            return
        client_ip = request.client.host if request.client else "unknown"
        if not limiter.allow(client_ip):
            raise ApiError(429, "rate_limited", "too many requests; retry later")

    @app.post("/api/sessions")
    def create_session(request: Request):
        check_secret(request)
        check_rate(request)
        state.store.sweep()
        session = state.store.create()
        return {"session_id": session.session_id}

    @app.post("/api/chat")
    def chat(body: ChatRequest, request: Request):
        check_secret(request)
        check_rate(request)
        if state.index is None:
            raise ApiError(503, "index_not_loaded", "the passage index is not loaded yet")
        message = body.message.strip()
        if not message:
            raise ApiError(400, "empty_message", "message must be non-empty")
        session = state.store.get(body.session_id)
        if session is None:
            raise ApiError(404, "unknown_session", "no such session (it may have expired)")
        try:
            ans = answer(session, message, state.index, state.gateway, cfg.retrieval)
        except ProviderError as exc:
            logger.warning("upstream failure for session %s: %s",
                           body.session_id, exc)
            raise ApiError(502, "gateway_error", str(exc)) from exc
        return answer_to_payload(ans)

    @app.get("/api/chunks/{chunk_id}")
    def get_chunk(chunk_id: str, request: Request):
        check_secret(request)
        chunk = state.chunks_by_id.get(chunk_id)
        if chunk is None:
            raise ApiError(404, "unknown_chunk", f"no chunk with id {chunk_id!r}")
        return chunk_to_payload(chunk)

    @app.get("/api/health")
    def health():
        providers = []
        if state.embedder is not None:
            providers.append(state.embedder.name())
        if state.gateway is not None:
            providers.append(state.gateway.name())
        return {
            "status": "ok" if state.index is not None else "starting",
            "kb_chunks": 0 if state.index is None else len(state.index.chunks),
            "provider_names": providers,
        }

    return app
