"""Service configuration resolved from APR_* environment variables and flags.

Precedence is CLI flag > environment variable > built-in default; the CLI
layer passes explicit overrides into from_env. Invalid values raise
ConfigError, which the CLI maps to exit code 1.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .embeddings import EmbeddingProvider, HashedBowEmbedder, RemoteEmbeddingProvider
from .exceptions import ConfigError
from .index import RetrievalConfig
from .llm import Gateway, RemoteChatProvider, StubCompletionProvider
from .sessions import DEFAULT_TTL_SECS
from .understanding import HISTORY_WINDOW

DEFAULT_BIND = "127.0.0.1:8080"

_TRUTHY = {"1", "true", "yes", "on"}
_FALSY = {"0", "false", "no", "off", ""}


def parse_bool(raw: str, name: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in _TRUTHY:
        return True
    if lowered in _FALSY:
        return False
    raise ConfigError(f"{name}: expected a boolean, got {raw!r}")


def parse_bind(raw: str) -> tuple[str, int]:
    host, sep, port_s = raw.rpartition(":")
    if not sep or not host:
        raise ConfigError(f"bind address must look like host:port, got {raw!r}")
    try:
        port = int(port_s)
    except ValueError:
        raise ConfigError(f"bind port must be an integer, got {port_s!r}") from None
    if not 0 < port < 65536:
        raise ConfigError(f"bind port out of range: {port}")
    return host, port


@dataclass
class ServiceConfig:
    bind_host: str = "127.0.0.1"
    bind_port: int = 8080
    kb_path: str = ""
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    history_window: int = HISTORY_WINDOW
    session_ttl_secs: float = DEFAULT_TTL_SECS
    use_stub_providers: bool = False
    rate_limit_per_min: int = 0  # 0 disables the per-IP token bucket
    llm_base_url: str = ""
    llm_model: str = ""
    llm_api_key: str = ""
    embed_model: str = ""

    @classmethod
    def from_env(cls, environ: dict[str, str] | None = None, *,
                 kb_path: str | None = None, top_k: int | None = None,
                 score_threshold: float | None = None,
                 bind: str | None = None) -> "ServiceConfig":
        env = os.environ if environ is None else environ

        def get(name: str, default: str = "") -> str:
            return env.get(name, default)

        host, port = parse_bind(bind or get("APR_BIND", DEFAULT_BIND))
        try:
            k = top_k if top_k is not None else int(get("APR_TOP_K", "5"))
            threshold = (score_threshold if score_threshold is not None
                         else float(get("APR_SCORE_THRESHOLD", "0.7")))
            ttl = float(get("APR_SESSION_TTL_SECS", str(DEFAULT_TTL_SECS)))
            rate_limit = int(get("APR_RATE_LIMIT_PER_MIN", "0"))
        except ValueError as exc:
            raise ConfigError(f"bad numeric setting: {exc}") from None
        try:
            retrieval = RetrievalConfig(top_k=k, score_threshold=threshold)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if ttl <= 0:
            raise ConfigError(f"APR_SESSION_TTL_SECS must be positive, got {ttl}")
        if rate_limit < 0:
            raise ConfigError(f"APR_RATE_LIMIT_PER_MIN must be >= 0, got {rate_limit}")

        return cls(
            bind_host=host,
            bind_port=port,
            kb_path=kb_path if kb_path is not None else get("APR_KB_PATH"),
            retrieval=retrieval,
            session_ttl_secs=ttl,
            use_stub_providers=parse_bool(
                get("APR_USE_STUB_PROVIDERS", "0"), "APR_USE_STUB_PROVIDERS"),
            rate_limit_per_min=rate_limit,
            llm_base_url=get("APR_LLM_BASE_URL"),
            llm_model=get("APR_LLM_MODEL"),
            llm_api_key=get("APR_LLM_API_KEY"),
            embed_model=get("APR_EMBED_MODEL"),
        )

    def require_kb(self) -> str:
        if not self.kb_path:
            raise ConfigError("no KB path configured (set APR_KB_PATH or pass --kb)")
        if not os.path.exists(self.kb_path):
            raise ConfigError(f"KB file not found: {self.kb_path}")
        return self.kb_path


def build_providers(cfg: ServiceConfig) -> tuple[EmbeddingProvider, Gateway]:
    """Instantiate exactly one embedding provider and one completion gateway."""
    if cfg.use_stub_providers:
        return HashedBowEmbedder(), Gateway(StubCompletionProvider(), model="stub")

    missing = [name for name, value in (
        ("APR_LLM_BASE_URL", cfg.llm_base_url),
        ("APR_LLM_MODEL", cfg.llm_model),
        ("APR_EMBED_MODEL", cfg.embed_model),
    ) if not value]
    if missing:
        raise ConfigError(
            "remote providers need " + ", ".join(missing)
            + " (or set APR_USE_STUB_PROVIDERS=1)")
    embedder = RemoteEmbeddingProvider(
        base_url=cfg.llm_base_url, api_key=cfg.llm_api_key, model=cfg.embed_model)
    provider = RemoteChatProvider(
        base_url=cfg.llm_base_url, api_key=cfg.llm_api_key, model=cfg.llm_model)
    return embedder, Gateway(provider, model=cfg.llm_model)
