"""In-memory chat sessions with TTL eviction and an optional JSON snapshot.

Transcripts live only inside the TTL window; nothing is logged or persisted
unless an operator explicitly snapshots to disk for a restart.
"""

from __future__ import annotations

import json
import secrets
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .understanding import ChatTurn

DEFAULT_TTL_SECS = 2 * 60 * 60


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass
class ChatSession:
    session_id: str
    turns: list[ChatTurn] = field(default_factory=list)
    created_at: datetime = field(default_factory=_utcnow)
    last_active: datetime = field(default_factory=_utcnow)

    def __post_init__(self):
        self._lock = threading.Lock()

    def append_exchange(self, user_content: str, assistant_content: str) -> None:
        """Append one user turn and one assistant turn atomically."""
        with self._lock:
            self.turns.append(ChatTurn(role="user", content=user_content))
            self.turns.append(ChatTurn(role="assistant", content=assistant_content))
            self.last_active = _utcnow()

    def history(self) -> list[ChatTurn]:
        with self._lock:
            return list(self.turns)


class SessionStore:
    """Thread-safe session registry; expired sessions vanish on access or sweep."""

    def __init__(self, ttl_secs: float = DEFAULT_TTL_SECS):
        self.ttl_secs = ttl_secs
        self._sessions: dict[str, ChatSession] = {}
        self._lock = threading.Lock()

    def create(self) -> ChatSession:
        session = ChatSession(session_id=secrets.token_urlsafe(16))
        with self._lock:
            self._sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> ChatSession | None:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                return None
            if self._expired(session):
                del self._sessions[session_id]
                return None
            return session

    def sweep(self) -> int:
        with self._lock:
            dead = [sid for sid, s in self._sessions.items() if self._expired(s)]
            for sid in dead:
                del self._sessions[sid]
            return len(dead)

    def __len__(self) -> int:
        with self._lock:
            return len(self._sessions)

    def _expired(self, session: ChatSession) -> bool:
        age = (_utcnow() - session.last_active).total_seconds()
        return age > self.ttl_secs

    def save_snapshot(self, path: str | Path) -> None:
        with self._lock:
            payload = [
                {
                    "session_id": s.session_id,
                    "created_at": s.created_at.isoformat(),
                    "last_active": s.last_active.isoformat(),
                    "turns": [
                        {"role": t.role, "content": t.content,
                         "timestamp": t.timestamp.isoformat()}
                        for t in s.turns
                    ],
                }
                for s in self._sessions.values()
            ]
        Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")

    def load_snapshot(self, path: str | Path) -> int:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        loaded = 0
        with self._lock:
            for item in raw:
                session = ChatSession(
                    session_id=item["session_id"],
                    turns=[ChatTurn(role=t["role"], content=t["content"],
                                    timestamp=datetime.fromisoformat(t["timestamp"]))
                           for t in item["turns"]],
                    created_at=datetime.fromisoformat(item["created_at"]),
                    last_active=datetime.fromisoformat(item["last_active"]),
                )
                if not self._expired(session):
                    self._sessions[session.session_id] = session
                    loaded += 1
        return loaded
