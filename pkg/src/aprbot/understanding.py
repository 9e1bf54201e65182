"""Two-stage input understanding.

First the latest user input is rewritten into a standalone query against the
dialogue history (skipped entirely when there is no history); then the
standalone query is decomposed into at most three simple sub-queries. Both
stages go through the completion gateway; parsing failures degrade to the
standalone text itself, so decomposition always yields 1-3 sub-queries.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import prompts
from .llm import Gateway

logger = logging.getLogger(__name__)

HISTORY_WINDOW = 10  # turns serialized into the rewrite prompt
MAX_SUB_QUERIES = 3

ROLE_USER = "user"
ROLE_ASSISTANT = "assistant"


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass
class ChatTurn:
    role: str
    content: str
    timestamp: datetime = field(default_factory=_utcnow)

    def __post_init__(self):
        if self.role not in (ROLE_USER, ROLE_ASSISTANT):
            raise ValueError(f"unknown role {self.role!r}")
        if not self.content:
            raise ValueError("turn content must be non-empty")


@dataclass(frozen=True)
class StandaloneQuery:
    text: str
    was_rewritten: bool = False


@dataclass(frozen=True)
class SubQuery:
    text: str
    ordinal: int


def serialize_history(history: list[ChatTurn], window: int = HISTORY_WINDOW) -> str:
    lines = []
    for turn in history[-window:]:
        speaker = "User" if turn.role == ROLE_USER else "Assistant"
        lines.append(f"{speaker}: {turn.content}")
    return "\n".join(lines)


def decontextualize(history: list[ChatTurn], user_input: str,
                    gateway: Gateway) -> StandaloneQuery:
    """Rewrite the input into a standalone query given the chat history.

    An empty history short-circuits: the input passes through unchanged with
    no gateway call. A blank gateway answer falls back to the raw input.
    """
    if not user_input or not user_input.strip():
        raise ValueError("user input must be non-empty")
    user_input = user_input.strip()
    if not history:
        return StandaloneQuery(text=user_input, was_rewritten=False)

    prompt = prompts.render_template(
        prompts.DECONTEXTUALIZE,
        chat_history=serialize_history(history),
        question=user_input,
    )
    text = gateway.complete_prompt(prompt).strip()
    if not text:
        logger.warning("blank rewrite from gateway; using the raw input")
        return StandaloneQuery(text=user_input, was_rewritten=False)
    return StandaloneQuery(text=text, was_rewritten=True)


_NUMBERED_ITEM_RE = re.compile(r"^\s*\d+\s*[.)]\s*(.*)$")


def parse_numbered_list(text: str) -> list[str]:
    """Pull item texts out of a numbered list ("1." or "1)" markers).

    Tolerates prose before/after the list and never fails; lines that are not
    list items are ignored, and items that are blank after the marker are
    dropped.
    """
    items = []
    for line in text.splitlines():
        m = _NUMBERED_ITEM_RE.match(line)
        if m:
            item = m.group(1).strip()
            if item:
                items.append(item)
    return items


def decompose(standalone: StandaloneQuery, gateway: Gateway) -> list[SubQuery]:
    """Split a standalone query into 1-3 sub-queries.

    The gateway's numbered list is parsed, deduplicated case-insensitively,
    and capped at 3; when nothing parses, the standalone text itself is the
    single sub-query.
    """
    if not standalone.text.strip():
        raise ValueError("standalone query must be non-empty")
    prompt = prompts.render_template(prompts.DECOMPOSE, query=standalone.text)
    raw = gateway.complete_prompt(prompt)

    texts: list[str] = []
    seen: set[str] = set()
    for item in parse_numbered_list(raw):
        key = item.lower()
        if key in seen:
            continue
        seen.add(key)
        texts.append(item)
        if len(texts) == MAX_SUB_QUERIES:
            break
    if not texts:
        texts = [standalone.text]
    return [SubQuery(text=t, ordinal=i) for i, t in enumerate(texts, start=1)]
