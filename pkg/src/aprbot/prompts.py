"""Prompt template loading and rendering.

Templates are plain text files shipped with the package (aprbot/prompts/),
with literal {chat_history}, {question}, {query}, {passages} slots. Rendering
uses token replacement rather than str.format so braces inside user text
cannot break a prompt. Operators can override the directory via APR_PROMPT_DIR
to iterate on templates without touching code.
"""

from __future__ import annotations

import os
from functools import lru_cache
from importlib import resources
from pathlib import Path

DECONTEXTUALIZE = "decontextualize"
DECOMPOSE = "decompose"
RAG_SYNTHESIS = "rag_synthesis"


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    override_dir = os.environ.get("APR_PROMPT_DIR")
    if override_dir:
        candidate = Path(override_dir) / f"{name}.txt"
        if candidate.exists():
            return candidate.read_text(encoding="utf-8")
    return resources.files("aprbot").joinpath("prompts", f"{name}.txt").read_text(encoding="utf-8")


def render(template: str, **slots: str) -> str:
    for key, value in slots.items():
        template = template.replace("{" + key + "}", value)
    return template


def render_template(name: str, **slots: str) -> str:
    return render(load_template(name), **slots)
