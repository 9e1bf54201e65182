"""Knowledge-base data model and JSONL file format.

A KB file is UTF-8 JSON Lines with LF endings, one chunk per line, keys in
a fixed order so reruns over identical content produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable

KIND_REGULAR = "regular"
KIND_GUIDE = "step_by_step_guide"
VALID_KINDS = (KIND_REGULAR, KIND_GUIDE)

# Frozen key order of a KB line; do not reorder.
_CHUNK_KEYS = ("chunk_id", "doc_url", "doc_title", "header_path", "text", "kind")


def normalize_ws(text: str) -> str:
    """Collapse all whitespace runs to single spaces and strip the ends."""
    return " ".join(text.split())


@dataclass
class SourceEntry:
    """One line of the source manifest."""

    url: str
    kind: str = KIND_REGULAR
    title_hint: str | None = None

    def __post_init__(self):
        if not self.url or not self.url.strip():
            raise ValueError("source entry url must be non-empty")
        if "://" not in self.url:
            raise ValueError(f"source entry url is not absolute: {self.url!r}")
        if self.kind not in VALID_KINDS:
            raise ValueError(f"unknown source kind {self.kind!r} for {self.url}")


@dataclass
class DocumentRecord:
    """A fetched page, prior to splitting."""

    url: str
    title: str
    kind: str
    body_html: str
    fetched_at: datetime

    def __post_init__(self):
        if not self.body_html:
            raise ValueError(f"document has empty body: {self.url}")
        if not self.title:
            self.title = self.url


@dataclass(frozen=True)
class Chunk:
    """The retrieval granule: one header-delimited slice of a document."""

    chunk_id: str
    doc_url: str
    doc_title: str
    header_path: tuple[str, ...]
    text: str
    kind: str = KIND_REGULAR

    def __post_init__(self):
        if not normalize_ws(self.text):
            raise ValueError(f"chunk text empty after normalization ({self.doc_url})")


def chunk_id_for(doc_url: str, header_path: Iterable[str], text: str) -> str:
    """Deterministic chunk id: content hash of url + header path + text."""
    h = hashlib.sha256()
    h.update(doc_url.encode("utf-8"))
    h.update(b"\x00")
    for part in header_path:
        h.update(part.encode("utf-8"))
        h.update(b"\x1f")
    h.update(b"\x00")
    h.update(text.encode("utf-8"))
    return h.hexdigest()[:16]


def make_chunk(doc_url: str, doc_title: str, header_path: Iterable[str], text: str,
               kind: str = KIND_REGULAR) -> Chunk:
    path = tuple(header_path)
    text = normalize_ws(text)
    return Chunk(
        chunk_id=chunk_id_for(doc_url, path, text),
        doc_url=doc_url,
        doc_title=doc_title,
        header_path=path,
        text=text,
        kind=kind,
    )


def chunk_to_json(chunk: Chunk) -> str:
    record = {
        "chunk_id": chunk.chunk_id,
        "doc_url": chunk.doc_url,
        "doc_title": chunk.doc_title,
        "header_path": list(chunk.header_path),
        "text": chunk.text,
        "kind": chunk.kind,
    }
    assert tuple(record) == _CHUNK_KEYS
    return json.dumps(record, ensure_ascii=False, separators=(", ", ": "))


def chunk_from_json(line: str) -> Chunk:
    obj = json.loads(line)
    return Chunk(
        chunk_id=obj["chunk_id"],
        doc_url=obj["doc_url"],
        doc_title=obj["doc_title"],
        header_path=tuple(obj["header_path"]),
        text=obj["text"],
        kind=obj.get("kind", KIND_REGULAR),
    )


def write_kb(chunks: Iterable[Chunk], out_path: str | Path) -> int:
    """Write chunks atomically (temp file + rename). Returns the line count."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    fd, tmp_name = tempfile.mkstemp(dir=out_path.parent, prefix=".kb-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            for chunk in chunks:
                fh.write(chunk_to_json(chunk))
                fh.write("\n")
                count += 1
        os.replace(tmp_name, out_path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise
    return count


def read_kb(path: str | Path) -> list[Chunk]:
    chunks = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                chunks.append(chunk_from_json(line))
    return chunks


def read_manifest(path: str | Path) -> list[SourceEntry]:
    """Parse the JSONL source manifest."""
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                entries.append(SourceEntry(
                    url=obj["url"],
                    kind=obj.get("kind", KIND_REGULAR),
                    title_hint=obj.get("title_hint"),
                ))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad manifest line: {exc}") from exc
    return entries


@dataclass
class IngestReport:
    """Accounting for one build_kb run; failures are never silently dropped."""

    pages: int = 0
    chunks: int = 0
    failures: list[tuple[str, str]] = field(default_factory=list)
    duplicates_skipped: int = 0
