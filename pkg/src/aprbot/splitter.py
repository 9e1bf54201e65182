"""Header-aware HTML splitting.

Documents are cut into chunks at h1/h2/h3 boundaries (configurable): the text
of a splitting header becomes metadata (the chunk's header_path), not chunk
body text. Step-by-step guides are exempt and come back as a single chunk of
the whole visible body, headers included.

Text model: visible text nodes are stripped and joined with single spaces, so
inline tag boundaries count as token boundaries. script/style/noscript/head/
nav/footer subtrees are dropped before any text is collected.
"""

from __future__ import annotations

import html as html_mod
import re
from html.parser import HTMLParser

from .exceptions import EmptyDocumentError
from .kb import KIND_GUIDE, Chunk, DocumentRecord, make_chunk, normalize_ws

DEFAULT_LEVELS = frozenset({1, 2, 3})
DEFAULT_MIN_CHARS = 40

_SKIP_SUBTREES = {"script", "style", "noscript", "template", "head", "nav", "footer"}
_HEADER_TAGS = {f"h{i}": i for i in range(1, 7)}


def parse_levels(spec: str) -> frozenset[int]:
    """Parse a CLI-style header-level list such as "h1,h2,h3"."""
    levels = set()
    for part in spec.split(","):
        part = part.strip().lower()
        if not part:
            continue
        m = re.fullmatch(r"h([1-6])", part)
        if not m:
            raise ValueError(f"bad header level {part!r} (expected h1..h6)")
        levels.add(int(m.group(1)))
    if not levels:
        raise ValueError("no header levels given")
    return frozenset(levels)


class _BodyWalker(HTMLParser):
    """Linear pass over a document emitting ("text", s) and ("header", level, s).

    Headers at levels outside `split_levels` are not captured; their text flows
    through as ordinary text. Unclosed skip tags swallow the rest of the
    document, matching browser behavior for e.g. a dangling <script>.
    """

    def __init__(self, split_levels: frozenset[int]):
        super().__init__(convert_charrefs=True)
        self.split_levels = split_levels
        self.events: list[tuple] = []
        self._skip_depth = 0
        self._header_level = 0
        self._header_parts: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_SUBTREES:
            self._skip_depth += 1
            return
        if self._skip_depth:
            return
        level = _HEADER_TAGS.get(tag)
        if level is not None and level in self.split_levels:
            self._end_header()  # lenient: a new header implicitly closes the last
            self._header_level = level
            self._header_parts = []

    def handle_endtag(self, tag):
        if tag in _SKIP_SUBTREES:
            self._skip_depth = max(0, self._skip_depth - 1)
            return
        if self._skip_depth:
            return
        if self._header_level and tag in _HEADER_TAGS:
            self._end_header()

    def handle_data(self, data):
        if self._skip_depth:
            return
        if not data.strip():
            return
        if self._header_level:
            self._header_parts.append(data)
        else:
            self.events.append(("text", data))

    def close(self):
        super().close()
        self._end_header()

    def _end_header(self):
        if self._header_level:
            text = normalize_ws(" ".join(self._header_parts))
            self.events.append(("header", self._header_level, text))
            self._header_level = 0
            self._header_parts = []


def _walk(body_html: str, split_levels: frozenset[int]) -> list[tuple]:
    walker = _BodyWalker(split_levels)
    walker.feed(body_html)
    walker.close()
    return walker.events


def extract_body_text(body_html: str, exclude_levels: frozenset[int] | None = None) -> str:
    """All visible body text in document order, whitespace-normalized.

    With exclude_levels set, text inside headers at those levels is dropped
    (it ends up in chunk header_paths instead of chunk text).
    """
    levels = exclude_levels or frozenset()
    parts = []
    for event in _walk(body_html, levels):
        if event[0] == "text":
            parts.append(event[1])
        elif not exclude_levels and event[2]:
            parts.append(event[2])
    return normalize_ws(" ".join(parts))


def extract_title(raw_html: str) -> str | None:
    m = re.search(r"<title[^>]*>(.*?)</title>", raw_html, re.IGNORECASE | re.DOTALL)
    if not m:
        return None
    title = normalize_ws(html_mod.unescape(m.group(1)))
    return title or None


def split_by_headers(doc: DocumentRecord, levels: frozenset[int] = DEFAULT_LEVELS,
                     min_chars: int = 0) -> list[Chunk]:
    """Split one document into chunks.

    A new chunk starts at each header whose level is in `levels`; text before
    the first header forms a chunk with an empty header_path. Chunks shorter
    than `min_chars` normalized characters are merged into the following chunk
    (or the preceding one at document end). Guides bypass splitting entirely.

    Raises EmptyDocumentError when the body has no visible text.
    """
    if doc.kind == KIND_GUIDE:
        text = extract_body_text(doc.body_html)
        if not text:
            raise EmptyDocumentError(doc.url)
        return [make_chunk(doc.url, doc.title, (), text, kind=doc.kind)]

    raw: list[tuple[tuple[str, ...], str]] = []  # (header_path, text) in order
    stack: list[tuple[int, str]] = []  # enclosing headers; only mutated at header events
    pieces: list[str] = []

    def flush():
        text = normalize_ws(" ".join(pieces))
        pieces.clear()
        if text:
            raw.append((tuple(t for _, t in stack), text))

    for event in _walk(doc.body_html, levels):
        if event[0] == "text":
            pieces.append(event[1])
        else:
            _, level, title = event
            flush()
            while stack and stack[-1][0] >= level:
                stack.pop()
            if title:
                stack.append((level, title))
    flush()

    if not raw:
        raise EmptyDocumentError(doc.url)
    merged = _merge_short(raw, min_chars)
    return [make_chunk(doc.url, doc.title, path, text, kind=doc.kind)
            for path, text in merged]


def _merge_short(raw: list[tuple[tuple[str, ...], str]], min_chars: int):
    if min_chars <= 0:
        return raw
    merged: list[tuple[tuple[str, ...], str]] = []
    pending: list[str] = []
    for path, text in raw:
        if pending:
            text = " ".join(pending) + " " + text
            pending = []
        if len(text) < min_chars:
            pending = [text]
        else:
            merged.append((path, text))
    if pending:
        if merged:
            path, text = merged[-1]
            merged[-1] = (path, text + " " + pending[0])
        else:
            # whole document shorter than the threshold: keep it as one chunk
            merged.append((raw[0][0], pending[0]))
    return merged
