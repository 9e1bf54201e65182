"""HTTP retrieval of source pages."""

from __future__ import annotations

from datetime import datetime, timezone

import httpx

from .exceptions import FetchError
from .kb import DocumentRecord, SourceEntry
from .splitter import extract_title

USER_AGENT = "aprbot-ingest/0.1"


def fetch_document(entry: SourceEntry, http_timeout: float = 20.0,
                   client: httpx.Client | None = None) -> DocumentRecord:
    """Fetch one source page. Raises FetchError naming the url on any failure.

    Accepts an injected httpx.Client (tests use one with a mock transport).
    """
    own_client = client is None
    if own_client:
        client = httpx.Client(timeout=http_timeout, follow_redirects=True,
                              headers={"User-Agent": USER_AGENT})
    try:
        try:
            response = client.get(entry.url)
        except httpx.HTTPError as exc:
            raise FetchError(entry.url, f"network failure: {exc}") from exc
        if not (200 <= response.status_code < 300):
            raise FetchError(entry.url, f"HTTP {response.status_code}")
        content_type = response.headers.get("content-type", "")
        if content_type and "html" not in content_type.lower():
            raise FetchError(entry.url, f"unsupported content type {content_type!r}")
        body = response.text
        if not body.strip():
            raise FetchError(entry.url, "empty response body")
    finally:
        if own_client:
            client.close()

    title = extract_title(body) or entry.title_hint or entry.url
    return DocumentRecord(
        url=entry.url,
        title=title,
        kind=entry.kind,
        body_html=body,
        fetched_at=datetime.now(timezone.utc),
    )
