"""Knowledge-base construction: fetch, split, deduplicate, write.

Fetching runs with bounded parallelism; splitting and the KB write are
single-threaded and follow manifest order, so reruns over identical content
produce byte-identical KB files.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import httpx

from .exceptions import AprBotError, FetchError, IngestError
from .fetch import fetch_document
from .kb import Chunk, IngestReport, SourceEntry, write_kb
from .splitter import DEFAULT_LEVELS, DEFAULT_MIN_CHARS, split_by_headers

logger = logging.getLogger(__name__)

DEFAULT_PARALLELISM = 4


def build_kb(entries: list[SourceEntry], out_path: str | Path,
             levels: frozenset[int] = DEFAULT_LEVELS,
             min_chars: int = DEFAULT_MIN_CHARS,
             http_timeout: float = 20.0,
             parallelism: int = DEFAULT_PARALLELISM,
             client: httpx.Client | None = None) -> IngestReport:
    """Fetch every manifest entry, split the successes, write the KB file.

    Per-page failures are recorded in the report and skipped; zero successful
    pages is a hard IngestError. Duplicate chunk_ids (identical url + header
    path + text) are written once.
    """
    if not entries:
        raise IngestError("source manifest is empty")

    report = IngestReport()
    docs: list = [None] * len(entries)

    def fetch_one(i: int):
        return i, fetch_document(entries[i], http_timeout=http_timeout, client=client)

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        futures = [pool.submit(fetch_one, i) for i in range(len(entries))]
        for future in futures:
            try:
                i, doc = future.result()
                docs[i] = doc
            except FetchError as exc:
                logger.warning("skipping %s: %s", exc.url, exc.reason)
                report.failures.append((exc.url, exc.reason))

    chunks: list[Chunk] = []
    seen_ids: set[str] = set()
    for entry, doc in zip(entries, docs):
        if doc is None:
            continue
        try:
            doc_chunks = split_by_headers(doc, levels=levels, min_chars=min_chars)
        except AprBotError as exc:
            logger.warning("skipping %s: %s", entry.url, exc)
            report.failures.append((entry.url, str(exc)))
            continue
        report.pages += 1
        for chunk in doc_chunks:
            if chunk.chunk_id in seen_ids:
                report.duplicates_skipped += 1
                continue
            seen_ids.add(chunk.chunk_id)
            chunks.append(chunk)

    if report.pages == 0:
        raise IngestError(
            f"no documents could be ingested ({len(report.failures)} failures)")

    report.chunks = write_kb(chunks, out_path)
    logger.info("wrote %d chunks from %d pages to %s (%d failures)",
                report.chunks, report.pages, out_path, len(report.failures))
    return report
