"""In-memory passage index: cosine top-k search with a score threshold.

The index is an exhaustive linear scan over a dense float64 matrix — the
corpus is hundreds of chunks, so a scan is both the fastest practical option
and trivially verifiable. Results keep only scores STRICTLY greater than the
threshold, capped at top_k, ordered by score descending with ties broken by
ascending chunk_id. The index is immutable after construction and safe for
concurrent readers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .embeddings import EmbeddingProvider, VectorCache, embed
from .exceptions import PassageIndexError
from .kb import Chunk

DEFAULT_TOP_K = 5
DEFAULT_SCORE_THRESHOLD = 0.7


@dataclass(frozen=True)
class RetrievalConfig:
    top_k: int = DEFAULT_TOP_K
    score_threshold: float = DEFAULT_SCORE_THRESHOLD

    def __post_init__(self):
        if self.top_k < 1:
            raise ValueError(f"top_k must be >= 1, got {self.top_k}")
        if not -1.0 <= self.score_threshold <= 1.0:
            raise ValueError(
                f"score_threshold must be in [-1, 1], got {self.score_threshold}")


@dataclass(frozen=True)
class ScoredPassage:
    chunk: Chunk
    score: float


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two vectors; rejects dim mismatches and zero norms."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise PassageIndexError(f"dimension mismatch: {a.shape} vs {b.shape}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise PassageIndexError("cosine undefined for zero-norm vector")
    return float(np.dot(a, b) / (norm_a * norm_b))


class PassageIndex:
    """Immutable dense index over KB chunks."""

    def __init__(self, chunks: list[Chunk], vectors: list[np.ndarray],
                 provider: EmbeddingProvider):
        if not chunks:
            raise PassageIndexError("cannot build an index over zero chunks")
        if len(chunks) != len(vectors):
            raise PassageIndexError(
                f"{len(chunks)} chunks but {len(vectors)} vectors")
        seen: set[str] = set()
        for chunk in chunks:
            if chunk.chunk_id in seen:
                raise PassageIndexError(f"duplicate chunk_id {chunk.chunk_id!r}")
            seen.add(chunk.chunk_id)

        matrix = np.ascontiguousarray(np.vstack(vectors), dtype=np.float64)
        if not np.all(np.isfinite(matrix)):
            raise PassageIndexError("index vectors contain non-finite values")
        norms = np.sqrt(np.sum(matrix * matrix, axis=1))
        if np.any(norms == 0.0):
            bad = chunks[int(np.argmin(norms))].chunk_id
            raise PassageIndexError(f"zero-norm vector for chunk {bad!r}")

        self._chunks = tuple(chunks)
        self._matrix = matrix
        self._norms = norms
        self._by_id = {c.chunk_id: i for i, c in enumerate(chunks)}
        self._provider = provider
        self._dim = matrix.shape[1]
        kernels.warmup()

    def __len__(self) -> int:
        return len(self._chunks)

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def provider(self) -> EmbeddingProvider:
        return self._provider

    @property
    def chunks(self) -> tuple[Chunk, ...]:
        return self._chunks

    def get_chunk(self, chunk_id: str) -> Chunk | None:
        pos = self._by_id.get(chunk_id)
        return None if pos is None else self._chunks[pos]

    def search(self, query_vector: np.ndarray, cfg: RetrievalConfig) -> list[ScoredPassage]:
        """Top-k passages with cosine score strictly above the threshold."""
        query = np.ascontiguousarray(np.asarray(query_vector, dtype=np.float64))
        if query.ndim != 1 or query.shape[0] != self._dim:
            raise PassageIndexError(
                f"query dimension {query.shape} does not match index dim {self._dim}")
        query_norm = float(np.sqrt(np.dot(query, query)))
        if query_norm == 0.0:
            raise PassageIndexError("query vector has zero norm")

        scores = kernels.cosine_scores(self._matrix, self._norms, query, query_norm)
        above = [(float(scores[i]), self._chunks[i])
                 for i in np.flatnonzero(scores > cfg.score_threshold)]
        above.sort(key=lambda item: (-item[0], item[1].chunk_id))
        return [ScoredPassage(chunk=c, score=s) for s, c in above[:cfg.top_k]]

    def search_text(self, text: str, cfg: RetrievalConfig) -> list[ScoredPassage]:
        vector = embed([text], self._provider)[0]
        return self.search(vector, cfg)


def build_index(kb_chunks: list[Chunk], provider: EmbeddingProvider,
                cache_path: str | None = None) -> PassageIndex:
    """Embed every chunk (through the optional vector cache) and build the index."""
    if not kb_chunks:
        raise PassageIndexError("knowledge base has no chunks")
    cache = VectorCache(cache_path) if cache_path else None
    vectors: list[np.ndarray | None] = [None] * len(kb_chunks)
    missing: list[int] = []
    if cache is not None:
        for i, chunk in enumerate(kb_chunks):
            vectors[i] = cache.get(VectorCache.key_for(provider, chunk.chunk_id))
            if vectors[i] is None:
                missing.append(i)
    else:
        missing = list(range(len(kb_chunks)))

    if missing:
        fresh = embed([kb_chunks[i].text for i in missing], provider)
        for i, vector in zip(missing, fresh):
            vectors[i] = vector
            if cache is not None:
                cache.put(VectorCache.key_for(provider, kb_chunks[i].chunk_id), vector)

    return PassageIndex(list(kb_chunks), vectors, provider)
