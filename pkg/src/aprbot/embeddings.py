"""Embedding providers and the embed() entry point.

Two providers implement the same contract (name / model / dim / embed_batch):

  * RemoteEmbeddingProvider talks to an OpenAI-compatible /embeddings endpoint
    with bounded-backoff retries.
  * HashedBowEmbedder is the deterministic offline stub: lowercase, tokenize
    on non-alphanumerics, hash each token into one of 256 buckets, count,
    L2-normalize. It makes the whole pipeline testable without a network.

All vectors are float64 regardless of what a provider returns.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
import time
from abc import ABC, abstractmethod
from pathlib import Path

import httpx
import numpy as np

from .exceptions import ProviderError

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class EmbeddingProvider(ABC):
    """Contract shared by the remote client and the offline stub."""

    model: str = ""

    @abstractmethod
    def name(self) -> str: ...

    @abstractmethod
    def dim(self) -> int: ...

    @abstractmethod
    def embed_batch(self, texts: list[str]) -> list[np.ndarray]: ...


class HashedBowEmbedder(EmbeddingProvider):
    """Deterministic hashed bag-of-words embedder (dim 256).

    Tokens are hashed with blake2b, not Python's salted hash(), so vectors are
    identical across processes. A text with no alphanumeric tokens maps to a
    reserved bucket; every vector therefore has norm 1.
    """

    DIM = 256
    model = "hashed-bow"

    _empty_bucket = 0

    def name(self) -> str:
        return "stub-hashed-bow"

    def dim(self) -> int:
        return self.DIM

    @staticmethod
    def _bucket(token: str) -> int:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big") % HashedBowEmbedder.DIM

    def embed_one(self, text: str) -> np.ndarray:
        vec = np.zeros(self.DIM, dtype=np.float64)
        tokens = _TOKEN_RE.findall(text.lower())
        if not tokens:
            vec[self._empty_bucket] = 1.0
            return vec
        for token in tokens:
            vec[self._bucket(token)] += 1.0
        return vec / np.linalg.norm(vec)

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        return [self.embed_one(t) for t in texts]


class RemoteEmbeddingProvider(EmbeddingProvider):
    """OpenAI-compatible embeddings client: POST {base_url}/embeddings."""

    def __init__(self, base_url: str, api_key: str, model: str,
                 timeout: float = 30.0, max_retries: int = 3,
                 client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.max_retries = max_retries
        self._dim: int | None = None
        self._client = client or httpx.Client(
            timeout=timeout,
            headers={"Authorization": f"Bearer {api_key}"},
        )

    def name(self) -> str:
        return "openai-compat"

    def dim(self) -> int:
        if self._dim is None:
            self.embed_batch(["dimension probe"])
        return self._dim

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        payload = {"model": self.model, "input": texts}
        data = self._post_with_retries(payload)
        try:
            rows = sorted(data["data"], key=lambda item: item["index"])
            if len(rows) != len(texts):
                raise ProviderError(
                    f"embeddings endpoint returned {len(rows)} vectors for {len(texts)} inputs")
            vectors = [np.asarray(row["embedding"], dtype=np.float64) for row in rows]
        except (KeyError, TypeError) as exc:
            raise ProviderError(f"malformed embeddings response: {exc}") from exc
        if self._dim is None and vectors:
            self._dim = vectors[0].shape[0]
        return vectors

    def _post_with_retries(self, payload: dict) -> dict:
        url = f"{self.base_url}/embeddings"
        delay = 0.5
        last_error = None
        for attempt in range(self.max_retries + 1):
            try:
                response = self._client.post(url, json=payload)
                if response.status_code == 429 or response.status_code >= 500:
                    last_error = f"HTTP {response.status_code}"
                else:
                    response.raise_for_status()
                    return response.json()
            except httpx.TransportError as exc:
                last_error = f"transport failure: {exc}"
            except httpx.HTTPStatusError as exc:
                raise ProviderError(f"embeddings request rejected: {exc}") from exc
            if attempt < self.max_retries:
                time.sleep(delay)
                delay *= 2
        raise ProviderError(f"embeddings request failed after retries: {last_error}")


def embed(texts: list[str], provider: EmbeddingProvider,
          batch_size: int = 128) -> list[np.ndarray]:
    """Embed texts in order, batching remote calls.

    Raises ValueError on any text that is empty after trimming, ProviderError
    when the provider fails, and enforces a single dimension across outputs.
    """
    for i, text in enumerate(texts):
        if not text or not text.strip():
            raise ValueError(f"text at position {i} is empty")
    vectors: list[np.ndarray] = []
    for start in range(0, len(texts), batch_size):
        vectors.extend(provider.embed_batch(texts[start:start + batch_size]))
    dims = {v.shape[0] for v in vectors}
    if len(dims) > 1:
        raise ProviderError(f"provider returned mixed dimensions: {sorted(dims)}")
    return vectors


class VectorCache:
    """JSON Lines vector cache keyed by provider name, model, and chunk id.

    Avoids re-embedding an unchanged KB on service restart. Misses are
    appended on put(); the file is append-only.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._vectors: dict[str, np.ndarray] = {}
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    obj = json.loads(line)
                    self._vectors[obj["key"]] = np.asarray(obj["vector"], dtype=np.float64)

    @staticmethod
    def key_for(provider: EmbeddingProvider, chunk_id: str) -> str:
        return f"{provider.name()}:{provider.model}:{chunk_id}"

    def get(self, key: str) -> np.ndarray | None:
        return self._vectors.get(key)

    def put(self, key: str, vector: np.ndarray) -> None:
        self._vectors[key] = vector
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps({"key": key, "vector": vector.tolist()}))
            fh.write("\n")

    def __len__(self) -> int:
        return len(self._vectors)
