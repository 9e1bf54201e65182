"""Retrieval-grounded QA for air passenger rights.

The pipeline rewrites a dialogue turn into a standalone query, splits it
into at most three sub-queries, retrieves high-scoring KB passages per
sub-query, and returns those passages verbatim with their sources. Answer
text is always a stored passage, never model output.
"""

from .config import ServiceConfig, build_providers
from .embeddings import EmbeddingProvider, HashedBowEmbedder, RemoteEmbeddingProvider, embed
from .engine import NO_RESULTS_MESSAGE, Answer, AnswerSection, answer, rag_baseline
from .exceptions import (
    AprBotError,
    ConfigError,
    EmptyDocumentError,
    EvaluationError,
    FetchError,
    GatewayError,
    IngestError,
    PassageIndexError,
    ProviderError,
)
from .index import PassageIndex, RetrievalConfig, ScoredPassage, build_index
from .ingest import build_kb
from .kb import Chunk, SourceEntry, chunk_id_for, read_kb, read_manifest, write_kb
from .llm import Gateway, RemoteChatProvider, StubCompletionProvider
from .sessions import ChatSession, SessionStore
from .splitter import split_by_headers
from .understanding import StandaloneQuery, SubQuery, decompose, decontextualize

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "AnswerSection",
    "AprBotError",
    "ChatSession",
    "Chunk",
    "ConfigError",
    "EmbeddingProvider",
    "EmptyDocumentError",
    "EvaluationError",
    "FetchError",
    "Gateway",
    "GatewayError",
    "HashedBowEmbedder",
    "IngestError",
    "NO_RESULTS_MESSAGE",
    "PassageIndex",
    "PassageIndexError",
    "ProviderError",
    "RemoteChatProvider",
    "RemoteEmbeddingProvider",
    "RetrievalConfig",
    "ScoredPassage",
    "ServiceConfig",
    "SessionStore",
    "SourceEntry",
    "StandaloneQuery",
    "StubCompletionProvider",
    "SubQuery",
    "answer",
    "build_index",
    "build_kb",
    "build_providers",
    "chunk_id_for",
    "decompose",
    "decontextualize",
    "embed",
    "rag_baseline",
    "read_kb",
    "read_manifest",
    "split_by_headers",
    "write_kb",
    "__version__",
]
