"""Batch retrieval evaluation against a relevance-judgment file.

The default mode runs each judged query through embed+search only, so metric
numbers are hermetic and deterministic; --with-understanding switches on the
full rewrite/decompose pipeline. A separate entry point dumps generative
baseline outputs (plus their extractive contexts) for human annotation.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import metrics
from .engine import answer, rag_baseline
from .exceptions import EvaluationError
from .index import PassageIndex, RetrievalConfig
from .llm import Gateway
from .sessions import ChatSession
from .understanding import StandaloneQuery, decompose

logger = logging.getLogger(__name__)

GRANULARITY_CHUNK = "chunk"
GRANULARITY_DOC = "doc"


@dataclass(frozen=True)
class JudgedQuery:
    query_id: str
    query_text: str
    relevant: frozenset[str]
    granularity: str = GRANULARITY_CHUNK

    def __post_init__(self):
        if not self.query_text.strip():
            raise ValueError(f"judged query {self.query_id!r} has empty text")
        if not self.relevant:
            raise ValueError(f"judged query {self.query_id!r} has no relevant ids")
        if self.granularity not in (GRANULARITY_CHUNK, GRANULARITY_DOC):
            raise ValueError(f"unknown granularity {self.granularity!r}")


@dataclass
class PerQueryRow:
    query_id: str
    retrieved: list[str]
    precision: float
    recall: float
    f1: float
    average_precision: float


@dataclass
class MetricsReport:
    k: int
    precision_at_k: float
    recall_at_k: float
    f1_at_k: float
    map_at_k: float
    per_query: list[PerQueryRow]


def read_judgments(path: str | Path) -> list[JudgedQuery]:
    judged = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                judged.append(JudgedQuery(
                    query_id=obj["query_id"],
                    query_text=obj["query_text"],
                    relevant=frozenset(obj["relevant"]),
                    granularity=obj.get("granularity", GRANULARITY_CHUNK),
                ))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise EvaluationError(f"{path}:{lineno}: bad judgment line: {exc}") from exc
    if not judged:
        raise EvaluationError(f"judgment file {path} contains no queries")
    return judged


def _check_judgments(index: PassageIndex, judged: list[JudgedQuery]) -> None:
    known_chunks = {c.chunk_id for c in index.chunks}
    known_docs = {c.doc_url for c in index.chunks}
    offenders = []
    for query in judged:
        known = known_chunks if query.granularity == GRANULARITY_CHUNK else known_docs
        for rid in sorted(query.relevant - known):
            offenders.append(f"{query.query_id}: {rid}")
    if offenders:
        raise EvaluationError(
            "judgments reference ids absent from the KB:\n  " + "\n  ".join(offenders))


def _retrieve(index: PassageIndex, query: JudgedQuery, cfg: RetrievalConfig,
              gateway: Gateway | None) -> list[str]:
    if gateway is None:
        passages = index.search_text(query.query_text, cfg)
        ranked = [(p.score, p.chunk) for p in passages]
    else:
        # full-pipeline mode: merge per-sub-query results, best score wins
        sub_queries = decompose(StandaloneQuery(text=query.query_text), gateway)
        best: dict[str, tuple[float, object]] = {}
        for sub_query in sub_queries:
            for p in index.search_text(sub_query.text, cfg):
                cid = p.chunk.chunk_id
                if cid not in best or p.score > best[cid][0]:
                    best[cid] = (p.score, p.chunk)
        ranked = sorted(best.values(), key=lambda item: (-item[0], item[1].chunk_id))
        ranked = ranked[:cfg.top_k]

    if query.granularity == GRANULARITY_DOC:
        ids, seen = [], set()
        for _, chunk in ranked:
            if chunk.doc_url not in seen:
                seen.add(chunk.doc_url)
                ids.append(chunk.doc_url)
        return ids
    return [chunk.chunk_id for _, chunk in ranked]


def evaluate(index: PassageIndex, judged: list[JudgedQuery], cfg: RetrievalConfig,
             gateway: Gateway | None = None, parallelism: int = 4) -> MetricsReport:
    """Score every judged query and macro-average. Raises EvaluationError when
    judgments reference unknown ids or the list is empty."""
    if not judged:
        raise EvaluationError("no judged queries to evaluate")
    _check_judgments(index, judged)
    k = cfg.top_k

    def score_one(query: JudgedQuery) -> PerQueryRow:
        retrieved = _retrieve(index, query, cfg, gateway)
        p = metrics.precision_at_k(retrieved, query.relevant, k)
        r = metrics.recall_at_k(retrieved, query.relevant, k)
        return PerQueryRow(
            query_id=query.query_id,
            retrieved=retrieved,
            precision=p,
            recall=r,
            f1=metrics.f1_score(p, r),
            average_precision=metrics.average_precision_at_k(retrieved, query.relevant, k),
        )

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        rows = list(pool.map(score_one, judged))
    rows.sort(key=lambda row: row.query_id)

    macro_p = metrics.mean([row.precision for row in rows])
    macro_r = metrics.mean([row.recall for row in rows])
    return MetricsReport(
        k=k,
        precision_at_k=macro_p,
        recall_at_k=macro_r,
        f1_at_k=metrics.f1_score(macro_p, macro_r),
        map_at_k=metrics.mean([row.average_precision for row in rows]),
        per_query=rows,
    )


def report_to_json(report: MetricsReport) -> str:
    payload = {
        "k": report.k,
        "num_queries": len(report.per_query),
        "precision_at_k": report.precision_at_k,
        "recall_at_k": report.recall_at_k,
        "f1_at_k": report.f1_at_k,
        "map_at_k": report.map_at_k,
        "per_query": [
            {
                "query_id": row.query_id,
                "retrieved": row.retrieved,
                "precision": row.precision,
                "recall": row.recall,
                "f1": row.f1,
                "average_precision": row.average_precision,
            }
            for row in report.per_query
        ],
    }
    return json.dumps(payload, ensure_ascii=False, indent=2)


def report_to_text(report: MetricsReport) -> str:
    k = report.k
    header = f"{'':<10}{f'P@{k}':>8}{f'R@{k}':>8}{f'F1@{k}':>8}{f'MAP@{k}':>8}"
    row = (f"{'chatbot':<10}{report.precision_at_k:>8.2f}{report.recall_at_k:>8.2f}"
           f"{report.f1_at_k:>8.2f}{report.map_at_k:>8.2f}")
    return header + "\n" + row


def dump_rag_baseline(index: PassageIndex, judged: list[JudgedQuery],
                      gateway: Gateway, cfg: RetrievalConfig,
                      out_dir: str | Path) -> list[Path]:
    """Produce baseline outputs (plus extractive context) for annotation.

    One JSON file per judged query. The synthesized text is experimental by
    construction and never flows back into the chat path.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for query in judged:
        session = ChatSession(session_id=f"eval-{query.query_id}")
        ans = answer(session, query.query_text, index, gateway, cfg)
        record: dict = {
            "query_id": query.query_id,
            "query_text": query.query_text,
            "standalone_query": ans.standalone_query.text,
            "sections": [
                {
                    "sub_query": section.sub_query.text,
                    "passages": [
                        {"chunk_id": p.chunk.chunk_id, "score": p.score,
                         "text": p.chunk.text}
                        for p in section.passages
                    ],
                }
                for section in ans.sections
            ],
        }
        if ans.sections:
            baseline = rag_baseline(ans, gateway)
            record["baseline"] = {
                "synthesized_text": baseline.synthesized_text,
                "context_chunk_ids": baseline.context_chunk_ids,
                "flagged_experimental": baseline.flagged_experimental,
            }
        else:
            record["baseline"] = None
        path = out_dir / f"{query.query_id}.json"
        path.write_text(json.dumps(record, ensure_ascii=False, indent=2),
                        encoding="utf-8")
        written.append(path)
    return written
