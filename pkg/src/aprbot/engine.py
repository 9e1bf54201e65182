"""Answer assembly: the extractive pipeline and the quarantined RAG baseline.

One user input flows through rewrite -> decomposition -> per-sub-query
retrieval. Sub-queries that retrieve nothing above the threshold are pruned;
a chunk retrieved under several sub-queries stays only in the section where
it scores highest. Every passage in an Answer is a verbatim KB chunk — the
engine never synthesizes text on this path.

rag_baseline() exists for comparison experiments only and is reachable solely
through the evaluation CLI, never the chat API.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import prompts
from .embeddings import embed
from .index import PassageIndex, RetrievalConfig, ScoredPassage
from .llm import Gateway
from .sessions import ChatSession
from .understanding import StandaloneQuery, SubQuery, decompose, decontextualize

logger = logging.getLogger(__name__)

NO_RESULTS_MESSAGE = (
    "Sorry, I could not find passages relevant to your question in the "
    "knowledge base. Try rephrasing, or consult the source sites directly."
)


@dataclass
class AnswerSection:
    sub_query: SubQuery
    passages: list[ScoredPassage]


@dataclass
class Answer:
    sections: list[AnswerSection]
    standalone_query: StandaloneQuery
    no_results: bool


@dataclass
class RagBaselineAnswer:
    synthesized_text: str
    context_chunk_ids: list[str]
    flagged_experimental: bool = field(default=True)


def answer(session: ChatSession, user_input: str, index: PassageIndex,
           gateway: Gateway, cfg: RetrievalConfig) -> Answer:
    """Run the full pipeline for one user input and update the session.

    Gateway failures propagate (no partial answers are fabricated); on
    success the exchange is appended to the session: the raw user input plus
    the sub-query texts that were answered (or the no-results notice).
    """
    if not user_input or not user_input.strip():
        raise ValueError("user input must be non-empty")

    history = session.history()
    standalone = decontextualize(history, user_input, gateway)
    sub_queries = decompose(standalone, gateway)

    vectors = embed([q.text for q in sub_queries], index.provider)
    sections = []
    for sub_query, vector in zip(sub_queries, vectors):
        passages = index.search(vector, cfg)
        if passages:  # empty sub-queries are pruned from the answer
            sections.append(AnswerSection(sub_query=sub_query, passages=passages))

    sections = _dedup_across_sections(sections)
    result = Answer(
        sections=sections,
        standalone_query=standalone,
        no_results=not sections,
    )

    if result.no_results:
        assistant_summary = NO_RESULTS_MESSAGE
    else:
        assistant_summary = "\n".join(s.sub_query.text for s in sections)
    session.append_exchange(user_input.strip(), assistant_summary)
    return result


def _dedup_across_sections(sections: list[AnswerSection]) -> list[AnswerSection]:
    """Keep each chunk only in its best-scoring section (earliest on ties)."""
    best: dict[str, tuple[float, int]] = {}
    for i, section in enumerate(sections):
        for passage in section.passages:
            cid = passage.chunk.chunk_id
            if cid not in best or passage.score > best[cid][0]:
                best[cid] = (passage.score, i)
    deduped = []
    for i, section in enumerate(sections):
        kept = [p for p in section.passages if best[p.chunk.chunk_id][1] == i]
        if kept:
            deduped.append(AnswerSection(sub_query=section.sub_query, passages=kept))
    return deduped


def rag_baseline(answer_context: Answer, gateway: Gateway) -> RagBaselineAnswer:
    """Generative baseline over an already-retrieved context. Experimental only."""
    if not answer_context.sections:
        raise ValueError("RAG baseline needs an answer with at least one section")
    passages = []
    chunk_ids = []
    for section in answer_context.sections:
        for passage in section.passages:
            passages.append(passage.chunk.text)
            chunk_ids.append(passage.chunk.chunk_id)
    prompt = prompts.render_template(
        prompts.RAG_SYNTHESIS,
        query=answer_context.standalone_query.text,
        passages="\n\n".join(passages),
    )
    text = gateway.complete_prompt(prompt)
    return RagBaselineAnswer(
        synthesized_text=text,
        context_chunk_ids=chunk_ids,
        flagged_experimental=True,
    )
