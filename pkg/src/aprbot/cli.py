"""Command-line entry points: serve, ingest, ask, eval.

Exit codes: 0 success, 1 configuration/usage error, 2 runtime failure.
"""

from __future__ import annotations

import logging
import sys

import click

from .config import ServiceConfig, build_providers
from .engine import NO_RESULTS_MESSAGE, answer
from .evaluation import dump_rag_baseline, evaluate, read_judgments, report_to_json, report_to_text
from .exceptions import AprBotError, ConfigError
from .index import build_index
from .ingest import build_kb
from .kb import read_kb, read_manifest
from .sessions import ChatSession
from .splitter import parse_levels

logger = logging.getLogger(__name__)


@click.group()
@click.option("-v", "--verbose", count=True, help="-v for info, -vv for debug.")
def cli(verbose: int):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")


def _load_index(cfg: ServiceConfig, vector_cache: str | None):
    embedder, gateway = build_providers(cfg)
    chunks = read_kb(cfg.require_kb())
    index = build_index(chunks, embedder, cache_path=vector_cache)
    return index, embedder, gateway


@cli.command()
@click.option("--bind", default=None, help="host:port (default APR_BIND or 127.0.0.1:8080).")
@click.option("--kb", "kb_path", default=None, type=click.Path(), help="KB JSONL path.")
@click.option("--vector-cache", default=None, type=click.Path(), help="Embedding cache JSONL.")
@click.option("--shared-secret", default=None, help="Require X-APR-Secret on API calls.")
@click.option("--session-snapshot", default=None, type=click.Path(),
              help="Persist sessions across restarts to this file.")
def serve(bind, kb_path, vector_cache, shared_secret, session_snapshot):
    """Run the HTTP service."""
    import uvicorn

    from .server import create_app

    cfg = ServiceConfig.from_env(kb_path=kb_path, bind=bind)
    index, embedder, gateway = _load_index(cfg, vector_cache)
    app = create_app(cfg, index=index, gateway=gateway, embedder=embedder,
                     snapshot_path=session_snapshot, shared_secret=shared_secret)
    click.echo(f"serving on http://{cfg.bind_host}:{cfg.bind_port} "
               f"({len(index.chunks)} chunks)", err=True)
    uvicorn.run(app, host=cfg.bind_host, port=cfg.bind_port, log_level="warning")


@cli.command()
@click.option("--manifest", required=True, type=click.Path(exists=True),
              help="JSONL of {url, title, kind} source entries.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="KB output path.")
@click.option("--levels", default="h1,h2,h3", show_default=True,
              help="Header levels that open a new chunk.")
@click.option("--min-chars", default=40, show_default=True,
              help="Chunks shorter than this merge into a neighbor.")
@click.option("--timeout", default=20.0, show_default=True, help="Per-fetch timeout, seconds.")
@click.option("--parallelism", default=4, show_default=True, help="Concurrent fetches.")
def ingest(manifest, out_path, levels, min_chars, timeout, parallelism):
    """Fetch the manifest sources and write the chunked KB."""
    entries = read_manifest(manifest)
    report = build_kb(entries, out_path, levels=parse_levels(levels),
                      min_chars=min_chars, http_timeout=timeout,
                      parallelism=parallelism)
    for url, reason in report.failures:
        click.echo(f"failed: {url}: {reason}", err=True)
    click.echo(f"{report.pages} pages -> {report.chunks} chunks "
               f"({len(report.failures)} failures, "
               f"{report.duplicates_skipped} duplicates skipped) -> {out_path}")


@cli.command()
@click.argument("question")
@click.option("--kb", "kb_path", default=None, type=click.Path(), help="KB JSONL path.")
@click.option("--vector-cache", default=None, type=click.Path(), help="Embedding cache JSONL.")
@click.option("--k", "top_k", default=None, type=int, help="Passages per sub-query.")
@click.option("--threshold", default=None, type=float, help="Minimum similarity score.")
def ask(question, kb_path, vector_cache, top_k, threshold):
    """Answer one question and print the sections as text."""
    cfg = ServiceConfig.from_env(kb_path=kb_path, top_k=top_k, score_threshold=threshold)
    index, _, gateway = _load_index(cfg, vector_cache)
    session = ChatSession(session_id="cli")
    ans = answer(session, question, index, gateway, cfg.retrieval)
    if ans.no_results:
        click.echo(NO_RESULTS_MESSAGE)
        return
    for section in ans.sections:
        click.echo(f"## {section.sub_query.text}")
        for p in section.passages:
            click.echo(f"  [{p.score:.4f}] {p.chunk.doc_title}"
                       f" ({' > '.join(p.chunk.header_path) or 'top'})")
            click.echo(f"    {p.chunk.text}")
            click.echo(f"    source: {p.chunk.doc_url}")
        click.echo()


@cli.command(name="eval")
@click.option("--kb", "kb_path", default=None, type=click.Path(), help="KB JSONL path.")
@click.option("--judgments", required=True, type=click.Path(exists=True),
              help="JSONL relevance judgments.")
@click.option("--k", "top_k", default=None, type=int, help="Cutoff for all metrics.")
@click.option("--threshold", default=None, type=float, help="Minimum similarity score.")
@click.option("--with-understanding", is_flag=True,
              help="Run rewrite+decompose before retrieval.")
@click.option("--rag-baseline", is_flag=True,
              help="Also dump synthesized baseline outputs for annotation.")
@click.option("--out-dir", default=None, type=click.Path(),
              help="Directory for --rag-baseline dumps.")
@click.option("--json-out", default=None, type=click.Path(),
              help="Write the full JSON report here.")
@click.option("--vector-cache", default=None, type=click.Path(), help="Embedding cache JSONL.")
def eval_cmd(kb_path, judgments, top_k, threshold, with_understanding,
             rag_baseline, out_dir, json_out, vector_cache):
    """Score retrieval against a judgment file and print the metrics table."""
    if rag_baseline and not out_dir:
        raise ConfigError("--rag-baseline requires --out-dir")
    cfg = ServiceConfig.from_env(kb_path=kb_path, top_k=top_k, score_threshold=threshold)
    index, _, gateway = _load_index(cfg, vector_cache)
    judged = read_judgments(judgments)
    report = evaluate(index, judged, cfg.retrieval,
                      gateway=gateway if with_understanding else None)
    click.echo(report_to_text(report))
    if json_out:
        with open(json_out, "w", encoding="utf-8") as fh:
            fh.write(report_to_json(report) + "\n")
    if rag_baseline:
        written = dump_rag_baseline(index, judged, gateway, cfg.retrieval, out_dir)
        click.echo(f"wrote {len(written)} baseline files to {out_dir}", err=True)


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except (click.UsageError, ConfigError) as exc:
        click.echo(f"error: {exc.format_message() if isinstance(exc, click.UsageError) else exc}",
                   err=True)
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 2
    except AprBotError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
