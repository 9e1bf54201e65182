import json
from pathlib import Path

import httpx
import pytest

from aprbot import Gateway, HashedBowEmbedder, StubCompletionProvider, build_index
from aprbot.kb import read_kb

FIXTURES = Path(__file__).resolve().parent / "fixtures"

# ------------------------------------------------------------ shared fixtures


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def kb_chunks():
    return read_kb(FIXTURES / "kb_fixture.jsonl")


@pytest.fixture(scope="session")
def embedder():
    return HashedBowEmbedder()


@pytest.fixture(scope="session")
def fixture_index(kb_chunks, embedder):
    return build_index(kb_chunks, embedder)


@pytest.fixture()
def stub_gateway():
    return Gateway(StubCompletionProvider(), model="stub")


@pytest.fixture(scope="session")
def golden_payload():
    return json.loads((FIXTURES / "golden_answer.json").read_text(encoding="utf-8"))


def serve_fixture_html(request: httpx.Request) -> httpx.Response:
    """Transport handler mapping apr.example urls onto the fixture HTML files."""
    page = FIXTURES / "html" / (request.url.path.rsplit("/", 1)[-1] + ".html")
    if not page.exists():
        return httpx.Response(404, text="not found")
    return httpx.Response(200, content=page.read_bytes(),
                          headers={"content-type": "text/html; charset=utf-8"})


@pytest.fixture()
def fixture_http_client():
    with httpx.Client(transport=httpx.MockTransport(serve_fixture_html)) as client:
        yield client


# ------------------------------------------------- acceptance result summary

_ACCEPTANCE_RESULTS: dict[str, bool] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): labels a test as one acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    name = marker.args[0]
    if report.when == "call":
        _ACCEPTANCE_RESULTS[name] = report.passed
    elif report.failed:  # setup/teardown error counts as a failed criterion
        _ACCEPTANCE_RESULTS[name] = False


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in _ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
