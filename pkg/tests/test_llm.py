import json

import httpx
import pytest

from aprbot.exceptions import GatewayError
from aprbot.llm import (
    CompletionRequest,
    Gateway,
    RemoteChatProvider,
    StubCompletionProvider,
    TransientCompletionError,
    _split_clauses,
    complete,
)
from aprbot.prompts import DECOMPOSE, DECONTEXTUALIZE, RAG_SYNTHESIS, render_template

# ----------------------------------------------------------------- requests


def test_request_defaults_pin_generation_settings():
    request = CompletionRequest(prompt="p")
    assert request.temperature == 0.0
    assert request.max_tokens == 300


def test_request_validation():
    with pytest.raises(ValueError):
        CompletionRequest(prompt="")
    with pytest.raises(ValueError):
        CompletionRequest(prompt="p", temperature=-0.1)
    with pytest.raises(ValueError):
        CompletionRequest(prompt="p", max_tokens=0)


# ------------------------------------------------------------ remote client


def chat_provider(handler, **kwargs) -> RemoteChatProvider:
    return RemoteChatProvider(
        base_url="https://llm.example/v1", api_key="k", model="m-1",
        client=httpx.Client(transport=httpx.MockTransport(handler)), **kwargs)


def test_remote_chat_sends_single_user_message():
    captured = {}

    def respond(request: httpx.Request) -> httpx.Response:
        captured.update(json.loads(request.content))
        return httpx.Response(200, json={
            "choices": [{"message": {"role": "assistant", "content": "out"}}]})

    provider = chat_provider(respond)
    got = provider.generate(CompletionRequest(prompt="the prompt"))
    assert got == "out"
    assert captured["messages"] == [{"role": "user", "content": "the prompt"}]
    assert captured["temperature"] == 0.0
    assert captured["max_tokens"] == 300
    assert captured["model"] == "m-1"


def test_remote_chat_transient_statuses():
    for status in (429, 500, 503):
        provider = chat_provider(lambda r, s=status: httpx.Response(s, json={}))
        with pytest.raises(TransientCompletionError):
            provider.generate(CompletionRequest(prompt="p"))


def test_remote_chat_client_error_is_fatal():
    provider = chat_provider(lambda r: httpx.Response(401, text="no auth"))
    with pytest.raises(GatewayError):
        provider.generate(CompletionRequest(prompt="p"))


def test_remote_chat_malformed_response_is_fatal():
    provider = chat_provider(lambda r: httpx.Response(200, json={"choices": []}))
    with pytest.raises(GatewayError):
        provider.generate(CompletionRequest(prompt="p"))


def test_remote_chat_transport_error_is_transient():
    def boom(request):
        raise httpx.ConnectError("refused")

    with pytest.raises(TransientCompletionError):
        chat_provider(boom).generate(CompletionRequest(prompt="p"))


# ------------------------------------------------------------ retry wrapper


class FlakyProvider(StubCompletionProvider):
    def __init__(self, fail_times: int):
        super().__init__()
        self.fail_times = fail_times
        self.calls = 0

    def generate(self, request):
        self.calls += 1
        if self.calls <= self.fail_times:
            raise TransientCompletionError("boom")
        return "recovered"


def test_complete_retries_until_success(monkeypatch):
    monkeypatch.setattr("time.sleep", lambda s: None)
    provider = FlakyProvider(fail_times=2)
    result = complete(CompletionRequest(prompt="p"), provider)
    assert result.text == "recovered"
    assert provider.calls == 3
    assert result.provider_name == "stub"


def test_complete_exhausts_retries(monkeypatch):
    monkeypatch.setattr("time.sleep", lambda s: None)
    provider = FlakyProvider(fail_times=99)
    with pytest.raises(GatewayError, match="stub"):
        complete(CompletionRequest(prompt="p"), provider, max_retries=3)
    assert provider.calls == 4  # initial + 3 retries


def test_complete_respects_deadline(monkeypatch):
    monkeypatch.setattr("time.sleep", lambda s: None)
    provider = FlakyProvider(fail_times=99)
    with pytest.raises(GatewayError):
        # first backoff step (0.5 s) would already blow the budget
        complete(CompletionRequest(prompt="p"), provider, deadline=0.3, max_retries=9)
    assert provider.calls == 1


def test_gateway_passes_its_model():
    class Echo(StubCompletionProvider):
        def generate(self, request):
            return request.model

    assert Gateway(Echo(), model="gw-model").complete_prompt("p") == "gw-model"


# -------------------------------------------------------------- stub provider


def test_stub_rewrite_resolves_pronoun_to_most_recent_noun():
    prompt = render_template(
        DECONTEXTUALIZE,
        chat_history="User: My flight was fine but the airline lost my bag.\n"
                     "Assistant: You can file a report about the bag.",
        question="When will they deliver it?")
    out = StubCompletionProvider().generate(CompletionRequest(prompt=prompt))
    assert out == "When will the bag deliver the bag?"  # crude but deterministic


def test_stub_rewrite_preserves_sentence_capitalization():
    prompt = render_template(
        DECONTEXTUALIZE,
        chat_history="User: The claim is pending.",
        question="It takes how long?")
    out = StubCompletionProvider().generate(CompletionRequest(prompt=prompt))
    assert out == "The claim takes how long?"


def test_stub_rewrite_without_known_noun_keeps_question():
    prompt = render_template(
        DECONTEXTUALIZE,
        chat_history="User: hello there.\nAssistant: hi.",
        question="What are my rights when it rains?")
    out = StubCompletionProvider().generate(CompletionRequest(prompt=prompt))
    assert out == "What are my rights when it rains?"


def test_stub_decompose_emits_numbered_clauses():
    prompt = render_template(
        DECOMPOSE,
        query="My flight was cancelled and they lost my bag. What are my compensation options?")
    out = StubCompletionProvider().generate(CompletionRequest(prompt=prompt))
    assert out.splitlines() == [
        "1. My flight was cancelled",
        "2. they lost my bag",
        "3. What are my compensation options?",
    ]


def test_stub_decompose_caps_at_three():
    prompt = render_template(DECOMPOSE, query="One. Two. Three. Four. Five.")
    out = StubCompletionProvider().generate(CompletionRequest(prompt=prompt))
    assert len(out.splitlines()) == 3


def test_stub_synthesis_concatenates_passages():
    prompt = render_template(RAG_SYNTHESIS, query="q", passages="P1\n\nP2")
    out = StubCompletionProvider().generate(CompletionRequest(prompt=prompt))
    assert out == "Based on the retrieved passages:\n\nP1\n\nP2"


def test_stub_unrecognized_prompt_yields_empty():
    out = StubCompletionProvider().generate(CompletionRequest(prompt="free-form text"))
    assert out == ""


def test_split_clauses():
    assert _split_clauses("A was lost and B was found. What next?") == [
        "A was lost", "B was found", "What next?"]
    assert _split_clauses("Standard handling.") == ["Standard handling"]
    # \band\b must not fire inside words
    assert _split_clauses("The standard applies.") == ["The standard applies"]
    assert _split_clauses("  ") == []
