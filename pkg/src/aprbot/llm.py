"""Chat-completion gateway.

Every outgoing request defaults to temperature 0 and a 300-token output cap.
The gateway retries transient transport errors with exponential backoff under
a total deadline and returns provider text verbatim — it never trims or
rewrites output. A rule-based stub provider keeps the whole pipeline usable
offline and deterministic under test.
"""

from __future__ import annotations

import logging
import re
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass

import httpx

from .exceptions import GatewayError

logger = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.0
DEFAULT_MAX_TOKENS = 300
DEFAULT_DEADLINE_SECS = 30.0
DEFAULT_MAX_RETRIES = 3
DEFAULT_MAX_INFLIGHT = 8


@dataclass
class CompletionRequest:
    prompt: str
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    model: str = ""

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.max_tokens < 1:
            raise ValueError(f"max_tokens must be >= 1, got {self.max_tokens}")


@dataclass
class CompletionResult:
    text: str
    provider_name: str
    latency: float


class TransientCompletionError(Exception):
    """Retryable provider failure (transport error, 429, 5xx)."""


class CompletionProvider(ABC):
    """Contract for completion backends; instances bound their own in-flight load."""

    def __init__(self, max_inflight: int = DEFAULT_MAX_INFLIGHT):
        self._slots = threading.BoundedSemaphore(max_inflight)

    @abstractmethod
    def name(self) -> str: ...

    @abstractmethod
    def generate(self, request: CompletionRequest) -> str: ...


class RemoteChatProvider(CompletionProvider):
    """OpenAI-compatible chat completions: POST {base_url}/chat/completions.

    The rendered prompt is sent as a single user-role message.
    """

    def __init__(self, base_url: str, api_key: str, model: str,
                 timeout: float = DEFAULT_DEADLINE_SECS,
                 client: httpx.Client | None = None,
                 max_inflight: int = DEFAULT_MAX_INFLIGHT):
        super().__init__(max_inflight)
        self.base_url = base_url.rstrip("/")
        self.model = model
        self._client = client or httpx.Client(
            timeout=timeout,
            headers={"Authorization": f"Bearer {api_key}"},
        )

    def name(self) -> str:
        return "openai-compat"

    def generate(self, request: CompletionRequest) -> str:
        payload = {
            "model": request.model or self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        try:
            response = self._client.post(f"{self.base_url}/chat/completions", json=payload)
        except httpx.TransportError as exc:
            raise TransientCompletionError(f"transport failure: {exc}") from exc
        if response.status_code == 429 or response.status_code >= 500:
            raise TransientCompletionError(f"HTTP {response.status_code}")
        if response.status_code >= 400:
            raise GatewayError(
                f"chat completion rejected (HTTP {response.status_code}): {response.text[:200]}")
        data = response.json()
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise GatewayError(f"malformed completion response: {exc}") from exc


# Nouns the stub resolves pronouns against, most recent mention wins.
_STUB_NOUNS = ("airline", "flight", "bag", "claim")
_PRONOUN_RE = re.compile(r"\b(they|them|it)\b", re.IGNORECASE)


class StubCompletionProvider(CompletionProvider):
    """Deterministic rule-based stand-in for a real model.

    Recognizes the three package prompt templates by their fixed lines:

      * rewrite prompts: returns the follow-up input with third-person
        pronouns replaced by the most recently mentioned noun from a small
        curated list (airline, flight, bag, claim);
      * decomposition prompts: splits the input on sentence boundaries and
        coordinating "and", emitting up to 3 numbered questions;
      * synthesis prompts: concatenates the passage block under a fixed
        header.

    Anything unrecognized yields an empty string so caller fallbacks engage.
    """

    def name(self) -> str:
        return "stub"

    def generate(self, request: CompletionRequest) -> str:
        prompt = request.prompt
        if "Chat History:" in prompt and "Follow Up Input:" in prompt:
            return self._rewrite(prompt)
        if "numbered list of questions" in prompt and "Input:" in prompt:
            return self._decompose(prompt)
        if "Passages:" in prompt and "Question:" in prompt:
            return self._synthesize(prompt)
        return ""

    @staticmethod
    def _slot(prompt: str, start_marker: str, end_marker: str) -> str:
        start = prompt.index(start_marker) + len(start_marker)
        end = prompt.rindex(end_marker)
        return prompt[start:end].strip()

    def _rewrite(self, prompt: str) -> str:
        history = self._slot(prompt, "Chat History:", "Follow Up Input:")
        question = self._slot(prompt, "Follow Up Input:", "Text:")
        noun = None
        best = -1
        lowered = history.lower()
        for candidate in _STUB_NOUNS:
            pos = lowered.rfind(candidate)
            if pos > best:
                best = pos
                noun = candidate
        if noun is None:
            return question

        def replace(match: re.Match) -> str:
            word = match.group(0)
            article = "The" if word[0].isupper() else "the"
            return f"{article} {noun}"

        return _PRONOUN_RE.sub(replace, question)

    def _decompose(self, prompt: str) -> str:
        query = self._slot(prompt, "Input:", "Questions:")
        clauses = _split_clauses(query)[:3]
        return "\n".join(f"{i}. {clause}" for i, clause in enumerate(clauses, start=1))

    def _synthesize(self, prompt: str) -> str:
        passages = self._slot(prompt, "Passages:", "Answer:")
        return "Based on the retrieved passages:\n\n" + passages


def _split_clauses(text: str) -> list[str]:
    clauses = []
    for sentence in re.split(r"(?<=[.?!])\s+", text.strip()):
        for part in re.split(r",?\s+\band\b\s+", sentence, flags=re.IGNORECASE):
            part = part.strip().strip(".,;!").strip()
            if part:
                clauses.append(part)
    return clauses


def complete(request: CompletionRequest, provider: CompletionProvider,
             deadline: float = DEFAULT_DEADLINE_SECS,
             max_retries: int = DEFAULT_MAX_RETRIES) -> CompletionResult:
    """Run one completion with retries on transient failures.

    `deadline` bounds the total wall-clock time across attempts and backoff.
    Non-retryable errors (auth, bad request) surface immediately.
    """
    started = time.monotonic()
    delay = 0.5
    last_error = "no attempts made"
    for attempt in range(max_retries + 1):
        try:
            with provider._slots:
                text = provider.generate(request)
            return CompletionResult(
                text=text,
                provider_name=provider.name(),
                latency=time.monotonic() - started,
            )
        except TransientCompletionError as exc:
            last_error = str(exc)
            logger.warning("completion attempt %d/%d failed: %s",
                           attempt + 1, max_retries + 1, last_error)
        elapsed = time.monotonic() - started
        if attempt >= max_retries or elapsed + delay > deadline:
            break
        time.sleep(delay)
        delay *= 2
    raise GatewayError(
        f"completion failed via provider {provider.name()!r}: {last_error}")


class Gateway:
    """Provider plus default request parameters, as one injectable object."""

    def __init__(self, provider: CompletionProvider, model: str = "",
                 deadline: float = DEFAULT_DEADLINE_SECS,
                 max_retries: int = DEFAULT_MAX_RETRIES):
        self.provider = provider
        self.model = model
        self.deadline = deadline
        self.max_retries = max_retries

    def name(self) -> str:
        return self.provider.name()

    def complete(self, request: CompletionRequest) -> CompletionResult:
        return complete(request, self.provider, deadline=self.deadline,
                        max_retries=self.max_retries)

    def complete_prompt(self, prompt: str) -> str:
        request = CompletionRequest(prompt=prompt, model=self.model)
        return self.complete(request).text
