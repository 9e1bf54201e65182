"""Exception types shared across the package."""


class AprBotError(Exception):
    """Base class for all package errors."""


class ConfigError(AprBotError):
    """Invalid or incomplete service/CLI configuration."""


class FetchError(AprBotError):
    """A source page could not be fetched or is not usable HTML."""

    def __init__(self, url: str, reason: str):
        self.url = url
        self.reason = reason
        super().__init__(f"{url}: {reason}")


class EmptyDocumentError(AprBotError):
    """A fetched document contains no visible body text."""


class IngestError(AprBotError):
    """Knowledge-base construction failed as a whole."""


class ProviderError(AprBotError):
    """An embedding or completion provider failed after retries."""


class GatewayError(ProviderError):
    """The completion gateway could not produce output (deadline or API error)."""


class PassageIndexError(AprBotError):
    """Passage index construction or query errors (duplicate ids, dim mismatch)."""


class EvaluationError(AprBotError):
    """Relevance judgments are unusable (empty file, unknown chunk ids)."""
