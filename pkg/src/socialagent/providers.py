"""Model backends behind one interface: a deterministic scripted mock for
tests and a generic JSON-over-HTTP chat client for live models."""

from __future__ import annotations

import base64
import hashlib
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import requests

from .core import ContentItem, ContentKind, SamplingConfig, Transcript, UnitRole, digest
from .divergence import EmbeddingVector
from .errors import (
    AuthenticationError,
    EmptyTextError,
    ImageUnsupportedError,
    InvariantError,
    MockScriptExhaustedError,
    MockScriptMismatchError,
    ProviderError,
    TransportError,
)

log = logging.getLogger(__name__)

DEFAULT_EMBED_DIMENSION = 8
RETRY_ATTEMPTS = 3
RETRY_BASE_DELAY = 0.5


class Backend(Enum):
    MOCK = "mock"
    HTTP_CHAT = "http_chat"


@dataclass(frozen=True)
class MockScriptEntry:
    """One queued mock response; the optional matcher asserts that its
    substring occurs in the request consuming this entry."""

    response: str
    matcher: str | None = None


@dataclass(frozen=True)
class MockScript:
    entries: tuple[MockScriptEntry, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))

    @classmethod
    def of(cls, *responses: str) -> MockScript:
        return cls(tuple(MockScriptEntry(response=r) for r in responses))


@dataclass(frozen=True)
class ProviderConfig:
    """Everything needed to talk to one backend, including sampling
    parameters and (for the mock) the scripted responses."""

    backend: Backend
    model_name: str
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    supports_images: bool = False
    endpoint: str | None = None
    api_key_env: str | None = None
    embed_endpoint: str | None = None
    embed_model: str | None = None
    script: MockScript | None = None
    embed_dimension: int = DEFAULT_EMBED_DIMENSION
    embed_seed: int = 0
    embedding_overrides: dict[str, tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.model_name:
            raise InvariantError("model_name must be non-empty")
        if self.backend is Backend.HTTP_CHAT:
            if not self.endpoint or not self.api_key_env:
                raise InvariantError("http backend requires endpoint and api_key_env")
        if self.embed_dimension < 2:
            raise InvariantError("embed_dimension must be >= 2")


@dataclass(frozen=True)
class ProviderRequest:
    system_role: str
    messages: tuple[ContentItem, ...]
    sampling: SamplingConfig = field(default_factory=SamplingConfig)

    def __post_init__(self) -> None:
        object.__setattr__(self, "messages", tuple(self.messages))
        if not self.messages:
            raise InvariantError("request must contain at least one message")

    def flattened(self) -> str:
        """All request text in order (system role first), for digests and
        mock matchers; image items appear as placeholders."""
        parts = [self.system_role]
        for item in self.messages:
            if item.kind is ContentKind.TEXT:
                parts.append(item.text or "")
            else:
                parts.append(f"[image:{item.image.location}]")
        return "\n".join(parts)


@dataclass(frozen=True)
class ProviderResponse:
    text: str
    usage: dict[str, int] | None = None
    latency: float = 0.0


def _check_images(config: ProviderConfig, request: ProviderRequest) -> None:
    if config.supports_images:
        return
    for item in request.messages:
        if item.kind is ContentKind.IMAGE_REF:
            raise ImageUnsupportedError(
                f"backend {config.model_name!r} does not accept image content"
            )


def _record(
    transcript: Transcript | None,
    unit: UnitRole | None,
    operation: str,
    request_text: str,
    response_text: str,
) -> None:
    # digests at normal verbosity; full bodies only when debugging
    log.info("%s request=%s response=%s", operation, digest(request_text), digest(response_text))
    log.debug("%s request body:\n%s\nresponse body:\n%s", operation, request_text, response_text)
    if transcript is None:
        return
    if unit is None:
        raise InvariantError("transcript recording requires a unit role")
    transcript.record(unit, operation, request_text, response_text)


def hash_embedding(text: str, dimension: int, seed: int) -> EmbeddingVector:
    """Deterministic pseudo-embedding: each component is derived from a
    seeded digest of the text, mapped into [-1, 1)."""
    components = []
    for i in range(dimension):
        raw = hashlib.sha256(f"{seed}:{i}:{text}".encode("utf-8")).digest()
        value = int.from_bytes(raw[:8], "big") / 2**64
        components.append(value * 2.0 - 1.0)
    return EmbeddingVector(tuple(components))


class MockProvider:
    """Fully deterministic backend: completions come from an ordered script,
    embeddings from a seeded hash plus an override table."""

    def __init__(self, config: ProviderConfig) -> None:
        if config.backend is not Backend.MOCK:
            raise InvariantError("MockProvider requires a mock backend config")
        self.config = config
        self._entries = list((config.script or MockScript()).entries)
        self._cursor = 0
        self._lock = threading.Lock()
        self.call_log: list[tuple[ProviderRequest, str]] = []
        self.embed_log: list[str] = []

    def complete(
        self,
        request: ProviderRequest,
        *,
        transcript: Transcript | None = None,
        unit: UnitRole | None = None,
        operation: str = "complete",
    ) -> ProviderResponse:
        _check_images(self.config, request)
        flattened = request.flattened()
        with self._lock:
            if self._cursor >= len(self._entries):
                raise MockScriptExhaustedError(
                    f"mock script for {self.config.model_name!r} exhausted after "
                    f"{self._cursor} response(s)"
                )
            entry = self._entries[self._cursor]
            self._cursor += 1
            if entry.matcher is not None and entry.matcher not in flattened:
                raise MockScriptMismatchError(
                    f"scripted response {self._cursor} expected request to contain "
                    f"{entry.matcher!r}"
                )
            self.call_log.append((request, entry.response))
        _record(transcript, unit, operation, flattened, entry.response)
        return ProviderResponse(text=entry.response, usage=None, latency=0.0)

    def embed(
        self,
        text: str,
        *,
        transcript: Transcript | None = None,
        unit: UnitRole | None = None,
        operation: str = "embed",
    ) -> EmbeddingVector:
        if not text:
            raise EmptyTextError("cannot embed empty text")
        override = self.config.embedding_overrides.get(text)
        if override is not None:
            vector = EmbeddingVector(tuple(override))
        else:
            vector = hash_embedding(text, self.config.embed_dimension, self.config.embed_seed)
        with self._lock:
            self.embed_log.append(text)
        _record(transcript, unit, operation, text, repr(vector.components))
        return vector

    @property
    def remaining(self) -> int:
        return len(self._entries) - self._cursor


class HttpChatProvider:
    """Generic chat-completion client: one JSON POST per call, base64 image
    parts inlined at the wire boundary, bounded retries on transport errors."""

    def __init__(self, config: ProviderConfig, session: requests.Session | None = None) -> None:
        if config.backend is not Backend.HTTP_CHAT:
            raise InvariantError("HttpChatProvider requires an http backend config")
        self.config = config
        self._session = session or requests.Session()

    def _api_key(self) -> str:
        key = os.environ.get(self.config.api_key_env or "")
        if not key:
            raise AuthenticationError(
                f"environment variable {self.config.api_key_env!r} is not set"
            )
        return key

    def _message_parts(self, request: ProviderRequest) -> list[dict]:
        parts: list[dict] = []
        for item in request.messages:
            if item.kind is ContentKind.TEXT:
                parts.append({"type": "text", "text": item.text})
            else:
                encoded = base64.b64encode(Path(item.image.location).read_bytes()).decode()
                parts.append(
                    {
                        "type": "image",
                        "media_type": item.image.media_type,
                        "data": encoded,
                    }
                )
        return parts

    def _post_with_retries(
        self,
        url: str,
        body: dict,
        key: str,
        *,
        transcript: Transcript | None,
        unit: UnitRole | None,
        operation: str,
        request_text: str,
    ) -> dict:
        last_error: Exception | None = None
        for attempt in range(1, RETRY_ATTEMPTS + 1):
            try:
                reply = self._session.post(
                    url,
                    json=body,
                    headers={"Authorization": f"Bearer {key}"},
                    timeout=60,
                )
            except requests.RequestException as exc:
                last_error = exc
                _record(transcript, unit, f"{operation}.attempt", request_text, f"transport error: {exc}")
                if attempt < RETRY_ATTEMPTS:
                    time.sleep(RETRY_BASE_DELAY * 2 ** (attempt - 1))
                continue
            if reply.status_code in (401, 403):
                raise AuthenticationError(f"backend rejected credentials ({reply.status_code})")
            if 400 <= reply.status_code < 500:
                raise ProviderError(f"backend error {reply.status_code}: {reply.text[:200]}")
            if reply.status_code >= 500:
                last_error = ProviderError(f"server error {reply.status_code}")
                _record(transcript, unit, f"{operation}.attempt", request_text, f"server error {reply.status_code}")
                if attempt < RETRY_ATTEMPTS:
                    time.sleep(RETRY_BASE_DELAY * 2 ** (attempt - 1))
                continue
            return reply.json()
        raise TransportError(str(last_error), attempts=RETRY_ATTEMPTS)

    def complete(
        self,
        request: ProviderRequest,
        *,
        transcript: Transcript | None = None,
        unit: UnitRole | None = None,
        operation: str = "complete",
    ) -> ProviderResponse:
        _check_images(self.config, request)
        key = self._api_key()
        body = {
            "model": self.config.model_name,
            "messages": [
                {"role": "system", "content": request.system_role},
                {"role": "user", "content": self._message_parts(request)},
            ],
            "temperature": request.sampling.temperature,
            "top_p": request.sampling.top_p,
        }
        flattened = request.flattened()
        started = time.monotonic()
        payload = self._post_with_retries(
            self.config.endpoint,
            body,
            key,
            transcript=transcript,
            unit=unit,
            operation=operation,
            request_text=flattened,
        )
        elapsed = time.monotonic() - started
        try:
            choice = payload["choices"][0]
            text = choice.get("message", {}).get("content", choice.get("text", ""))
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"unrecognized completion payload: {exc}") from exc
        if not isinstance(text, str):
            raise ProviderError("completion content is not text")
        usage = payload.get("usage")
        _record(transcript, unit, operation, flattened, text)
        return ProviderResponse(text=text, usage=usage, latency=elapsed)

    def embed(
        self,
        text: str,
        *,
        transcript: Transcript | None = None,
        unit: UnitRole | None = None,
        operation: str = "embed",
    ) -> EmbeddingVector:
        if not text:
            raise EmptyTextError("cannot embed empty text")
        key = self._api_key()
        url = self.config.embed_endpoint or self.config.endpoint
        body = {"model": self.config.embed_model or self.config.model_name, "input": text}
        payload = self._post_with_retries(
            url,
            body,
            key,
            transcript=transcript,
            unit=unit,
            operation=operation,
            request_text=text,
        )
        try:
            components = payload["data"][0]["embedding"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"unrecognized embedding payload: {exc}") from exc
        vector = EmbeddingVector(tuple(float(c) for c in components))
        _record(transcript, unit, operation, text, repr(vector.components))
        return vector


Provider = MockProvider | HttpChatProvider


def build_provider(config: ProviderConfig) -> Provider:
    """Instantiate a fresh backend for one run; mock state never leaks
    across runs."""
    if config.backend is Backend.MOCK:
        return MockProvider(config)
    return HttpChatProvider(config)


from . import canonical  # noqa: E402  (registration only)

canonical.register(MockScriptEntry, MockScript, ProviderConfig, ProviderRequest, ProviderResponse)
