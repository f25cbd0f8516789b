"""Paraphrase generation through an OpenAI-compatible chat-completions API.

Backends expose ``complete(request) -> (text, metadata)``.  ``HTTPBackend``
talks to a live endpoint; ``StubBackend`` answers from a lookup table or
echoes the source, so nothing in the test suite needs the network.
Results can be memoized in a directory of JSON files keyed by a digest of
(template, source, model, temperature).
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Mapping, Protocol

import httpx

log = logging.getLogger(__name__)

PLACEHOLDER = "{text}"
DEFAULT_TEMPLATE = "Please paraphrase the following text: {text}"
DEFAULT_ENDPOINT = "https://api.openai.com/v1"
DEFAULT_MODEL = "gpt-4"
REFERENCE_TEMPERATURE = 0.0
SUSPICIOUS_TEMPERATURE = 1.0


class ProviderError(RuntimeError):
    pass


class AuthError(ProviderError):
    pass


class RateLimitError(ProviderError):
    pass


class TransientError(ProviderError):
    """Server or transport failure that persisted through every retry."""


class EmptyCompletionError(ProviderError):
    pass


class InputTooLongError(ProviderError):
    pass


@dataclass(frozen=True)
class ParaphraseRequest:
    source_text: str
    temperature: float = REFERENCE_TEMPERATURE
    model: str = DEFAULT_MODEL
    prompt_template: str = DEFAULT_TEMPLATE

    def __post_init__(self):
        if self.prompt_template.count(PLACEHOLDER) != 1:
            raise ValueError(f"prompt template needs exactly one {PLACEHOLDER} placeholder")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")

    @property
    def prompt(self) -> str:
        return self.prompt_template.replace(PLACEHOLDER, self.source_text)

    @property
    def cache_key(self) -> str:
        blob = json.dumps(
            [self.prompt_template, self.source_text, self.model, float(self.temperature)],
            ensure_ascii=False,
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass
class ParaphraseResult:
    text: str
    provider_metadata: dict[str, Any]
    cache_key: str
    from_cache: bool = False


class Backend(Protocol):
    def complete(self, request: ParaphraseRequest) -> tuple[str, dict[str, Any]]: ...


@dataclass
class StubBackend:
    """Offline backend: answers from ``table`` or, with ``echo``, returns the source."""

    table: Mapping[str, str] = field(default_factory=dict)
    echo: bool = False
    calls: int = 0

    def complete(self, request: ParaphraseRequest) -> tuple[str, dict[str, Any]]:
        self.calls += 1
        if request.source_text in self.table:
            return self.table[request.source_text], {"backend": "stub"}
        if self.echo:
            return request.source_text, {"backend": "stub-echo"}
        raise ProviderError("stub backend has no entry for this source text")


class RateGate:
    """Serializes calls so that at most ``rpm`` start per minute."""

    def __init__(self, rpm: float | None, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        self.interval = 60.0 / rpm if rpm else 0.0
        self._lock = threading.Lock()
        self._next = 0.0
        self._clock = clock
        self._sleep = sleep

    def wait(self) -> None:
        if not self.interval:
            return
        with self._lock:
            now = self._clock()
            if now < self._next:
                self._sleep(self._next - now)
                now = self._next
            self._next = now + self.interval


def api_key_from_env() -> str | None:
    return os.environ.get("PROVKIT_API_KEY") or os.environ.get("OPENAI_API_KEY") or None


class HTTPBackend:
    """Chat-completions client with exponential-backoff retries.

    429 and 5xx responses and transport errors are retried up to
    ``max_attempts`` in total; 401/403 and over-length inputs fail at once.
    """

    def __init__(
        self,
        endpoint_url: str = DEFAULT_ENDPOINT,
        api_key: str | None = None,
        *,
        max_attempts: int = 3,
        backoff: float = 1.0,
        rpm_limit: float | None = None,
        timeout: float = 120.0,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        url = endpoint_url.rstrip("/")
        if not url.endswith("/chat/completions"):
            url += "/chat/completions"
        self.url = url
        self.api_key = api_key if api_key is not None else api_key_from_env()
        self.max_attempts = max(1, max_attempts)
        self.backoff = backoff
        self.gate = RateGate(rpm_limit, sleep=sleep)
        self._sleep = sleep
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def close(self) -> None:
        self._client.close()

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def complete(self, request: ParaphraseRequest) -> tuple[str, dict[str, Any]]:
        payload = {
            "model": request.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
        }
        last: ProviderError | None = None
        for attempt in range(self.max_attempts):
            if attempt:
                self._sleep(self.backoff * 2 ** (attempt - 1))
            self.gate.wait()
            started = time.perf_counter()
            try:
                resp = self._client.post(self.url, json=payload, headers=self._headers())
            except httpx.TransportError as exc:
                last = TransientError(f"transport error: {exc}")
                log.warning("attempt %d/%d failed: %s", attempt + 1, self.max_attempts, exc)
                continue
            latency = time.perf_counter() - started

            if resp.status_code in (401, 403):
                raise AuthError(f"authentication failed ({resp.status_code})")
            if resp.status_code == 413 or (resp.status_code == 400 and "context_length" in resp.text):
                raise InputTooLongError(f"input rejected as too long ({resp.status_code})")
            if resp.status_code == 429:
                last = RateLimitError("rate limit exhausted")
                log.warning("attempt %d/%d rate limited", attempt + 1, self.max_attempts)
                continue
            if resp.status_code >= 500:
                last = TransientError(f"server error {resp.status_code}")
                log.warning("attempt %d/%d server error %d", attempt + 1, self.max_attempts, resp.status_code)
                continue
            if resp.status_code >= 400:
                raise ProviderError(f"request failed ({resp.status_code}): {resp.text[:200]}")

            try:
                body = resp.json()
                text = body["choices"][0]["message"]["content"] or ""
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise ProviderError(f"malformed completion response: {exc}") from exc
            if not text.strip():
                raise EmptyCompletionError("provider returned an empty completion")
            meta = {
                "model": body.get("model", request.model),
                "usage": body.get("usage", {}),
                "latency_s": round(latency, 3),
            }
            return text, meta
        assert last is not None
        raise last


class DiskCache:
    """One JSON file per cache key; writes go through a temp file and rename."""

    def __init__(self, directory: str | Path):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.dir / f"{key}.json"

    def get(self, key: str) -> ParaphraseResult | None:
        path = self._path(key)
        if not path.exists():
            return None
        try:
            entry = json.loads(path.read_text(encoding="utf-8"))
            return ParaphraseResult(entry["text"], entry.get("metadata", {}), key, from_cache=True)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            log.warning("ignoring corrupt cache entry %s: %s", path, exc)
            return None

    def put(self, request: ParaphraseRequest, result: ParaphraseResult) -> None:
        entry = {
            "request": asdict(request),
            "text": result.text,
            "metadata": result.provider_metadata,
            "created_at": datetime.now(timezone.utc).isoformat(),
        }
        fd, tmp = tempfile.mkstemp(dir=self.dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(entry, fh, ensure_ascii=False)
            os.replace(tmp, self._path(result.cache_key))
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise


def paraphrase(
    request: ParaphraseRequest,
    backend: Backend,
    cache: DiskCache | None = None,
) -> ParaphraseResult:
    if not request.source_text.strip():
        raise ValueError("source text is empty")
    key = request.cache_key
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit
    text, meta = backend.complete(request)
    if not text.strip():
        raise EmptyCompletionError("backend returned an empty completion")
    result = ParaphraseResult(text, meta, key)
    if cache is not None:
        cache.put(request, result)
    return result


@dataclass
class LLMSettings:
    endpoint_url: str = DEFAULT_ENDPOINT
    model: str = DEFAULT_MODEL
    temperature: float = REFERENCE_TEMPERATURE
    rpm_limit: float | None = None
    cache_dir: str | None = None
    max_attempts: int = 3
    prompt_template: str = DEFAULT_TEMPLATE

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "LLMSettings":
        known = {f: data[f] for f in cls.__dataclass_fields__ if f in data}
        return cls(**known)

    def backend(self, **kwargs) -> HTTPBackend:
        return HTTPBackend(self.endpoint_url, max_attempts=self.max_attempts,
                           rpm_limit=self.rpm_limit, **kwargs)

    def cache(self) -> DiskCache | None:
        return DiskCache(self.cache_dir) if self.cache_dir else None
