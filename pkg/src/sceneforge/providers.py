"""Chat and embedding provider clients with deterministic offline mocks.

The wire format is the common chat/embeddings JSON-over-HTTP convention, so
any compatible hosted or local service works; endpoint and model names are
pure configuration. Network failures and 5xx responses retry with exponential
backoff; every error carries the attempt count. The mock provider answers
from a fixtures file keyed by a hash of the canonical request, which keeps
the entire pipeline runnable with zero network access, and the
record/replay wrappers turn one live session into a reusable fixture set.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import requests

from .embed_index import embed_local, normalize
from .errors import StageError

log = logging.getLogger(__name__)


class ProviderError(StageError):
    stage = "provider"

    def __init__(self, message: str, attempts: int = 1):
        super().__init__(message)
        self.attempts = attempts


class ProviderTimeoutError(ProviderError, TimeoutError):
    """Endpoint unreachable or too slow, after all retries."""


class HttpError(ProviderError):
    def __init__(self, status: int, message: str, attempts: int = 1):
        super().__init__(f"HTTP {status}: {message}", attempts)
        self.status = status


class MalformedResponseError(ProviderError):
    """Reply arrived but does not follow the expected schema."""


@dataclass
class ProviderConfig:
    endpoint: str = "https://api.openai.com/v1"
    chat_model: str = "gpt-4"
    embed_model: str = "text-embedding-3-small"
    api_key_env: str = "SCENEFORGE_API_KEY"
    timeout_s: float = 30.0
    max_retries: int = 2
    backoff_s: float = 0.5

    def __post_init__(self) -> None:
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


def request_hash(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# transport signature: (url, payload, headers, timeout_s) -> (status_code, parsed_json)
Transport = Callable[[str, dict, dict, float], tuple[int, dict]]


def _requests_transport(url: str, payload: dict, headers: dict, timeout_s: float) -> tuple[int, dict]:
    response = requests.post(url, json=payload, headers=headers, timeout=timeout_s)
    try:
        return response.status_code, response.json()
    except ValueError as exc:
        raise MalformedResponseError(f"non-JSON reply from {url}: {exc}") from exc


class HttpProvider:
    """Talks to a hosted chat/embeddings service."""

    def __init__(self, config: ProviderConfig, transport: Optional[Transport] = None):
        self.config = config
        self.transport = transport or _requests_transport

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, path: str, payload: dict) -> dict:
        url = self.config.endpoint.rstrip("/") + path
        attempts = self.config.max_retries + 1
        for attempt in range(attempts):
            if attempt:
                time.sleep(self.config.backoff_s * (2 ** (attempt - 1)))
            try:
                status, body = self.transport(url, payload, self._headers(), self.config.timeout_s)
            except (requests.Timeout, requests.ConnectionError, TimeoutError, ConnectionError) as exc:
                log.warning("attempt %d/%d against %s failed: %s", attempt + 1, attempts, url, exc)
                last_error = ProviderTimeoutError(f"{url} unreachable: {exc}", attempts=attempt + 1)
                continue
            if status >= 500:
                log.warning("attempt %d/%d: server error %d", attempt + 1, attempts, status)
                last_error = HttpError(status, "server error", attempts=attempt + 1)
                continue
            if status >= 400:
                raise HttpError(status, str(body), attempts=attempt + 1)
            return body
        raise last_error

    def chat(self, messages: Sequence[dict]) -> str:
        body = self._post("/chat/completions", {
            "model": self.config.chat_model,
            "messages": list(messages),
        })
        try:
            return body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError(f"chat reply missing choices: {exc}") from exc

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        body = self._post("/embeddings", {
            "model": self.config.embed_model,
            "input": list(texts),
        })
        try:
            data = sorted(body["data"], key=lambda item: item.get("index", 0))
            vectors = [normalize(item["embedding"]) for item in data]
        except (KeyError, TypeError) as exc:
            raise MalformedResponseError(f"embeddings reply malformed: {exc}") from exc
        if len(vectors) != len(texts):
            raise MalformedResponseError(
                f"asked for {len(texts)} embeddings, got {len(vectors)}"
            )
        return vectors


class MockProvider:
    """Offline provider: canned chat replies, local deterministic embeddings."""

    def __init__(self, fixtures: Optional[dict[str, str]] = None):
        self.fixtures = fixtures if fixtures is not None else load_bundled_fixtures()

    @classmethod
    def from_file(cls, path: str | Path) -> "MockProvider":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def chat(self, messages: Sequence[dict]) -> str:
        key = request_hash({"kind": "chat", "messages": list(messages)})
        try:
            return self.fixtures[key]
        except KeyError:
            raise MalformedResponseError(f"no chat fixture for request hash {key[:12]}...") from None

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [embed_local(text) for text in texts]


def load_bundled_fixtures() -> dict[str, str]:
    text = resources.files("sceneforge.data").joinpath("provider_fixtures.json").read_text("utf-8")
    return json.loads(text)


class RecordingProvider:
    """Wrap a live provider and persist every exchange into a directory."""

    def __init__(self, inner, directory: str | Path):
        self.inner = inner
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _store(self, kind: str, request: dict, response) -> None:
        key = request_hash({"kind": kind, **request})
        record = {"kind": kind, "request": request, "response": response}
        (self.directory / f"{key}.json").write_text(
            json.dumps(record, sort_keys=True, indent=1), encoding="utf-8"
        )

    def chat(self, messages: Sequence[dict]) -> str:
        reply = self.inner.chat(messages)
        self._store("chat", {"messages": list(messages)}, reply)
        return reply

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        vectors = self.inner.embed(texts)
        self._store("embed", {"texts": list(texts)}, [v.tolist() for v in vectors])
        return vectors


class ReplayProvider:
    """Answer exclusively from a recorded directory; unknown requests fail."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    def _load(self, kind: str, request: dict):
        key = request_hash({"kind": kind, **request})
        path = self.directory / f"{key}.json"
        if not path.exists():
            raise MalformedResponseError(f"no recorded exchange for request hash {key[:12]}...")
        return json.loads(path.read_text(encoding="utf-8"))["response"]

    def chat(self, messages: Sequence[dict]) -> str:
        return self._load("chat", {"messages": list(messages)})

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [normalize(values) for values in self._load("embed", {"texts": list(texts)})]
