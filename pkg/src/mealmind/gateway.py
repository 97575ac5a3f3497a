"""Uniform interface over text-generation backends.

Remote backends speak the common chat-completions JSON shape; a built-in
deterministic backend turns prompts into text with a pure function so the
whole pipeline runs offline and reproducibly. Credentials come from the
environment and never appear in logs, errors, or results.
"""

from __future__ import annotations

import os
import re
import threading
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import httpx

DETERMINISTIC_BACKEND_ID = "deterministic"
API_KEY_ENV = "MEALMIND_LLM_API_KEY"
BACKOFF_BASE_S = 0.25
MAX_CONCURRENT_REQUESTS = 4

PLAIN_PROMPT_RE = re.compile(
    r"^Convince me that '(?P<name>.*)' is better for me, given (?P<pairs>.*)$",
    re.DOTALL,
)
CONTRASTIVE_PROMPT_RE = re.compile(
    r"^Convince me that '(?P<a>.*)' is better for me than '(?P<b>.*)', "
    r"given for '(?P=a)' — (?P<pairs_a>.*); and for '(?P=b)' — (?P<pairs_b>.*)$",
    re.DOTALL,
)


class GatewayError(RuntimeError):
    """Backend failures: timeouts, bad responses, missing credentials."""


class BackendConfigError(ValueError):
    """Invalid or duplicate backend configuration."""


@dataclass(frozen=True)
class BackendConfig:
    backend_id: str
    kind: str = "remote_chat"  # remote_chat | deterministic
    endpoint_url: str | None = None
    model_name: str | None = None
    timeout_ms: int = 30_000
    max_retries: int = 2
    temperature: float = 0.7

    def __post_init__(self) -> None:
        if not self.backend_id:
            raise BackendConfigError("backend_id must be non-empty")
        if self.kind not in ("remote_chat", "deterministic"):
            raise BackendConfigError(f"unknown backend kind {self.kind!r}")
        if self.kind == "remote_chat" and not (self.endpoint_url and self.model_name):
            raise BackendConfigError(
                f"backend {self.backend_id!r}: remote_chat needs endpoint_url and model_name"
            )
        if self.timeout_ms < 1:
            raise BackendConfigError("timeout_ms must be at least 1")
        if self.max_retries < 0:
            raise BackendConfigError("max_retries must be non-negative")


def _split_pairs(blob: str) -> list[tuple[str, str]]:
    pairs = []
    for chunk in blob.split(", "):
        name, sep, value = chunk.partition(": ")
        if sep:
            pairs.append((name, value))
        else:
            pairs.append((chunk, ""))
    return pairs


def deterministic_generate(prompt: str) -> str:
    """Pure prompt-to-text function; total over all non-empty prompts."""
    contrastive = CONTRASTIVE_PROMPT_RE.match(prompt)
    if contrastive:
        a, b = contrastive.group("a"), contrastive.group("b")
        pairs_a = _split_pairs(contrastive.group("pairs_a"))
        pairs_b = _split_pairs(contrastive.group("pairs_b"))
        clauses = []
        for i in range(max(len(pairs_a), len(pairs_b))):
            if i < len(pairs_a) and i < len(pairs_b):
                clauses.append(
                    f"{pairs_a[i][0]} is {pairs_a[i][1]} while {b} has "
                    f"{pairs_b[i][0]} at {pairs_b[i][1]}"
                )
            elif i < len(pairs_a):
                clauses.append(f"{pairs_a[i][0]} is {pairs_a[i][1]}")
            else:
                clauses.append(f"{b} has {pairs_b[i][0]} at {pairs_b[i][1]}")
        return f"{a} suits you better than {b}: " + "; ".join(clauses)

    plain = PLAIN_PROMPT_RE.match(prompt)
    if plain:
        pairs = _split_pairs(plain.group("pairs"))
        rendered = "; ".join(f"{name} is {value}" for name, value in pairs)
        return f"{plain.group('name')} suits you: {rendered}"

    # Unknown prompt shape: still answer something non-empty.
    return f"Recommendation rationale: {prompt.strip() or prompt}"


def _credential(backend_id: str) -> str:
    suffix = re.sub(r"[^A-Z0-9]", "_", backend_id.upper())
    for name in (f"{API_KEY_ENV}_{suffix}", API_KEY_ENV):
        value = os.environ.get(name)
        if value:
            return value
    raise GatewayError(
        f"missing credential: set {API_KEY_ENV} or {API_KEY_ENV}_{suffix}"
    )


def _scrub(text: str, secret: str | None) -> str:
    if secret:
        return text.replace(secret, "[redacted]")
    return text


class Gateway:
    """Shareable handle over all configured backends."""

    def __init__(
        self,
        backends: Sequence[BackendConfig] = (),
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self._backends: dict[str, BackendConfig] = {
            DETERMINISTIC_BACKEND_ID: BackendConfig(
                backend_id=DETERMINISTIC_BACKEND_ID, kind="deterministic"
            )
        }
        for config in backends:
            if config.backend_id in self._backends:
                raise BackendConfigError(f"duplicate backend id {config.backend_id!r}")
            self._backends[config.backend_id] = config
        self._sleep = sleep
        self._limits = {
            backend_id: threading.Semaphore(MAX_CONCURRENT_REQUESTS)
            for backend_id in self._backends
        }

    def backend_ids(self) -> list[str]:
        return list(self._backends)

    def list_backends(self) -> list[dict[str, str | None]]:
        return [
            {
                "backend_id": cfg.backend_id,
                "kind": cfg.kind,
                "model_name": cfg.model_name,
            }
            for cfg in self._backends.values()
        ]

    def get(self, backend_id: str) -> BackendConfig:
        try:
            return self._backends[backend_id]
        except KeyError:
            available = ", ".join(self._backends)
            raise GatewayError(
                f"unknown backend {backend_id!r}; available: {available}"
            ) from None

    def generate(self, backend_id: str, prompt: str, deadline_s: float | None = None) -> str:
        """Produce text for a prompt; retries timeouts/5xx with backoff."""
        if not prompt:
            raise GatewayError("prompt must be non-empty")
        backend = self.get(backend_id)
        with self._limits[backend.backend_id]:
            if backend.kind == "deterministic":
                return deterministic_generate(prompt)
            return self._generate_remote(backend, prompt, deadline_s)

    def _generate_remote(
        self, backend: BackendConfig, prompt: str, deadline_s: float | None
    ) -> str:
        secret = _credential(backend.backend_id)
        payload = {
            "model": backend.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": backend.temperature,
        }
        headers = {"Authorization": f"Bearer {secret}"}
        started = time.monotonic()

        def remaining() -> float | None:
            if deadline_s is None:
                return None
            return deadline_s - (time.monotonic() - started)

        last_error = "request not attempted"
        for attempt in range(backend.max_retries + 1):
            budget = remaining()
            if budget is not None and budget <= 0:
                raise GatewayError(f"backend {backend.backend_id!r}: deadline exhausted")
            timeout = backend.timeout_ms / 1000.0
            if budget is not None:
                timeout = min(timeout, budget)
            try:
                response = httpx.post(
                    backend.endpoint_url, json=payload, headers=headers, timeout=timeout
                )
            except httpx.TimeoutException:
                last_error = "timed out"
            except httpx.HTTPError as exc:
                last_error = f"transport error: {_scrub(str(exc), secret)}"
            else:
                if response.status_code // 100 == 2:
                    return self._extract_text(backend, response)
                excerpt = _scrub(response.text[:200], secret)
                if response.status_code // 100 == 4:
                    raise GatewayError(
                        f"backend {backend.backend_id!r}: HTTP {response.status_code}: {excerpt}"
                    )
                last_error = f"HTTP {response.status_code}: {excerpt}"
            if attempt < backend.max_retries:
                self._sleep(BACKOFF_BASE_S * (2**attempt))
        raise GatewayError(f"backend {backend.backend_id!r}: {last_error}")

    @staticmethod
    def _extract_text(backend: BackendConfig, response: httpx.Response) -> str:
        try:
            body = response.json()
            choice = body["choices"][0]
            text = choice.get("message", {}).get("content") or choice.get("text")
        except (ValueError, LookupError, AttributeError, TypeError):
            text = None
        if not text:
            raise GatewayError(
                f"backend {backend.backend_id!r}: malformed completion response"
            )
        return text
