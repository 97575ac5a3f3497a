"""Gateway: deterministic backend purity, wire fidelity, retries, credentials."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mealmind.gateway import (
    BackendConfig,
    BackendConfigError,
    Gateway,
    GatewayError,
    deterministic_generate,
)

PLAIN_PROMPT = (
    "Convince me that 'Spaghetti Carbonara' is better for me, "
    "given protein_g: 24, fiber_g: 3, rating: 4.6"
)


class _StubHandler(BaseHTTPRequestHandler):
    script: list[tuple[int, dict]] = []
    requests_seen: list[dict] = []

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length) or b"{}")
        type(self).requests_seen.append(
            {"body": body, "auth": self.headers.get("Authorization")}
        )
        status, payload = (
            self.script.pop(0) if self.script else (200, {"choices": []})
        )
        encoded = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(encoded)))
        self.end_headers()
        self.wfile.write(encoded)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    _StubHandler.script = []
    _StubHandler.requests_seen = []
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}/v1/chat/completions", _StubHandler
    server.shutdown()


def remote_backend(url: str, **overrides) -> BackendConfig:
    defaults = dict(
        backend_id="stub",
        kind="remote_chat",
        endpoint_url=url,
        model_name="test-model",
        timeout_ms=2000,
        max_retries=2,
    )
    defaults.update(overrides)
    return BackendConfig(**defaults)


class TestDeterministicBackend:
    def test_plain_carbonara_rendering(self):
        assert deterministic_generate(PLAIN_PROMPT) == (
            "Spaghetti Carbonara suits you: protein_g is 24; fiber_g is 3; rating is 4.6"
        )

    def test_purity(self):
        assert deterministic_generate(PLAIN_PROMPT) == deterministic_generate(PLAIN_PROMPT)

    def test_contrastive_rendering_compares_clause_by_clause(self):
        prompt = (
            "Convince me that 'A Bowl' is better for me than 'B Bowl', "
            "given for 'A Bowl' — fiber_g: 9; and for 'B Bowl' — fiber_g: 1"
        )
        text = deterministic_generate(prompt)
        assert text.startswith("A Bowl suits you better than B Bowl:")
        assert "fiber_g is 9" in text and "fiber_g" in text and "1" in text

    @settings(max_examples=150, deadline=None)
    @given(prompt=st.text(min_size=1, max_size=300))
    def test_total_and_non_empty_on_any_prompt(self, prompt):
        assert deterministic_generate(prompt)

    def test_gateway_routes_deterministic(self):
        gateway = Gateway()
        assert gateway.generate("deterministic", PLAIN_PROMPT) == deterministic_generate(
            PLAIN_PROMPT
        )

    def test_empty_prompt_rejected(self):
        with pytest.raises(GatewayError, match="non-empty"):
            Gateway().generate("deterministic", "")


class TestListBackends:
    def test_empty_config_lists_only_deterministic(self):
        assert [b["backend_id"] for b in Gateway().list_backends()] == ["deterministic"]

    def test_four_remote_entries_give_five_descriptors(self):
        configs = [
            remote_backend("http://example.invalid", backend_id=f"model-{i}")
            for i in range(4)
        ]
        assert len(Gateway(configs).list_backends()) == 5

    def test_duplicate_backend_id_rejected(self):
        configs = [
            remote_backend("http://example.invalid", backend_id="twin"),
            remote_backend("http://example.invalid", backend_id="twin"),
        ]
        with pytest.raises(BackendConfigError, match="duplicate"):
            Gateway(configs)

    def test_remote_requires_endpoint_and_model(self):
        with pytest.raises(BackendConfigError):
            BackendConfig(backend_id="x", kind="remote_chat", endpoint_url=None, model_name=None)


class TestRemoteBackend:
    def test_canned_completion_returned_verbatim(self, stub_server, monkeypatch):
        url, handler = stub_server
        monkeypatch.setenv("MEALMIND_LLM_API_KEY", "sk-test-123")
        handler.script = [
            (200, {"choices": [{"message": {"content": "A canned persuasive answer."}}]})
        ]
        gateway = Gateway([remote_backend(url)])
        assert gateway.generate("stub", PLAIN_PROMPT) == "A canned persuasive answer."
        sent = handler.requests_seen[0]["body"]
        assert sent["model"] == "test-model"
        assert sent["messages"] == [{"role": "user", "content": PLAIN_PROMPT}]
        assert handler.requests_seen[0]["auth"] == "Bearer sk-test-123"

    def test_retries_on_5xx_then_succeeds(self, stub_server, monkeypatch):
        url, handler = stub_server
        monkeypatch.setenv("MEALMIND_LLM_API_KEY", "sk-test-123")
        handler.script = [
            (500, {"error": "boom"}),
            (503, {"error": "again"}),
            (200, {"choices": [{"message": {"content": "third time lucky"}}]}),
        ]
        waits: list[float] = []
        gateway = Gateway([remote_backend(url, max_retries=2)], sleep=waits.append)
        assert gateway.generate("stub", PLAIN_PROMPT) == "third time lucky"
        assert len(handler.requests_seen) == 3
        assert waits == [0.25, 0.5]  # exponential backoff from 250 ms

    def test_retries_exhausted_raises(self, stub_server, monkeypatch):
        url, handler = stub_server
        monkeypatch.setenv("MEALMIND_LLM_API_KEY", "sk-test-123")
        handler.script = [(500, {}), (500, {}), (500, {})]
        gateway = Gateway([remote_backend(url, max_retries=2)], sleep=lambda _: None)
        with pytest.raises(GatewayError, match="HTTP 500"):
            gateway.generate("stub", PLAIN_PROMPT)
        assert len(handler.requests_seen) == 3

    def test_no_retry_on_4xx(self, stub_server, monkeypatch):
        url, handler = stub_server
        monkeypatch.setenv("MEALMIND_LLM_API_KEY", "sk-test-123")
        handler.script = [(401, {"error": "who are you"})]
        gateway = Gateway([remote_backend(url, max_retries=3)], sleep=lambda _: None)
        with pytest.raises(GatewayError, match="HTTP 401"):
            gateway.generate("stub", PLAIN_PROMPT)
        assert len(handler.requests_seen) == 1

    def test_missing_credential_fails_before_any_request(self, stub_server, monkeypatch):
        url, handler = stub_server
        monkeypatch.delenv("MEALMIND_LLM_API_KEY", raising=False)
        gateway = Gateway([remote_backend(url)])
        with pytest.raises(GatewayError, match="missing credential"):
            gateway.generate("stub", PLAIN_PROMPT)
        assert handler.requests_seen == []

    def test_per_backend_credential_override(self, stub_server, monkeypatch):
        url, handler = stub_server
        monkeypatch.delenv("MEALMIND_LLM_API_KEY", raising=False)
        monkeypatch.setenv("MEALMIND_LLM_API_KEY_STUB", "sk-override")
        handler.script = [(200, {"choices": [{"message": {"content": "ok"}}]})]
        Gateway([remote_backend(url)]).generate("stub", PLAIN_PROMPT)
        assert handler.requests_seen[0]["auth"] == "Bearer sk-override"

    def test_credential_never_appears_in_errors(self, stub_server, monkeypatch):
        url, handler = stub_server
        secret = "sk-super-secret-value"
        monkeypatch.setenv("MEALMIND_LLM_API_KEY", secret)
        handler.script = [(400, {"error": f"bad key {secret}"})]
        gateway = Gateway([remote_backend(url)], sleep=lambda _: None)
        with pytest.raises(GatewayError) as excinfo:
            gateway.generate("stub", PLAIN_PROMPT)
        assert secret not in str(excinfo.value)
        assert "[redacted]" in str(excinfo.value)

    def test_malformed_response_is_an_error(self, stub_server, monkeypatch):
        url, handler = stub_server
        monkeypatch.setenv("MEALMIND_LLM_API_KEY", "sk-test-123")
        handler.script = [(200, {"unexpected": "shape"})]
        gateway = Gateway([remote_backend(url)], sleep=lambda _: None)
        with pytest.raises(GatewayError, match="malformed"):
            gateway.generate("stub", PLAIN_PROMPT)

    def test_unknown_backend_error_names_available(self):
        with pytest.raises(GatewayError, match="deterministic"):
            Gateway().generate("gpt-x", PLAIN_PROMPT)
