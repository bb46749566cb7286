import numpy as np
import pytest
import requests

from sceneforge.embed_index import embed_local
from sceneforge.providers import (
    HttpError,
    HttpProvider,
    MalformedResponseError,
    MockProvider,
    ProviderConfig,
    ProviderTimeoutError,
    RecordingProvider,
    ReplayProvider,
    request_hash,
)

MESSAGES = [{"role": "user", "content": "hello"}]


def fast_config(**overrides):
    values = dict(endpoint="http://127.0.0.1:1/v1", timeout_s=0.01, max_retries=2, backoff_s=0.0)
    values.update(overrides)
    return ProviderConfig(**values)


class CountingTransport:
    def __init__(self, outcomes):
        self.outcomes = list(outcomes)
        self.calls = 0

    def __call__(self, url, payload, headers, timeout_s):
        self.calls += 1
        outcome = self.outcomes[min(self.calls - 1, len(self.outcomes) - 1)]
        if isinstance(outcome, Exception):
            raise outcome
        return outcome


def test_mock_provider_is_byte_stable():
    key = request_hash({"kind": "chat", "messages": MESSAGES})
    mock = MockProvider({key: "canned reply"})
    assert mock.chat(MESSAGES) == "canned reply"
    assert mock.chat(MESSAGES) == mock.chat(MESSAGES)


def test_mock_provider_unknown_request():
    with pytest.raises(MalformedResponseError):
        MockProvider({}).chat(MESSAGES)


def test_mock_embeddings_match_local_embedder():
    vectors = MockProvider({}).embed(["pink lady apple"])
    assert vectors[0].tobytes() == embed_local("pink lady apple").tobytes()


def test_timeout_after_max_retries_plus_one_attempts():
    transport = CountingTransport([requests.Timeout("boom")])
    provider = HttpProvider(fast_config(max_retries=2), transport=transport)
    with pytest.raises(ProviderTimeoutError) as err:
        provider.chat(MESSAGES)
    assert transport.calls == 3  # max_retries + 1
    assert err.value.attempts == 3
    assert isinstance(err.value, TimeoutError)


def test_server_errors_retry_then_succeed():
    ok = (200, {"choices": [{"message": {"content": "fine"}}]})
    transport = CountingTransport([(500, {}), ok])
    provider = HttpProvider(fast_config(), transport=transport)
    assert provider.chat(MESSAGES) == "fine"
    assert transport.calls == 2


def test_client_errors_do_not_retry():
    transport = CountingTransport([(401, {"error": "no key"})])
    provider = HttpProvider(fast_config(), transport=transport)
    with pytest.raises(HttpError) as err:
        provider.chat(MESSAGES)
    assert err.value.status == 401
    assert transport.calls == 1


def test_malformed_chat_reply():
    transport = CountingTransport([(200, {"nonsense": True})])
    with pytest.raises(MalformedResponseError):
        HttpProvider(fast_config(), transport=transport).chat(MESSAGES)


def test_embed_remote_normalizes_and_preserves_order():
    body = {"data": [
        {"index": 1, "embedding": [0.0, 2.0]},
        {"index": 0, "embedding": [3.0, 0.0]},
    ]}
    transport = CountingTransport([(200, body)])
    vectors = HttpProvider(fast_config(), transport=transport).embed(["a", "b"])
    assert np.allclose(vectors[0], [1.0, 0.0])
    assert np.allclose(vectors[1], [0.0, 1.0])


def test_record_then_replay_identical(tmp_path):
    key = request_hash({"kind": "chat", "messages": MESSAGES})
    live = MockProvider({key: "recorded reply"})
    recorder = RecordingProvider(live, tmp_path)
    assert recorder.chat(MESSAGES) == "recorded reply"
    vectors = recorder.embed(["pink lady apple"])

    replay = ReplayProvider(tmp_path)
    assert replay.chat(MESSAGES) == "recorded reply"
    replayed = replay.embed(["pink lady apple"])
    assert np.allclose(replayed[0], vectors[0], atol=1e-7)
    with pytest.raises(MalformedResponseError):
        replay.chat([{"role": "user", "content": "never recorded"}])


def test_config_validation():
    with pytest.raises(ValueError):
        ProviderConfig(timeout_s=0)
    with pytest.raises(ValueError):
        ProviderConfig(max_retries=-1)


def test_bundled_fixtures_cover_benchmark_decomposition():
    import json
    from importlib import resources

    from sceneforge.frontend import Frontend
    from sceneforge.taxonomy import default_config

    cfg = default_config()
    mock = MockProvider()
    rules = Frontend(cfg)
    via_provider = Frontend(cfg, provider=mock)
    text = resources.files("sceneforge.data").joinpath("benchmark_100.jsonl").read_text("utf-8")
    prompts = [json.loads(line)["prompt"] for line in text.splitlines()]
    assert len(prompts) == 100
    for prompt in prompts:
        assert rules.decompose(prompt) == via_provider.decompose(prompt, mode="provider")
