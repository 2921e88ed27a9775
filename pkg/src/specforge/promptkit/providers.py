"""Completion providers: offline mocks and HTTP clients.

Every call is one independent request; providers keep no conversation
state between calls. Mocks record a call log so tests can count requests.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Mapping

from ..errors import ConfigError, FormatError, ProviderError
from .prompt import PromptBundle

MOCK_PROVIDERS = ("echo-oracle", "scripted", "mutate-k")
HTTP_PROVIDERS = ("openai", "anthropic")


@dataclass(frozen=True)
class ModelConfig:
    provider: str
    model: str
    endpoint: str = ""
    temperature: float = 0.0
    max_tokens: int = 4096
    auth_env: str = ""
    schedule: str = ""  # scripted mock: JSONL path
    k: int = 2  # mutate-k: every k-th task id (by hash) is mutated
    retries: int = 3
    timeout: float = 120.0

    def manifest(self) -> dict:
        d = {"provider": self.provider, "model": self.model, "temperature": self.temperature,
             "max_tokens": self.max_tokens}
        if self.endpoint:
            d["endpoint"] = self.endpoint
        if self.provider == "mutate-k":
            d["k"] = self.k
        return d


@dataclass(frozen=True)
class Completion:
    text: str
    usage: dict = field(default_factory=dict)
    latency: float = 0.0
    meta: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# model registry


def load_registry(path: str | Path | None = None) -> dict[str, ModelConfig]:
    try:
        if path is None:
            text = resources.files("specforge.data").joinpath("models.json").read_text(encoding="utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        raw = json.loads(text)["models"]
        return {mid: ModelConfig(**spec) for mid, spec in raw.items()}
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load model registry: {exc}") from None


def resolve_model(model_id: str, registry: Mapping[str, ModelConfig] | None = None, **overrides) -> ModelConfig:
    registry = load_registry() if registry is None else registry
    if model_id not in registry:
        raise ConfigError(f"unknown model {model_id!r}; known: {', '.join(sorted(registry))}")
    cfg = registry[model_id]
    kw = {k: v for k, v in overrides.items() if v is not None}
    return ModelConfig(**{**cfg.__dict__, **kw}) if kw else cfg


# --------------------------------------------------------------------------
# providers


class Provider:
    def __init__(self, cfg: ModelConfig):
        self.cfg = cfg
        self.calls: list[str] = []
        self._lock = threading.Lock()

    def complete(self, bundle: PromptBundle, task_id: str) -> Completion:
        with self._lock:
            self.calls.append(task_id)
        start = time.perf_counter()
        c = self._complete(bundle, task_id)
        return Completion(c.text, c.usage, time.perf_counter() - start, c.meta)

    def _complete(self, bundle: PromptBundle, task_id: str) -> Completion:
        raise NotImplementedError


def fenced(spec: str) -> str:
    return f"```python\n{spec.rstrip()}\n```\n"


class EchoOracle(Provider):
    """Answers with the target syscall's oracle spec."""

    def __init__(self, cfg: ModelConfig, oracle: Callable[[str], str]):
        super().__init__(cfg)
        self.oracle = oracle

    def _complete(self, bundle, task_id):
        return Completion(fenced(self.oracle(task_id)))


class Scripted(Provider):
    """Answers from a JSONL schedule of {task_id, response_text}."""

    def __init__(self, cfg: ModelConfig, schedule: Mapping[str, str] | None = None):
        super().__init__(cfg)
        self.schedule = dict(schedule) if schedule is not None else load_schedule(cfg.schedule)

    def _complete(self, bundle, task_id):
        if task_id not in self.schedule:
            raise ProviderError(f"schedule has no response for {task_id}")
        return Completion(self.schedule[task_id])


def load_schedule(path: str | Path) -> dict[str, str]:
    if not path:
        raise ConfigError("scripted provider needs a schedule file")
    out: dict[str, str] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read schedule {path}: {exc}") from None
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            r = json.loads(line)
            out[r["task_id"]] = r["response_text"]
        except (json.JSONDecodeError, KeyError, TypeError):
            raise ConfigError(f"{path}:{n}: expected {{task_id, response_text}}") from None
    return out


_EQ = re.compile(r"(?<![=!<>])==(?!=)")


def mutate_spec(spec: str) -> str:
    """Flip the first equality in the spec into an inequality."""
    return _EQ.sub("!=", spec, count=1)


class MutateK(Provider):
    """Oracle answers, except task ids whose hash is 0 mod k get a flipped equality."""

    def __init__(self, cfg: ModelConfig, oracle: Callable[[str], str]):
        super().__init__(cfg)
        self.oracle = oracle

    def mutated(self, task_id: str) -> bool:
        h = int(hashlib.sha256(task_id.encode()).hexdigest()[:8], 16)
        return self.cfg.k > 0 and h % self.cfg.k == 0

    def _complete(self, bundle, task_id):
        spec = self.oracle(task_id)
        return Completion(fenced(mutate_spec(spec) if self.mutated(task_id) else spec))


class HttpProvider(Provider):
    """Single-message chat request with bounded retries on transport errors."""

    RETRY_STATUS = {408, 429, 500, 502, 503, 504}

    def __init__(self, cfg: ModelConfig):
        super().__init__(cfg)
        if not cfg.auth_env:
            raise ConfigError(f"model {cfg.model} has no auth_env configured")
        self.key = os.environ.get(cfg.auth_env, "")
        if not self.key:
            raise ConfigError(f"environment variable {cfg.auth_env} is not set")
        if not cfg.endpoint:
            raise ConfigError(f"model {cfg.model} has no endpoint")

    def request(self, prompt: str) -> tuple[dict, dict]:
        raise NotImplementedError

    def parse(self, body: dict) -> Completion:
        raise NotImplementedError

    def _complete(self, bundle, task_id):
        payload, headers = self.request(bundle.text)
        data = json.dumps(payload).encode()
        last = ""
        for attempt in range(self.cfg.retries + 1):
            if attempt:
                time.sleep(min(2 ** attempt, 30))
            req = urllib.request.Request(self.cfg.endpoint, data=data, method="POST",
                                         headers={"Content-Type": "application/json", **headers})
            try:
                with urllib.request.urlopen(req, timeout=self.cfg.timeout) as resp:
                    body = json.loads(resp.read().decode())
            except urllib.error.HTTPError as exc:
                last = f"HTTP {exc.code}"
                if exc.code in self.RETRY_STATUS:
                    continue
                raise ProviderError(f"{self.cfg.provider}: {last}: {exc.read()[:200]!r}") from None
            except (urllib.error.URLError, TimeoutError, OSError) as exc:
                last = str(exc)
                continue
            except json.JSONDecodeError as exc:
                raise ProviderError(f"{self.cfg.provider}: malformed response: {exc}") from None
            try:
                return self.parse(body)
            except (KeyError, IndexError, TypeError) as exc:
                raise ProviderError(f"{self.cfg.provider}: unexpected response shape: {exc}") from None
        raise ProviderError(f"{self.cfg.provider}: giving up after {self.cfg.retries + 1} attempts: {last}")


class OpenAIChat(HttpProvider):
    def request(self, prompt):
        return ({"model": self.cfg.model, "messages": [{"role": "user", "content": prompt}],
                 "temperature": self.cfg.temperature, "max_tokens": self.cfg.max_tokens},
                {"Authorization": f"Bearer {self.key}"})

    def parse(self, body):
        return Completion(body["choices"][0]["message"]["content"] or "", body.get("usage", {}),
                          meta={"id": body.get("id", ""), "model": body.get("model", "")})


class AnthropicMessages(HttpProvider):
    def request(self, prompt):
        return ({"model": self.cfg.model, "messages": [{"role": "user", "content": prompt}],
                 "temperature": self.cfg.temperature, "max_tokens": self.cfg.max_tokens},
                {"x-api-key": self.key, "anthropic-version": "2023-06-01"})

    def parse(self, body):
        text = "".join(b.get("text", "") for b in body["content"] if b.get("type") == "text")
        return Completion(text, body.get("usage", {}), meta={"id": body.get("id", ""), "model": body.get("model", "")})


def make_provider(cfg: ModelConfig, oracle: Callable[[str], str] | None = None) -> Provider:
    """``oracle`` maps a task id to its oracle spec text (needed by the echo and mutate mocks)."""
    if cfg.provider in ("echo-oracle", "mutate-k"):
        if oracle is None:
            raise ConfigError(f"{cfg.provider} needs oracle specs")
        return (EchoOracle if cfg.provider == "echo-oracle" else MutateK)(cfg, oracle)
    if cfg.provider == "scripted":
        return Scripted(cfg)
    if cfg.provider == "openai":
        return OpenAIChat(cfg)
    if cfg.provider == "anthropic":
        return AnthropicMessages(cfg)
    raise ConfigError(f"unknown provider {cfg.provider!r}")


# --------------------------------------------------------------------------
# response extraction

_FENCE = re.compile(r"^```[ \t]*python[ \t]*\n(.*?)^```[ \t]*$", re.M | re.S)


def extract_spec_block(text: str) -> str:
    """Contents of the last fenced python block."""
    blocks = _FENCE.findall(text)
    if not blocks:
        raise FormatError("response has no ```python block")
    return blocks[-1]
