"""Provider configuration and generation with validation retries."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import httpx

from ..errors import ProviderError, ValidationExhausted
from .tasks import Task

log = logging.getLogger(__name__)

DEFAULT_PARALLELISM = 4


@dataclass(frozen=True)
class DecodingParams:
    max_new_tokens: int = 2048
    temperature: float = 0.0
    stop_sequences: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be >= 1")


@dataclass(frozen=True)
class ProviderConfig:
    kind: Literal["remote-http", "reference-oracle"] = "reference-oracle"
    endpoint: str | None = None
    model_name: str | None = None
    auth_env_var: str | None = None
    request_timeout: float = 60.0
    max_retries: int = 2
    parallelism: int = DEFAULT_PARALLELISM

    def __post_init__(self) -> None:
        if self.kind not in ("remote-http", "reference-oracle"):
            raise ValueError(f"unknown provider kind {self.kind!r}")
        if self.kind == "remote-http" and not (self.endpoint and self.model_name):
            raise ValueError("remote-http providers need an endpoint and a model name")
        if self.max_retries < 0 or self.parallelism < 1 or self.request_timeout <= 0:
            raise ValueError("retries must be >= 0, parallelism >= 1, timeout > 0")

    @property
    def is_remote(self) -> bool:
        return self.kind == "remote-http"


REFERENCE = ProviderConfig()


@dataclass(frozen=True)
class GenerationJob:
    task: Task
    prompt: str
    decoding: DecodingParams = field(default_factory=DecodingParams)
    # raw task input; the reference oracle answers from this instead of the prompt
    payload: str | None = None

    def __post_init__(self) -> None:
        if not self.prompt:
            raise ValueError("prompt must not be empty")
        object.__setattr__(self, "task", Task(self.task))


def _extract_text(data) -> str:
    if isinstance(data, str):
        return data
    if not isinstance(data, dict):
        raise ProviderError(f"unexpected provider response type {type(data).__name__}")
    for key in ("text", "generated_text", "output", "completion"):
        if isinstance(data.get(key), str):
            return data[key]
    for key in ("choices", "results"):
        seq = data.get(key)
        if isinstance(seq, list) and seq and isinstance(seq[0], dict):
            first = seq[0]
            for sub in ("text", "generated_text"):
                if isinstance(first.get(sub), str):
                    return first[sub]
            msg = first.get("message")
            if isinstance(msg, dict) and isinstance(msg.get("content"), str):
                return msg["content"]
    raise ProviderError("provider response carries no generated text")


def _remote_call(provider: ProviderConfig, job: GenerationJob, client: httpx.Client) -> str:
    headers = {"Content-Type": "application/json"}
    if provider.auth_env_var:
        token = os.environ.get(provider.auth_env_var)
        if token:
            headers["Authorization"] = f"Bearer {token}"
    body = {
        "model": provider.model_name,
        "prompt": job.prompt,
        "max_new_tokens": job.decoding.max_new_tokens,
        "temperature": job.decoding.temperature,
        "stop": list(job.decoding.stop_sequences),
    }
    try:
        resp = client.post(provider.endpoint, json=body, headers=headers, timeout=provider.request_timeout)
    except httpx.HTTPError as exc:
        raise ProviderError(f"request to {provider.endpoint} failed: {exc}") from exc
    if resp.status_code in (401, 403):
        raise ProviderError(f"provider rejected credentials (HTTP {resp.status_code})")
    if resp.status_code >= 400:
        raise ProviderError(f"provider returned HTTP {resp.status_code}")
    try:
        data = resp.json()
    except ValueError:
        return resp.text
    return _extract_text(data)


def generate(
    provider: ProviderConfig,
    job: GenerationJob,
    validator: Callable[[str], bool],
    client: httpx.Client | None = None,
) -> str:
    """First output that passes ``validator``.

    The prompt is sent unchanged up to ``1 + max_retries`` times. Transport
    and auth failures raise :class:`ProviderError` at once.
    """
    if not provider.is_remote:
        from .oracle import reference_oracle

        text = reference_oracle(job.task, job.payload if job.payload is not None else job.prompt)
        if not validator(text):
            raise ValidationExhausted(f"reference answer for {job.task.value} fails its check", [text])
        return text

    own_client = client is None
    client = client or httpx.Client()
    outputs: list[str] = []
    try:
        for attempt in range(1 + provider.max_retries):
            text = _remote_call(provider, job, client)
            outputs.append(text)
            if validator(text):
                return text
            log.info("%s output failed validation (attempt %d)", job.task.value, attempt + 1)
    finally:
        if own_client:
            client.close()
    raise ValidationExhausted(
        f"{job.task.value}: no valid output after {len(outputs)} attempts", outputs
    )


def run_jobs(
    provider: ProviderConfig,
    jobs: Sequence[GenerationJob],
    validators: Sequence[Callable[[str], bool]],
    client: httpx.Client | None = None,
) -> list[str | Exception]:
    """Run jobs concurrently, at most ``provider.parallelism`` in flight.

    Results keep the job order; a failed job yields its exception.
    """
    def one(i: int) -> str | Exception:
        try:
            return generate(provider, jobs[i], validators[i], client)
        except Exception as exc:  # noqa: BLE001 - reported per job
            return exc

    if len(jobs) <= 1 or provider.parallelism == 1:
        return [one(i) for i in range(len(jobs))]
    with ThreadPoolExecutor(max_workers=provider.parallelism) as pool:
        return list(pool.map(one, range(len(jobs))))
