"""Text-generation boundary: ICL selection, prompts, providers and the reference oracle."""

from __future__ import annotations

import httpx

from ..errors import EmptyLibrary, ParseFailure
from ..ingest import parse_dom
from .icl import (
    DEFAULT_K,
    DEFAULT_METRIC,
    IclExample,
    IclLibrary,
    default_library,
    fingerprint,
    load_library,
    select_icl_examples,
)
from .oracle import reference_oracle, skeleton_payload
from .prompts import build_prompt
from .providers import (
    REFERENCE,
    DecodingParams,
    GenerationJob,
    ProviderConfig,
    generate,
    run_jobs,
)
from .tasks import Task, output_parser, output_validator, parse_schema_output, parse_skeleton_output

__all__ = [
    "DEFAULT_K",
    "DEFAULT_METRIC",
    "REFERENCE",
    "DecodingParams",
    "GenerationJob",
    "IclExample",
    "IclLibrary",
    "ProviderConfig",
    "Task",
    "build_prompt",
    "default_library",
    "fingerprint",
    "generate",
    "load_library",
    "output_parser",
    "output_validator",
    "parse_schema_output",
    "parse_skeleton_output",
    "reference_oracle",
    "run_jobs",
    "run_task",
    "select_icl_examples",
    "skeleton_payload",
]


def _demonstrations(task: Task, payload: str, library: IclLibrary | None, k: int, metric: str):
    if library is None or not library.for_task(task):
        if task.is_enrichment:
            raise EmptyLibrary(f"no ICL examples for task {task.value}")
        return []
    if not task.is_enrichment:
        return list(library.for_task(task))[:k]
    try:
        fragment = parse_dom(payload).root
    except ParseFailure:
        return list(library.for_task(task))[:k]
    return select_icl_examples(fragment, library, task, k=k, metric=metric)


def run_task(
    provider: ProviderConfig,
    task: Task | str,
    payload: str,
    library: IclLibrary | None = None,
    decoding: DecodingParams | None = None,
    k: int = DEFAULT_K,
    metric: str = DEFAULT_METRIC,
    client: httpx.Client | None = None,
) -> str:
    """Prompt for ``task`` with ``payload``, generate, and return validated text.

    The reference oracle needs no demonstrations, so the library is only
    consulted for remote providers.
    """
    task = Task(task)
    icl = _demonstrations(task, payload, library, k, metric) if provider.is_remote else []
    prompt = build_prompt(task, icl, payload) if icl or not task.is_enrichment else payload
    job = GenerationJob(task, prompt, decoding or DecodingParams(), payload=payload)
    return generate(provider, job, output_validator(task), client=client)
