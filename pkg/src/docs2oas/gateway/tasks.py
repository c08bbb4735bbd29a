"""Generation task kinds and the output check for each."""

from __future__ import annotations

import json
from enum import Enum
from typing import Callable


class Task(str, Enum):
    SKELETON = "skeleton"
    SCHEMA = "schema"
    REQUEST_ENRICHMENT = "request-enrichment"
    RESPONSE_ENRICHMENT = "response-enrichment"

    @property
    def output_suffix(self) -> str:
        return "tsv" if self is Task.REQUEST_ENRICHMENT else "json"

    @property
    def is_enrichment(self) -> bool:
        return self in (Task.REQUEST_ENRICHMENT, Task.RESPONSE_ENRICHMENT)


def parse_schema_output(text: str):
    from ..builder.schema import JsonSchemaNode
    from ..enrich import strip_code_fences
    from ..errors import MalformedSchema

    try:
        data = json.loads(strip_code_fences(text).strip())
    except ValueError as exc:
        raise MalformedSchema(f"schema output is not JSON: {exc}") from exc
    return JsonSchemaNode.from_dict(data)


def parse_skeleton_output(text: str):
    from ..builder.skeleton import OasSkeleton
    from ..enrich import strip_code_fences
    from ..errors import MalformedSchema

    try:
        data = json.loads(strip_code_fences(text).strip())
    except ValueError as exc:
        raise MalformedSchema(f"skeleton output is not JSON: {exc}") from exc
    return OasSkeleton.from_dict(data)


def output_parser(task: Task) -> Callable[[str], object]:
    """The parser that doubles as the output validator for ``task``.

    Anything that passes here is guaranteed to parse downstream, because it
    is the same function.
    """
    from ..enrich import parse_request_tsv, parse_response_schema

    return {
        Task.SKELETON: parse_skeleton_output,
        Task.SCHEMA: parse_schema_output,
        Task.REQUEST_ENRICHMENT: parse_request_tsv,
        Task.RESPONSE_ENRICHMENT: parse_response_schema,
    }[Task(task)]


def output_validator(task: Task) -> Callable[[str], bool]:
    from ..errors import Docs2OasError

    parse = output_parser(task)

    def check(text: str) -> bool:
        try:
            parse(text)
        except (Docs2OasError, ValueError, KeyError, TypeError):
            return False
        return True

    return check
