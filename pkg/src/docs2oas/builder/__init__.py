"""Base OAS construction from request/response examples."""

from __future__ import annotations

from typing import TYPE_CHECKING

from .document import (
    BASE,
    ENRICHMENT,
    OasDocument,
    build_base_oas,
    request_schema_of,
    response_schema_of,
)
from .schema import (
    JsonSchemaNode,
    Segment,
    aggregate_segments,
    infer_from_text,
    infer_from_value,
    segment_example,
)
from .skeleton import OasSkeleton, SkeletonParam, generate_skeleton, literal_type, template_path

if TYPE_CHECKING:
    from ..gateway import DecodingParams, IclLibrary, ProviderConfig

__all__ = [
    "BASE",
    "ENRICHMENT",
    "JsonSchemaNode",
    "OasDocument",
    "OasSkeleton",
    "Segment",
    "SkeletonParam",
    "aggregate_segments",
    "build_base_oas",
    "generate_skeleton",
    "infer_from_text",
    "infer_from_value",
    "infer_schema",
    "infer_example",
    "literal_type",
    "request_schema_of",
    "response_schema_of",
    "segment_example",
    "template_path",
]

DEFAULT_LINE_THRESHOLD = 40


def infer_schema(
    segment: Segment,
    provider: ProviderConfig | None = None,
    library: IclLibrary | None = None,
    decoding: DecodingParams | None = None,
) -> JsonSchemaNode:
    """Schema for one segment, from the provider or the deterministic rules.

    A provider answer must pass the schema-node checks; after the retry
    budget is spent :class:`~docs2oas.errors.ValidationExhausted` propagates.
    """
    if provider is None or provider.kind == "reference-oracle":
        return infer_from_text(segment.text)
    from ..gateway import Task, run_task

    text = run_task(provider, Task.SCHEMA, segment.text, library=library, decoding=decoding)
    from ..gateway.oracle import parse_schema_output

    return parse_schema_output(text)


def infer_example(
    json_text: str,
    line_threshold: int = DEFAULT_LINE_THRESHOLD,
    provider: ProviderConfig | None = None,
    library: IclLibrary | None = None,
    decoding: DecodingParams | None = None,
) -> JsonSchemaNode:
    """Segment, infer each piece, and aggregate."""
    segments = segment_example(json_text, line_threshold)
    parts = [
        (s.json_pointer_prefix, infer_schema(s, provider, library, decoding)) for s in segments
    ]
    return aggregate_segments(parts)
