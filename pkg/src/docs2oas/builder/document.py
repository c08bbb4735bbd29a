"""The OpenAPI document under construction, with per-field provenance."""

from __future__ import annotations

import copy
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Iterator

import yaml

from .schema import JsonSchemaNode
from .skeleton import OasSkeleton

log = logging.getLogger(__name__)

BASE = "base"
ENRICHMENT = "enrichment"
BODYLESS_METHODS = {"get", "head"}
JSON_MEDIA = "application/json"


@dataclass
class OasDocument:
    """OAS data plus provenance.

    Provenance keys look like ``request/query/limit/type`` or
    ``response/user.id/description``.
    """

    data: dict[str, Any]
    provenance: dict[str, str] = field(default_factory=dict)

    def copy(self) -> OasDocument:
        return OasDocument(copy.deepcopy(self.data), dict(self.provenance))

    def operations(self) -> Iterator[tuple[str, str, dict]]:
        for path, item in self.data.get("paths", {}).items():
            for method, op in item.items():
                if isinstance(op, dict) and method in (
                    "get", "post", "put", "patch", "delete", "head", "options"
                ):
                    yield path, method, op

    def single_operation(self) -> tuple[str, str, dict]:
        ops = list(self.operations())
        if len(ops) != 1:
            raise ValueError(f"expected one operation, found {len(ops)}")
        return ops[0]

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, ensure_ascii=False) + "\n"

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.data, sort_keys=False, allow_unicode=True)

    def provenance_values(self) -> set[str]:
        return set(self.provenance.values())


def response_schema_of(op: dict) -> tuple[str | None, dict | None]:
    """First 2xx response with a JSON schema, else the first with any schema."""
    responses = op.get("responses", {})
    ordered = sorted(responses, key=lambda s: (not str(s).startswith("2"), str(s)))
    for status in ordered:
        content = (responses[status] or {}).get("content", {})
        for media in content.values():
            if isinstance(media, dict) and "schema" in media:
                return status, media["schema"]
    return (ordered[0] if ordered else None), None


def request_schema_of(op: dict) -> dict | None:
    content = (op.get("requestBody") or {}).get("content", {})
    for media in content.values():
        if isinstance(media, dict) and "schema" in media:
            return media["schema"]
    return None


def _mark_schema(provenance: dict[str, str], side: str, schema: JsonSchemaNode) -> None:
    for path, node, _owner in schema.walk():
        provenance[f"{side}/{path}/type"] = BASE
        provenance[f"{side}/{path}/required"] = BASE
        if node.description:
            provenance[f"{side}/{path}/description"] = BASE


def build_base_oas(
    skeleton: OasSkeleton,
    request_schema: JsonSchemaNode | None = None,
    response_schema: JsonSchemaNode | None = None,
    response_status: str = "200",
) -> OasDocument:
    """Embed inferred schemas into the skeleton, all fields marked ``base``."""
    provenance: dict[str, str] = {}
    op: dict[str, Any] = {}
    if skeleton.parameters:
        params = []
        for p in skeleton.parameters:
            entry: dict[str, Any] = {"name": p.name, "in": p.location}
            if p.location == "path":
                entry["required"] = True
                provenance[f"request/path/{p.name}/required"] = BASE
            entry["schema"] = {"type": p.type}
            params.append(entry)
            provenance[f"request/{p.location}/{p.name}/type"] = BASE
            provenance[f"request/{p.location}/{p.name}/location"] = BASE
        op["parameters"] = params

    if skeleton.method in BODYLESS_METHODS:
        if request_schema is not None:
            log.warning("ignoring request body schema on %s %s", skeleton.method.upper(), skeleton.path)
    elif skeleton.has_request_body or request_schema is not None:
        schema = request_schema.to_dict() if request_schema is not None else {}
        op["requestBody"] = {"content": {JSON_MEDIA: {"schema": schema}}}
        if request_schema is not None:
            body = request_schema
            while body.type == "array" and body.items is not None:
                body = body.items
            for name in body.properties:
                provenance[f"request/body/{name}/type"] = BASE
                provenance[f"request/body/{name}/location"] = BASE
                provenance[f"request/body/{name}/required"] = BASE

    status = str(response_status)
    description = "Successful response" if status.startswith("2") else "Error response"
    response: dict[str, Any] = {"description": description}
    if response_schema is not None:
        response["content"] = {JSON_MEDIA: {"schema": response_schema.to_dict()}}
        _mark_schema(provenance, "response", response_schema)
    op["responses"] = {status: response}
    if skeleton.security_schemes:
        op["security"] = [{name: []} for name in skeleton.security_schemes]

    data: dict[str, Any] = {
        "openapi": skeleton.openapi_version,
        "info": {"title": skeleton.title, "version": skeleton.version},
    }
    if skeleton.servers:
        data["servers"] = [{"url": s} for s in skeleton.servers]
    data["paths"] = {skeleton.path: {skeleton.method: op}}
    if skeleton.security_schemes:
        data["components"] = {"securitySchemes": dict(skeleton.security_schemes)}
    return OasDocument(data, provenance)
