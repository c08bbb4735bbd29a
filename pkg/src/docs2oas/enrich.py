"""Parse enrichment generations, drop hallucinated names, merge into the base OAS."""

from __future__ import annotations

import copy
import difflib
import json
import re
from dataclasses import dataclass, field, replace
from typing import Any, TypeVar

from .builder import BASE, ENRICHMENT, JsonSchemaNode, OasDocument, request_schema_of, response_schema_of
from .builder.document import BODYLESS_METHODS, JSON_MEDIA
from .builder.skeleton import IGNORED_HEADERS
from .errors import MalformedSchema, MalformedTsv
from .scope import ProcessedScope

__all__ = [
    "ParameterRow",
    "EnrichmentTable",
    "ResponseEnrichmentSchema",
    "CANONICAL_COLUMNS",
    "map_header",
    "normalize_type",
    "parse_required",
    "normalize_location",
    "parse_request_tsv",
    "parse_response_schema",
    "filter_hallucinations",
    "merge",
    "strip_code_fences",
]

CANONICAL_COLUMNS = ("name", "type", "required", "location", "description")
TYPE_VOCAB = ("string", "integer", "number", "boolean", "array", "object")
LOCATIONS = ("path", "query", "header", "body")

HEADER_ALIASES = {
    "name": ("name", "parameter", "param", "field", "attribute", "argument", "key",
             "property", "parameter name", "field name", "param name"),
    "type": ("type", "data type", "datatype", "format", "value type", "schema"),
    "required": ("required", "mandatory", "optional", "req", "is required",
                 "required optional"),
    "location": ("location", "in", "param type", "parameter type", "where",
                 "placement", "source", "parameter location"),
    "description": ("description", "desc", "details", "notes", "info", "explanation",
                    "meaning", "comment", "summary", "remarks"),
}
_TYPE_SYNONYMS = {
    "str": "string", "text": "string", "char": "string", "date": "string",
    "datetime": "string", "date-time": "string", "uuid": "string", "uri": "string",
    "url": "string", "email": "string", "enum": "string", "timestamp": "string",
    "int": "integer", "int32": "integer", "int64": "integer", "long": "integer",
    "bigint": "integer",
    "float": "number", "double": "number", "decimal": "number", "numeric": "number",
    "bool": "boolean",
    "list": "array",
    "dict": "object", "map": "object", "json": "object", "hash": "object",
}
_TRUE_WORDS = {"yes", "y", "true", "required", "mandatory", "1"}
_FALSE_WORDS = {"no", "n", "false", "optional", "0", "not required"}
_LOCATION_SYNONYMS = {
    "headers": "header", "http header": "header",
    "url": "path", "route": "path", "path parameter": "path",
    "querystring": "query", "query string": "query", "query parameter": "query",
    "form": "body", "formdata": "body", "form data": "body", "request body": "body",
    "json": "body", "payload": "body", "data": "body",
}


def _collapse(text: str | None) -> str | None:
    if text is None:
        return None
    text = re.sub(r"\s+", " ", text).strip()
    return text or None


def _header_key(cell: str) -> str:
    return re.sub(r"[^a-z0-9]+", " ", cell.lower()).strip()


def map_header(cells: list[str]) -> dict[int, str]:
    """Map header cells to canonical column names; unknown cells are left out."""
    keys = [_header_key(c) for c in cells]
    mapping: dict[int, str] = {}
    taken: set[str] = set()

    def assign(i: int, col: str) -> None:
        if i not in mapping and col not in taken:
            mapping[i] = col
            taken.add(col)

    for i, k in enumerate(keys):
        for col, aliases in HEADER_ALIASES.items():
            if k in aliases:
                assign(i, col)
                break
    all_aliases = {a: col for col, aliases in HEADER_ALIASES.items() for a in aliases}
    for i, k in enumerate(keys):
        if i in mapping or not k:
            continue
        close = difflib.get_close_matches(k, list(all_aliases), n=1, cutoff=0.75)
        if close:
            assign(i, all_aliases[close[0]])
            continue
        words = set(k.split())
        for col in ("description", "required", "location", "type", "name"):
            if words & {a for a in HEADER_ALIASES[col] if " " not in a and len(a) > 2}:
                assign(i, col)
                break
    return mapping


def normalize_type(cell: str | None) -> str | None:
    if not cell:
        return None
    text = cell.strip().lower()
    if text.endswith("[]") or text.startswith(("array", "list of", "list[")):
        return "array"
    text = re.sub(r"[^a-z0-9-]+", " ", text).strip()
    first = text.split(" ")[0] if text else ""
    for word in (text, first):
        if word in TYPE_VOCAB:
            return word
        if word in _TYPE_SYNONYMS:
            return _TYPE_SYNONYMS[word]
    return None


def parse_required(cell: str | None) -> bool | None:
    if cell is None:
        return None
    text = re.sub(r"[^a-z0-9 ]+", " ", cell.lower()).strip()
    text = re.sub(r"\s+", " ", text)
    if text in _TRUE_WORDS:
        return True
    if text in _FALSE_WORDS:
        return False
    return None


def normalize_location(cell: str | None) -> str | None:
    if not cell:
        return None
    text = re.sub(r"\s+", " ", cell.strip().lower())
    if text in LOCATIONS:
        return text
    return _LOCATION_SYNONYMS.get(text)


@dataclass(frozen=True)
class ParameterRow:
    name: str
    type: str | None = None
    required: bool | None = None
    location: str | None = None
    description: str | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise MalformedTsv("parameter name must not be empty")
        if self.type is not None and self.type not in TYPE_VOCAB:
            raise MalformedTsv(f"unknown type {self.type!r}")
        if self.location is not None and self.location not in LOCATIONS:
            raise MalformedTsv(f"unknown location {self.location!r}")


@dataclass(frozen=True)
class EnrichmentTable:
    rows: tuple[ParameterRow, ...]
    header: tuple[str, ...] = CANONICAL_COLUMNS
    dropped: tuple[str, ...] = ()

    def names(self) -> list[str]:
        return [r.name for r in self.rows]

    def to_tsv(self) -> str:
        lines = ["\t".join(CANONICAL_COLUMNS)]
        for r in self.rows:
            req = "" if r.required is None else str(r.required).lower()
            lines.append("\t".join([r.name, r.type or "", req, r.location or "", r.description or ""]))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ResponseEnrichmentSchema:
    root: JsonSchemaNode
    dropped: tuple[str, ...] = ()

    def names(self) -> list[str]:
        return [path for path, _node, _owner in self.root.walk()]


_FENCE_RE = re.compile(r"^\s*```[\w+-]*\s*\n(.*?)\n?\s*```\s*$", re.DOTALL)


def strip_code_fences(text: str) -> str:
    m = _FENCE_RE.match(text)
    if m:
        return m.group(1)
    inner = re.search(r"```[\w+-]*\s*\n(.*?)\n?```", text, re.DOTALL)
    return inner.group(1) if inner else text


def parse_request_tsv(text: str) -> EnrichmentTable:
    """Parse a generated TSV parameter table with a header row in any column order."""
    body = strip_code_fences(text or "")
    lines = [l for l in body.splitlines() if l.strip()]
    header_idx = None
    mapping: dict[int, str] = {}
    for i, line in enumerate(lines):
        if "\t" not in line:
            continue
        mapping = map_header(line.split("\t"))
        if "name" in mapping.values():
            header_idx = i
            break
    if header_idx is None:
        raise MalformedTsv("no tab-separated header row with a name column")
    header = tuple(c.strip() for c in lines[header_idx].split("\t"))
    rows: list[ParameterRow] = []
    seen: set[tuple[str, str | None]] = set()
    for line in lines[header_idx + 1:]:
        cells = line.split("\t")
        if len(cells) < 2 and len(mapping) > 1:
            continue
        values = {col: (cells[i].strip() if i < len(cells) else "") for i, col in mapping.items()}
        name = values.get("name", "").strip().strip("`*\"'")
        if not name or " " in name:
            continue
        row = ParameterRow(
            name=name,
            type=normalize_type(values.get("type")),
            required=parse_required(values.get("required")),
            location=normalize_location(values.get("location")),
            description=_collapse(values.get("description")),
        )
        key = (row.name.lower(), row.location)
        if key in seen:
            continue
        seen.add(key)
        rows.append(row)
    if not rows:
        raise MalformedTsv("no parseable data rows")
    return EnrichmentTable(tuple(rows), header)


def _normalize_descriptions(node: JsonSchemaNode) -> None:
    node.description = _collapse(node.description)
    for child in node.properties.values():
        _normalize_descriptions(child)
    if node.items is not None:
        _normalize_descriptions(node.items)


def parse_response_schema(text: str) -> ResponseEnrichmentSchema:
    """Parse a generated response schema (JSON, optionally fenced)."""
    body = strip_code_fences(text or "").strip()
    try:
        data = json.loads(body)
    except ValueError as exc:
        raise MalformedSchema(f"response schema is not JSON: {exc}") from exc
    root = JsonSchemaNode.from_dict(data)
    _normalize_descriptions(root)
    return ResponseEnrichmentSchema(root)


# ---------------------------------------------------------------------------
# hallucination filter
# ---------------------------------------------------------------------------


def _present(name: str, haystack: str) -> bool:
    pattern = r"(?<![A-Za-z0-9_])" + re.escape(name) + r"(?![A-Za-z0-9_])"
    return re.search(pattern, haystack, re.IGNORECASE) is not None


def _name_in_scope(dotted: str, haystack: str) -> bool:
    return all(_present(part, haystack) for part in dotted.split(".") if part)


T = TypeVar("T", EnrichmentTable, ResponseEnrichmentSchema)


def filter_hallucinations(generated: T, scope: ProcessedScope) -> T:
    """Keep only names that literally occur in the prompted scope.

    Dotted names need every segment present. Removed names are listed in
    ``dropped``.
    """
    haystack = scope.visible_text + "\n" + scope.cleaned_html
    if isinstance(generated, EnrichmentTable):
        kept, dropped = [], list(generated.dropped)
        for row in generated.rows:
            if _name_in_scope(row.name, haystack):
                kept.append(row)
            else:
                dropped.append(row.name)
        return replace(generated, rows=tuple(kept), dropped=tuple(dropped))

    root = copy.deepcopy(generated.root)
    dropped = list(generated.dropped)

    def prune(node: JsonSchemaNode, prefix: str) -> None:
        obj = node
        while obj.type == "array" and obj.items is not None:
            obj = obj.items
        for name in list(obj.properties):
            path = f"{prefix}.{name}" if prefix else name
            if _present(name, haystack):
                prune(obj.properties[name], path)
                continue
            dropped.append(path)
            dropped.extend(f"{path}.{sub}" for sub, _n, _o in obj.properties[name].walk())
            del obj.properties[name]
            if obj.required is not None and name in obj.required:
                obj.required = [r for r in obj.required if r != name]

    prune(root, "")
    return replace(generated, root=root, dropped=tuple(dropped))


# ---------------------------------------------------------------------------
# merge
# ---------------------------------------------------------------------------


def _schema_for_type(kind: str | None) -> dict[str, Any]:
    kind = kind or "string"
    if kind == "array":
        return {"type": "array", "items": {}}
    if kind == "object":
        return {"type": "object", "properties": {}}
    return {"type": kind}


def _object_of(schema: dict) -> dict:
    """Descend through array items to the object that owns properties."""
    while isinstance(schema, dict) and schema.get("type") == "array" and isinstance(schema.get("items"), dict):
        schema = schema["items"]
    return schema


def _set_required(obj: dict, names: list[str]) -> None:
    if names:
        obj["required"] = sorted(set(names))
    else:
        obj.pop("required", None)


def _merge_request(doc: OasDocument, path: str, method: str, op: dict, table: EnrichmentTable,
                   notes: list[str]) -> None:
    params: list[dict] = op.setdefault("parameters", [])
    prov = doc.provenance

    def body_object(create: bool) -> dict | None:
        schema = request_schema_of(op)
        if schema is None:
            if not create:
                return None
            op["requestBody"] = {"content": {JSON_MEDIA: {"schema": {"type": "object", "properties": {}}}}}
            schema = request_schema_of(op)
        obj = _object_of(schema)
        if obj.get("type") is None and not obj.get("properties"):
            obj.update({"type": "object", "properties": {}})
        if obj.get("type") != "object":
            return None
        obj.setdefault("properties", {})
        return obj

    for row in table.rows:
        lname = row.name.lower()
        matches = [p for p in params if p.get("name", "").lower() == lname]
        if row.location:
            matches.sort(key=lambda p: p.get("in") != row.location)
        body = body_object(create=False)
        body_key = None
        if body is not None:
            body_key = next((k for k in body["properties"] if k.lower() == lname), None)
        use_body = body_key is not None and (not matches or (row.location == "body" and matches[0].get("in") != "body"))

        if matches and not use_body:
            p = matches[0]
            key = f"request/{p['in']}/{p['name']}"
            if row.description:
                p["description"] = row.description
                prov[f"{key}/description"] = ENRICHMENT
            if row.required is not None and p["in"] != "path":
                p["required"] = row.required
                prov[f"{key}/required"] = ENRICHMENT
            schema = p.setdefault("schema", {})
            if "type" not in schema and row.type:
                schema.update(_schema_for_type(row.type))
                prov[f"{key}/type"] = ENRICHMENT
            continue
        if use_body:
            prop = body["properties"][body_key]
            key = f"request/body/{body_key}"
            if row.description:
                prop["description"] = row.description
                prov[f"{key}/description"] = ENRICHMENT
            if row.required is not None:
                names = [n for n in body.get("required", []) if n != body_key]
                _set_required(body, names + ([body_key] if row.required else []))
                prov[f"{key}/required"] = ENRICHMENT
            if "type" not in prop and row.type:
                prop.update(_schema_for_type(row.type))
                prov[f"{key}/type"] = ENRICHMENT
            continue

        # enrichment-only parameter
        location = row.location or ("query" if method in BODYLESS_METHODS else "body")
        if location == "body" and method in BODYLESS_METHODS:
            location = "query"
        if location == "header" and lname in IGNORED_HEADERS:
            notes.append(f"skipped header {row.name}: not expressible as an OAS parameter")
            continue
        if location == "path" and "{" + row.name + "}" not in path:
            notes.append(f"skipped path parameter {row.name}: not in path template {path}")
            continue
        key = f"request/{location}/{row.name}"
        if location == "body":
            body = body_object(create=True)
            if body is None:
                notes.append(f"skipped body field {row.name}: request body is not an object")
                continue
            prop = _schema_for_type(row.type)
            if row.description:
                prop["description"] = row.description
            body["properties"][row.name] = prop
            if row.required:
                _set_required(body, body.get("required", []) + [row.name])
        else:
            entry: dict[str, Any] = {"name": row.name, "in": location}
            if row.description:
                entry["description"] = row.description
            if location == "path":
                entry["required"] = True
            elif row.required is not None:
                entry["required"] = row.required
            entry["schema"] = _schema_for_type(row.type)
            params.append(entry)
        for f in ("type", "location", "required", "description"):
            prov[f"{key}/{f}"] = ENRICHMENT
    if not params:
        op.pop("parameters", None)


def _enrichment_dict(node: JsonSchemaNode) -> dict:
    return node.to_dict(keep_empty_required=False)


def _mark_all(prov: dict[str, str], prefix: str, schema: dict) -> None:
    obj = _object_of(schema)
    for name, child in (obj.get("properties") or {}).items():
        path = f"{prefix}.{name}" if prefix else name
        for f in ("type", "required", "description"):
            prov[f"response/{path}/{f}"] = ENRICHMENT
        _mark_all(prov, path, child)


def _merge_response_node(base: dict, enr: JsonSchemaNode, prefix: str, prov: dict[str, str]) -> None:
    if enr.description:
        base["description"] = enr.description
        if prefix:
            prov[f"response/{prefix}/description"] = ENRICHMENT
    if "type" not in base and enr.type:
        base["type"] = enr.type
        if enr.type == "array":
            base.setdefault("items", {})
        if prefix:
            prov[f"response/{prefix}/type"] = ENRICHMENT
    base_obj = _object_of(base)
    enr_obj = enr
    while enr_obj.type == "array" and enr_obj.items is not None:
        enr_obj = enr_obj.items
    if base_obj is not base and enr_obj is not enr and enr_obj.description and "description" not in base_obj:
        base_obj["description"] = enr_obj.description
    if base_obj.get("type") != "object":
        return  # base type wins; cannot hang properties on a non-object
    props = base_obj.setdefault("properties", {})
    for name, child in enr_obj.properties.items():
        path = f"{prefix}.{name}" if prefix else name
        key = next((k for k in props if k.lower() == name.lower()), None)
        if key is None:
            props[name] = _enrichment_dict(child)
            for f in ("type", "required", "description"):
                prov[f"response/{path}/{f}"] = ENRICHMENT
            _mark_all(prov, path, props[name])
        else:
            _merge_response_node(props[key], child, f"{prefix}.{key}" if prefix else key, prov)
    if enr_obj.required is not None:
        mapped = []
        for name in enr_obj.required:
            key = next((k for k in props if k.lower() == name.lower()), None)
            if key is not None:
                mapped.append(key)
        _set_required(base_obj, mapped)
        for k in props:
            prov[f"response/{prefix + '.' if prefix else ''}{k}/required"] = ENRICHMENT


def merge(
    base: OasDocument,
    req: EnrichmentTable | None = None,
    resp: ResponseEnrichmentSchema | None = None,
    notes: list[str] | None = None,
) -> OasDocument:
    """Fold enrichment into a copy of ``base``.

    Descriptions and required flags come from the enrichment. Types and
    locations stay as the base has them. Parameters only the enrichment
    knows about are added. Path parameters stay required because OAS
    demands it.
    """
    doc = base.copy()
    notes = notes if notes is not None else []
    path, method, op = doc.single_operation()
    if req is not None:
        _merge_request(doc, path, method, op, req, notes)
    if resp is not None:
        status, schema = response_schema_of(op)
        if schema is None:
            responses = op.setdefault("responses", {})
            status = status or "200"
            entry = responses.setdefault(status, {"description": "Successful response"})
            entry["content"] = {JSON_MEDIA: {"schema": _enrichment_dict(resp.root)}}
            _mark_all(doc.provenance, "", entry["content"][JSON_MEDIA]["schema"])
        else:
            _merge_response_node(schema, resp.root, "", doc.provenance)
    return doc
