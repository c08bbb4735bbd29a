"""Deterministic stand-in for a text-generation model.

Skeleton and schema answers come from the builder's own rules. Enrichment
answers are read off parameter tables and definition lists in the scope.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass

from ..builder.schema import JsonSchemaNode, infer_from_text
from ..builder.skeleton import generate_skeleton
from ..enrich import (
    EnrichmentTable,
    ParameterRow,
    map_header,
    normalize_location,
    normalize_type,
    parse_required,
)
from ..errors import MalformedTsv, NotJson, OracleUnsupported, ParseFailure
from ..extractor import EndpointExamplePair, ParsedRequest, RequestExample
from ..ingest import DomNode, parse_dom, text_content
from .tasks import Task, parse_schema_output, parse_skeleton_output

__all__ = [
    "reference_oracle",
    "extract_documented_rows",
    "DocumentedRow",
    "parse_schema_output",
    "parse_skeleton_output",
    "skeleton_payload",
]

_HEADINGS = {"h1", "h2", "h3", "h4", "h5", "h6", "caption", "legend", "summary"}
_LABEL_WORDS = re.compile(
    r"\b(parameters?|params|arguments?|fields?|attributes?|properties|body|headers?|"
    r"query|path|responses?|returns?|request|payload|form)\b",
    re.IGNORECASE,
)
_RESPONSE_WORDS = re.compile(r"\b(responses?|returns?|returned|result|output)\b", re.IGNORECASE)
_LABEL_MAX_CHARS = 60


@dataclass(frozen=True)
class DocumentedRow:
    row: ParameterRow
    side: str  # "request" or "response"


def skeleton_payload(pair: EndpointExamplePair, documentation: str = "") -> str:
    return json.dumps(
        {
            "request": pair.request.parsed.to_dict(),
            "raw_text": pair.request.raw_text,
            "documentation": documentation,
        },
        sort_keys=True,
    )


# ---------------------------------------------------------------------------
# table reading
# ---------------------------------------------------------------------------


def _cells(row: DomNode) -> list[DomNode]:
    return [c for c in row.children if c.tag in ("td", "th")]


def _rows(table: DomNode) -> list[DomNode]:
    out = []

    def walk(n: DomNode) -> None:
        for c in n.children:
            if c.tag == "tr":
                out.append(c)
            elif c.tag in ("thead", "tbody", "tfoot"):
                walk(c)

    walk(table)
    return out


def _cell_text(node: DomNode) -> str:
    return re.sub(r"\s+", " ", text_content(node)).strip()


def _split_name(cell: str) -> tuple[str, str]:
    """First token is the name; the rest may carry type or required hints."""
    cell = cell.strip().strip("`*\"'").strip()
    parts = cell.split(None, 1)
    if not parts:
        return "", ""
    name = parts[0].strip("`*\"',:;()").rstrip("*")
    return name, (parts[1] if len(parts) > 1 else "")


def _hint_required(text: str) -> bool | None:
    low = text.lower()
    if re.search(r"\boptional\b", low):
        return False
    if re.search(r"\brequired\b", low):
        return True
    return None


def _hint_type(text: str) -> str | None:
    for word in re.findall(r"[A-Za-z][\w\-\[\]]*", text):
        t = normalize_type(word)
        if t is not None:
            return t
    return None


def _guess_column(values: list[str]) -> str | None:
    filled = [v for v in values if v]
    if not filled:
        return None
    votes: Counter[str] = Counter()
    for v in filled:
        if normalize_location(v) is not None:
            votes["location"] += 1
        elif parse_required(v) is not None:
            votes["required"] += 1
        elif normalize_type(v) is not None and len(v.split()) <= 2:
            votes["type"] += 1
        else:
            votes["description"] += 1
    col, n = votes.most_common(1)[0]
    return col if n * 2 > len(filled) else "description"


def _table_rows(table: DomNode) -> list[ParameterRow]:
    rows = _rows(table)
    if not rows:
        return []
    first = [_cell_text(c) for c in _cells(rows[0])]
    mapping = map_header(first)
    has_header = any(c.tag == "th" for c in _cells(rows[0])) or len(mapping) >= 2
    body = rows[1:] if has_header else rows
    grid = [[_cell_text(c) for c in _cells(r)] for r in body]
    grid = [g for g in grid if any(g)]
    if not grid:
        return []
    width = max(len(g) for g in grid)
    if not has_header or "name" not in mapping.values():
        mapping = {0: "name"}
        for i in range(1, width):
            guess = _guess_column([g[i] if i < len(g) else "" for g in grid])
            if guess and guess not in mapping.values():
                mapping[i] = guess
    out = []
    for g in grid:
        values = {col: (g[i] if i < len(g) else "") for i, col in mapping.items()}
        name, rest = _split_name(values.get("name", ""))
        if not name:
            continue
        description = values.get("description") or None
        typ = normalize_type(values.get("type")) or _hint_type(rest)
        required = parse_required(values.get("required")) if "required" in values else None
        if required is None:
            required = _hint_required(rest)
        if required is None and description:
            lead = description.split(".")[0]
            if len(lead.split()) <= 2:
                required = _hint_required(lead)
        out.append(
            ParameterRow(
                name=name,
                type=typ,
                required=required,
                location=normalize_location(values.get("location")),
                description=description,
            )
        )
    return out


def _dl_rows(dl: DomNode) -> list[ParameterRow]:
    out = []
    current: tuple[str, str] | None = None
    for child in dl.children:
        if child.tag == "dt":
            current = _split_name(_cell_text(child))
        elif child.tag == "dd" and current is not None:
            name, rest = current
            if name:
                out.append(
                    ParameterRow(
                        name=name,
                        type=_hint_type(rest),
                        required=_hint_required(rest),
                        description=_cell_text(child) or None,
                    )
                )
            current = None
    return out


def _label_location(label: str) -> str | None:
    low = label.lower()
    for word, loc in (("path", "path"), ("query", "query"), ("header", "header"),
                      ("body", "body"), ("form", "body"), ("payload", "body")):
        if re.search(rf"\b{word}", low):
            return loc
    return None


def _is_label(node: DomNode) -> bool:
    if node.tag in _HEADINGS:
        return True
    if node.tag in ("table", "dl", "tr", "td", "th", "dt", "dd", "li", "pre", "code"):
        return False
    if any(c.is_element and c.tag not in ("strong", "b", "em", "i", "span", "code") for c in node.children):
        return False
    text = _cell_text(node)
    return bool(text) and len(text) <= _LABEL_MAX_CHARS and _LABEL_WORDS.search(text) is not None


def extract_documented_rows(html: str) -> list[DocumentedRow]:
    """Parameter rows from tables and definition lists, in document order.

    The nearest preceding heading decides the side (request or response)
    and supplies a location when the table has no location column.
    """
    try:
        tree = parse_dom(html)
    except ParseFailure:
        return []
    out: list[DocumentedRow] = []
    label = ""
    consumed: set[int] = set()
    for node in tree.elements():
        if node.hidden or node.node_id in consumed:
            continue
        if node.tag in ("table", "dl"):
            rows = _table_rows(node) if node.tag == "table" else _dl_rows(node)
            for n in node.iter():
                consumed.add(n.node_id)
            side = "response" if _RESPONSE_WORDS.search(label) else "request"
            hint = _label_location(label) if side == "request" else None
            for r in rows:
                if side == "request" and r.location is None and hint is not None:
                    r = ParameterRow(r.name, r.type, r.required, hint, r.description)
                out.append(DocumentedRow(r, side))
        elif _is_label(node):
            label = _cell_text(node)
            for n in node.iter():
                consumed.add(n.node_id)
    return out


# ---------------------------------------------------------------------------
# answers per task
# ---------------------------------------------------------------------------


def _request_tsv(html: str) -> str:
    rows = [d.row for d in extract_documented_rows(html) if d.side == "request"]
    if not rows:
        raise OracleUnsupported("no request parameter table in the input")
    seen, unique = set(), []
    for r in rows:
        key = (r.name.lower(), r.location)
        if key not in seen:
            seen.add(key)
            unique.append(r)
    try:
        return EnrichmentTable(tuple(unique)).to_tsv()
    except MalformedTsv as exc:  # pragma: no cover - rows are already normalized
        raise OracleUnsupported(str(exc)) from exc


def _response_schema(html: str) -> str:
    rows = [d.row for d in extract_documented_rows(html) if d.side == "response"]
    if not rows:
        raise OracleUnsupported("no response field table in the input")
    root = JsonSchemaNode("object")

    def owner_of(node: JsonSchemaNode) -> JsonSchemaNode:
        # arrays are transparent: fields of "items.id" live in the element object
        while node.type == "array":
            if node.items is None:
                node.items = JsonSchemaNode("object")
            node = node.items
        return node

    for row in rows:
        # "items[].sku" names sku inside the elements of the items array
        tokens = re.findall(r"([^.\[\]]+)(\[\])?", row.name)
        if not tokens:
            continue
        parent = root
        for p, marker in tokens[:-1]:
            obj = owner_of(parent)
            if obj.type != "object":
                break
            if p not in obj.properties:
                obj.properties[p] = JsonSchemaNode("array" if marker else "object")
            parent = obj.properties[p]
        obj = owner_of(parent)
        if obj.type != "object":
            continue
        leaf, leaf_marker = tokens[-1]
        node = obj.properties.get(leaf)
        if node is None and leaf_marker and row.type != "array":
            # "tags[]" of type string is an array of strings
            node = JsonSchemaNode("array", items=JsonSchemaNode(row.type) if row.type else None)
            obj.properties[leaf] = node
        elif node is None:
            node = JsonSchemaNode(row.type)
            obj.properties[leaf] = node
        elif row.type is not None and node.type == "object" and row.type == "array":
            node.items = JsonSchemaNode("object", properties=node.properties)
            node.properties = {}
            node.type = "array"
        elif node.type is None:
            node.type = row.type
        if row.description:
            node.description = row.description
        if row.required is not None:
            if obj.required is None:
                obj.required = []
            if row.required and leaf not in obj.required:
                obj.required.append(leaf)
    for _path, node, owner in root.walk():
        if owner.required is not None:
            owner.required = sorted(owner.required)
    if root.required is not None:
        root.required = sorted(root.required)
    return json.dumps(root.to_dict(keep_empty_required=True), indent=2, ensure_ascii=False)


def _skeleton(payload: str) -> str:
    try:
        data = json.loads(payload)
        parsed = ParsedRequest.from_dict(data["request"])
    except (ValueError, KeyError, TypeError) as exc:
        raise OracleUnsupported(f"skeleton payload is not a parsed request: {exc}") from exc
    pair = EndpointExamplePair(RequestExample(0, data.get("raw_text", ""), parsed))
    skeleton = generate_skeleton(pair, data.get("documentation", ""))
    return json.dumps(skeleton.to_dict(), indent=2, ensure_ascii=False)


def _schema(payload: str) -> str:
    try:
        node = infer_from_text(payload)
    except NotJson as exc:
        raise OracleUnsupported(f"schema payload is not JSON: {exc}") from exc
    return json.dumps(node.to_dict(keep_empty_required=True), indent=2, ensure_ascii=False)


def reference_oracle(task: Task | str, input_payload: str) -> str:
    """Answer ``task`` for ``input_payload`` without any model."""
    task = Task(task)
    if task is Task.SKELETON:
        return _skeleton(input_payload)
    if task is Task.SCHEMA:
        return _schema(input_payload)
    if task is Task.REQUEST_ENRICHMENT:
        return _request_tsv(input_payload)
    return _response_schema(input_payload)
