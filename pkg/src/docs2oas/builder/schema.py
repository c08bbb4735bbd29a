"""JSON schema nodes, example-driven inference, segmentation and reassembly."""

from __future__ import annotations

import copy
import json
import warnings
from dataclasses import dataclass, field
from typing import Any, Iterable

from ..errors import (
    InconsistentPrefixes,
    InvalidThreshold,
    MalformedSchema,
    MergeWarning,
    NotJson,
)

SCHEMA_TYPES = ("object", "array", "string", "number", "integer", "boolean")


@dataclass
class JsonSchemaNode:
    type: str | None = None
    properties: dict[str, JsonSchemaNode] = field(default_factory=dict)
    items: JsonSchemaNode | None = None
    # None means "no required list given", which differs from an explicit [].
    required: list[str] | None = None
    nullable: bool = False
    description: str | None = None

    def __post_init__(self) -> None:
        if self.type is not None and self.type not in SCHEMA_TYPES:
            raise MalformedSchema(f"unknown schema type {self.type!r}")
        if self.properties and self.type != "object":
            raise MalformedSchema("properties are only allowed on objects")
        if self.items is not None and self.type != "array":
            raise MalformedSchema("items are only allowed on arrays")
        missing = set(self.required or ()) - set(self.properties)
        if missing:
            raise MalformedSchema(f"required names without properties: {sorted(missing)}")

    def to_dict(self, keep_empty_required: bool = False) -> dict[str, Any]:
        """Plain JSON schema; OAS 3.0 forbids ``required: []`` so it is omitted by default."""
        out: dict[str, Any] = {}
        if self.type is not None:
            out["type"] = self.type
        if self.nullable:
            out["nullable"] = True
        if self.description:
            out["description"] = self.description
        if self.type == "object":
            out["properties"] = {
                k: v.to_dict(keep_empty_required) for k, v in self.properties.items()
            }
            if self.required or (keep_empty_required and self.required is not None):
                out["required"] = list(self.required)
        if self.type == "array":
            out["items"] = self.items.to_dict(keep_empty_required) if self.items is not None else {}
        return out

    @classmethod
    def from_dict(cls, data: Any) -> JsonSchemaNode:
        """Build from a JSON-schema-like dict, checking the node invariants."""
        if not isinstance(data, dict):
            raise MalformedSchema(f"schema must be an object, got {type(data).__name__}")
        kind = data.get("type")
        if isinstance(kind, list):  # ["string", "null"]
            non_null = [k for k in kind if k != "null"]
            if len(non_null) > 1:
                raise MalformedSchema(f"union types are not supported: {kind}")
            data = {**data, "type": non_null[0] if non_null else None,
                    "nullable": data.get("nullable") or "null" in kind}
            kind = data["type"]
        if kind is None and "properties" in data:
            kind = "object"
        if kind is None and "items" in data:
            kind = "array"
        props_raw = data.get("properties") or {}
        if not isinstance(props_raw, dict):
            raise MalformedSchema("properties must be an object")
        required = data.get("required")
        if required is not None and (
            not isinstance(required, list) or not all(isinstance(r, str) for r in required)
        ):
            raise MalformedSchema("required must be a list of names")
        items_raw = data.get("items")
        description = data.get("description")
        if description is not None and not isinstance(description, str):
            raise MalformedSchema("description must be text")
        return cls(
            type=kind,
            properties={str(k): cls.from_dict(v) for k, v in props_raw.items()},
            items=cls.from_dict(items_raw) if isinstance(items_raw, dict) and items_raw else None,
            required=None if required is None else list(dict.fromkeys(required)),
            nullable=bool(data.get("nullable", False)),
            description=description,
        )

    def walk(self, prefix: str = "") -> Iterable[tuple[str, JsonSchemaNode, JsonSchemaNode]]:
        """Yield ``(dotted_path, node, owning_object)`` for every property.

        Arrays are transparent: ``data.id`` names ``id`` inside the items of
        the ``data`` array.
        """
        obj = self
        while obj.type == "array" and obj.items is not None:
            obj = obj.items
        for name, child in obj.properties.items():
            path = f"{prefix}.{name}" if prefix else name
            yield path, child, obj
            yield from child.walk(path)


# ---------------------------------------------------------------------------
# inference
# ---------------------------------------------------------------------------


def _kind(value: Any) -> str | None:
    if value is None:
        return None
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "integer"
    if isinstance(value, float):
        return "integer" if value.is_integer() else "number"
    if isinstance(value, str):
        return "string"
    if isinstance(value, list):
        return "array"
    if isinstance(value, dict):
        return "object"
    raise NotJson(f"not a JSON value: {type(value).__name__}")


def _infer_observed(values: list[Any]) -> JsonSchemaNode:
    """Schema for all values seen at one position.

    Pooling every observation (rather than folding pairwise) keeps the
    result independent of element order: the contents of a later array are
    kept even when an earlier scalar decided the slot's type.
    """
    kinds = [_kind(v) for v in values]
    kind = None
    for k in kinds:
        if kind is None:
            kind = k
        elif {kind, k} == {"integer", "number"}:
            kind = "number"
    node = JsonSchemaNode(kind, nullable=None in kinds)
    if kind == "object":
        objs = [v for v in values if isinstance(v, dict)]
        names = list(dict.fromkeys(str(k) for o in objs for k in o))
        node.properties = {
            n: _infer_observed([o[n] for o in objs if n in o]) for n in names
        }
        node.required = sorted(set.intersection(*({str(k) for k in o} for o in objs)))
    elif kind == "array":
        elems = [e for v in values if isinstance(v, list) for e in v]
        node.items = _infer_observed(elems) if elems else None
    return node


def _finalize(node: JsonSchemaNode) -> JsonSchemaNode:
    # Only nulls were seen: default to a nullable string.
    if node.type is None:
        node.type = "string"
    for child in node.properties.values():
        _finalize(child)
    if node.items is not None:
        _finalize(node.items)
    return node


def infer_from_value(value: Any) -> JsonSchemaNode:
    """Deterministic schema for one example value.

    Strings, booleans, integers (including ``1.0``) and other numbers map to
    their JSON-schema types. Object keys are all required. Array items pool
    every element: the first type seen wins (integer and number widen to
    number), keys required by every object stay required, and a ``null``
    marks its slot nullable.
    """
    return _finalize(_infer_observed([value]))


def infer_from_text(json_text: str) -> JsonSchemaNode:
    try:
        value = json.loads(json_text)
    except ValueError as exc:
        raise NotJson(str(exc)) from exc
    return infer_from_value(value)


# ---------------------------------------------------------------------------
# segmentation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    index: int
    text: str
    json_pointer_prefix: str

    def value(self) -> Any:
        return json.loads(self.text)


def escape_pointer_token(token: str) -> str:
    return token.replace("~", "~0").replace("/", "~1")


def split_pointer(pointer: str) -> list[str]:
    if pointer == "":
        return []
    if not pointer.startswith("/"):
        raise InconsistentPrefixes(f"JSON pointer must start with '/': {pointer!r}")
    return [t.replace("~1", "/").replace("~0", "~") for t in pointer[1:].split("/")]


def _dumps(value: Any) -> str:
    return json.dumps(value, indent=2, ensure_ascii=False)


def _line_count(value: Any) -> int:
    return _dumps(value).count("\n") + 1


def segment_example(json_text: str, line_threshold: int = 40) -> list[Segment]:
    """Cut a JSON example into pieces of at most ``line_threshold`` lines.

    Cuts fall on object-key boundaries. An oversized object value is split
    recursively under its own pointer prefix. Any other oversized value
    becomes a single segment.
    """
    if not isinstance(line_threshold, int) or line_threshold < 1:
        raise InvalidThreshold(f"line threshold must be >= 1, got {line_threshold!r}")
    try:
        value = json.loads(json_text)
    except ValueError as exc:
        raise NotJson(str(exc)) from exc

    pieces: list[tuple[str, Any]] = []

    def split(obj: Any, prefix: str) -> None:
        if not isinstance(obj, dict) or _line_count(obj) <= line_threshold:
            pieces.append((prefix, obj))
            return
        current: dict[str, Any] = {}
        current_lines = 2
        for key, val in obj.items():
            member = _line_count(val)
            if member + 2 > line_threshold:
                if current:
                    pieces.append((prefix, current))
                    current, current_lines = {}, 2
                if isinstance(val, dict) and val:
                    split(val, f"{prefix}/{escape_pointer_token(key)}")
                else:
                    pieces.append((prefix, {key: val}))
                continue
            if current and current_lines + member > line_threshold:
                pieces.append((prefix, current))
                current, current_lines = {}, 2
            current[key] = val
            current_lines += member
        if current:
            pieces.append((prefix, current))

    split(value, "")
    return [Segment(i, _dumps(v), p) for i, (p, v) in enumerate(pieces)]


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


def _merge_into(target: JsonSchemaNode, part: JsonSchemaNode, where: str) -> None:
    target.nullable = target.nullable or part.nullable
    if target.description is None:
        target.description = part.description
    if target.type != part.type:
        warnings.warn(
            MergeWarning(f"{where or '/'}: kept type {target.type!r}, dropped {part.type!r}"),
            stacklevel=3,
        )
        return
    if target.type == "object":
        for key, sub in part.properties.items():
            if key not in target.properties:
                target.properties[key] = copy.deepcopy(sub)
            elif target.properties[key] != sub:
                _merge_into(target.properties[key], sub, f"{where}/{escape_pointer_token(key)}")
        if target.required is not None or part.required is not None:
            target.required = sorted(set(target.required or ()) | set(part.required or ()))
    elif target.type == "array":
        if target.items is None:
            target.items = copy.deepcopy(part.items)
        elif part.items is not None and target.items != part.items:
            _merge_into(target.items, part.items, f"{where}/items")


def aggregate_segments(parts: list[tuple[str, JsonSchemaNode]]) -> JsonSchemaNode:
    """Graft per-segment schemas back into one schema.

    Keys created to reach a prefix are marked required, as inference would
    have done on the unsplit example. Conflicting primitive types keep the
    first one seen and emit a :class:`MergeWarning`.
    """
    result: JsonSchemaNode | None = None
    for prefix, schema in parts:
        tokens = split_pointer(prefix)
        if result is None:
            if not tokens:
                result = copy.deepcopy(schema)
                continue
            result = JsonSchemaNode("object")
        node = result
        for depth, token in enumerate(tokens):
            if node.type != "object":
                raise InconsistentPrefixes(
                    f"prefix {prefix!r} descends through a {node.type} at depth {depth}"
                )
            if token not in node.properties:
                node.properties[token] = JsonSchemaNode("object")
                node.required = sorted(set(node.required or ()) | {token})
            node = node.properties[token]
        _merge_into(node, schema, prefix)
    if result is None:
        raise InconsistentPrefixes("nothing to aggregate")
    return result
