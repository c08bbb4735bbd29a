"""Skeleton OAS: servers, method, path, security and non-body parameters."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from urllib.parse import unquote, urlsplit

from ..errors import MalformedSchema
from ..extractor import HTTP_METHODS, EndpointExamplePair, ParsedRequest

OPENAPI_VERSION = "3.0.3"

# Per OAS 3.0 these header parameters are ignored, so they are never emitted.
IGNORED_HEADERS = {"authorization", "content-type", "accept"}
_NOT_PARAMETERS = IGNORED_HEADERS | {
    "content-length", "user-agent", "host", "accept-encoding", "connection",
    "cache-control", "cookie",
}
_API_KEY_HEADER = re.compile(
    r"^(x-)?(api[-_]?key|auth[-_]?token|access[-_]?token|api[-_]?token)$|^x-.*-(key|token)$",
    re.IGNORECASE,
)
_INT_RE = re.compile(r"^-?\d+$")
_NUM_RE = re.compile(r"^-?(\d+\.\d*|\.\d+|\d+(\.\d*)?[eE][-+]?\d+)$")
_PATH_TOKEN = re.compile(r"(?:https?://[^\s/\"'<>]+)?(/[^\s\"'<>?#`]*)")


def literal_type(value: str) -> str:
    """Primitive type of a query/header/path literal."""
    text = value.strip()
    if _INT_RE.match(text):
        return "integer"
    if _NUM_RE.match(text):
        return "number"
    if text.lower() in ("true", "false"):
        return "boolean"
    return "string"


@dataclass(frozen=True)
class SkeletonParam:
    name: str
    location: str
    type: str = "string"


@dataclass
class OasSkeleton:
    path: str
    method: str
    servers: list[str] = field(default_factory=list)
    title: str = "API"
    version: str = "1.0.0"
    openapi_version: str = OPENAPI_VERSION
    security_schemes: dict[str, dict] = field(default_factory=dict)
    parameters: list[SkeletonParam] = field(default_factory=list)
    has_request_body: bool = False

    def __post_init__(self) -> None:
        if not self.path.startswith("/"):
            raise MalformedSchema(f"path must begin with '/': {self.path!r}")
        if self.method not in HTTP_METHODS:
            raise MalformedSchema(f"unknown method {self.method!r}")
        keys = [(p.name, p.location) for p in self.parameters]
        if len(keys) != len(set(keys)):
            raise MalformedSchema("duplicate (name, location) parameters")
        for p in self.parameters:
            if p.location not in ("path", "query", "header"):
                raise MalformedSchema(f"bad parameter location {p.location!r}")

    def to_dict(self) -> dict:
        return {
            "openapi": self.openapi_version,
            "info": {"title": self.title, "version": self.version},
            "servers": list(self.servers),
            "path": self.path,
            "method": self.method,
            "securitySchemes": self.security_schemes,
            "parameters": [
                {"name": p.name, "in": p.location, "type": p.type} for p in self.parameters
            ],
            "hasRequestBody": self.has_request_body,
        }

    @classmethod
    def from_dict(cls, data: dict) -> OasSkeleton:
        if not isinstance(data, dict):
            raise MalformedSchema("skeleton must be a JSON object")
        try:
            info = data.get("info") or {}
            return cls(
                path=data["path"],
                method=str(data["method"]).lower(),
                servers=[str(s) for s in data.get("servers", [])],
                title=str(info.get("title", "API")),
                version=str(info.get("version", "1.0.0")),
                openapi_version=str(data.get("openapi", OPENAPI_VERSION)),
                security_schemes=dict(data.get("securitySchemes") or {}),
                parameters=[
                    SkeletonParam(str(p["name"]), str(p["in"]), str(p.get("type", "string")))
                    for p in data.get("parameters", [])
                ],
                has_request_body=bool(data.get("hasRequestBody", False)),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise MalformedSchema(f"incomplete skeleton: {exc}") from exc


def _template_name(segment: str) -> str | None:
    m = re.fullmatch(r"\{([^{}/]+)\}|:([A-Za-z_][A-Za-z0-9_]*)", segment)
    if not m:
        return None
    return m.group(1) or m.group(2)


def _segments(path: str) -> list[str]:
    return [s for s in path.split("/") if s != ""]


def template_path(example_path: str, documentation: str = "") -> tuple[str, dict[str, str]]:
    """Apply ``{name}``/``:name`` markers found in documentation text.

    Returns the templated path and a ``name -> example value`` map. Markers
    never come from the shape of values, only from text that spells them out.
    """
    example = _segments(unquote(example_path))
    params: dict[str, str] = {}
    # markers already present in the example itself
    own = [(_template_name(s), s) for s in example]
    if any(name for name, _ in own):
        out = []
        for name, seg in own:
            if name:
                params[name] = ""
                out.append("{" + name + "}")
            else:
                out.append(seg)
        return "/" + "/".join(out), params

    best: tuple[tuple, list[str], dict[str, str]] | None = None
    for order, m in enumerate(_PATH_TOKEN.finditer(documentation)):
        doc = _segments(unquote(m.group(1)).rstrip(".,;:)"))
        names = [_template_name(s) for s in doc]
        if not any(names) or len(doc) > len(example):
            continue
        offset = len(example) - len(doc)
        values: dict[str, str] = {}
        ok = True
        literal_hits = 0
        for seg, name, ex in zip(doc, names, example[offset:]):
            if name:
                values[name] = ex
            elif seg.lower() == ex.lower():
                literal_hits += 1
            else:
                ok = False
                break
        if not ok:
            continue
        key = (offset != 0, -literal_hits, order)
        if best is None or key < best[0]:
            templated = example[:offset] + [
                "{" + n + "}" if n else ex for n, ex in zip(names, example[offset:])
            ]
            best = (key, templated, values)
    if best is None:
        return "/" + "/".join(example) if example else "/", {}
    return "/" + "/".join(best[1]), best[2]


def _security(req: ParsedRequest) -> tuple[dict[str, dict], set[str]]:
    schemes: dict[str, dict] = {}
    consumed: set[str] = set()
    if req.basic_auth:
        schemes["basicAuth"] = {"type": "http", "scheme": "basic"}
    for name, value in req.header_params:
        lower = name.lower()
        if lower == "authorization":
            kind = value.split(" ", 1)[0].lower() if value else ""
            if kind == "bearer":
                schemes["bearerAuth"] = {"type": "http", "scheme": "bearer"}
            elif kind == "basic":
                schemes["basicAuth"] = {"type": "http", "scheme": "basic"}
            else:
                schemes["apiKeyAuth"] = {"type": "apiKey", "in": "header", "name": name}
            consumed.add(lower)
        elif _API_KEY_HEADER.match(name):
            schemes["apiKeyAuth"] = {"type": "apiKey", "in": "header", "name": name}
            consumed.add(lower)
    return schemes, consumed


def generate_skeleton(pair: EndpointExamplePair, documentation: str = "") -> OasSkeleton:
    """Deterministic skeleton for one request example.

    ``documentation`` is reference text from the endpoint's scope and is only
    used to discover path templates such as ``GET /info/{id}``.
    """
    req = pair.request.parsed
    path, path_values = template_path(req.path, documentation + "\n" + pair.request.raw_text)
    params: list[SkeletonParam] = []
    for name, value in path_values.items():
        params.append(SkeletonParam(name, "path", literal_type(value) if value else "string"))
    seen = {(p.name, p.location) for p in params}
    for name, value in req.query_params:
        if (name, "query") not in seen:
            params.append(SkeletonParam(name, "query", literal_type(value)))
            seen.add((name, "query"))
    schemes, consumed = _security(req)
    for name, value in req.header_params:
        lower = name.lower()
        if lower in consumed or lower in _NOT_PARAMETERS or (name, "header") in seen:
            continue
        params.append(SkeletonParam(name, "header", literal_type(value)))
        seen.add((name, "header"))
    host = urlsplit(req.server).netloc if req.server else ""
    return OasSkeleton(
        path=path,
        method=req.method,
        servers=[req.server] if req.server else [],
        title=f"{host} API" if host else "API",
        security_schemes=schemes,
        parameters=params,
        has_request_body=req.body is not None,
    )
