"""Find request/response examples on a page and pair them up."""

from __future__ import annotations

import json
import re
import shlex
from dataclasses import dataclass
from urllib.parse import parse_qsl, urlsplit, urlunsplit

from .errors import MalformedExample
from .ingest import DomNode, DomTree, text_content

__all__ = [
    "ParsedRequest",
    "RequestExample",
    "ResponseExample",
    "EndpointExamplePair",
    "find_request_examples",
    "find_response_examples",
    "pair_examples",
    "parse_curl",
    "parse_request_text",
    "split_response_text",
    "extract_pairs",
    "example_parameter_names",
    "flatten_json_keys",
]

HTTP_METHODS = ("get", "post", "put", "patch", "delete", "head", "options")
CODE_TAGS = frozenset({"pre", "code", "samp", "kbd", "textarea"})

_CURL_RE = re.compile(r"^\s*(?:\$\s*)?curl\b", re.IGNORECASE)
_HTTP_LINE_RE = re.compile(
    r"^\s*(GET|POST|PUT|PATCH|DELETE|HEAD|OPTIONS)\s+((?:https?://\S+)|/\S*)(?:\s+HTTP/\d(?:\.\d)?)?\s*$"
)
_STATUS_RE = re.compile(r"^\s*HTTP/\d(?:\.\d)?\s+(\d{3})\b[^\n]*\n?")
_HEADER_LINE_RE = re.compile(r"^[A-Za-z0-9-]+:\s*.*$")

# curl options that consume the next token but do not shape the request
_CURL_SKIP_WITH_ARG = {
    "-o", "--output", "-A", "--user-agent", "-b", "--cookie", "-c", "--cookie-jar",
    "-e", "--referer", "-m", "--max-time", "--connect-timeout", "-w", "--write-out",
    "--retry", "-x", "--proxy", "--cacert", "--cert", "--key", "-T", "--upload-file",
    "-r", "--range", "--limit-rate", "-K", "--config", "--resolve", "-E",
}
_CURL_DATA_OPTS = {"-d", "--data", "--data-raw", "--data-binary", "--data-ascii", "--data-urlencode"}


@dataclass(frozen=True)
class ParsedRequest:
    method: str
    server: str
    path: str
    query_params: tuple[tuple[str, str], ...] = ()
    header_params: tuple[tuple[str, str], ...] = ()
    body: str | None = None
    body_is_json: bool = False
    basic_auth: bool = False

    @property
    def url(self) -> str:
        query = "&".join(f"{k}={v}" if v != "" else k for k, v in self.query_params)
        return self.server + self.path + (f"?{query}" if query else "")

    def header(self, name: str) -> str | None:
        for k, v in self.header_params:
            if k.lower() == name.lower():
                return v
        return None

    def json_body(self):
        return json.loads(self.body) if self.body_is_json and self.body else None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "server": self.server,
            "path": self.path,
            "query_params": [list(p) for p in self.query_params],
            "header_params": [list(p) for p in self.header_params],
            "body": self.body,
            "body_is_json": self.body_is_json,
            "basic_auth": self.basic_auth,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ParsedRequest:
        return cls(
            method=data["method"],
            server=data["server"],
            path=data["path"],
            query_params=tuple(tuple(p) for p in data.get("query_params", ())),
            header_params=tuple(tuple(p) for p in data.get("header_params", ())),
            body=data.get("body"),
            body_is_json=data.get("body_is_json", False),
            basic_auth=data.get("basic_auth", False),
        )


@dataclass(frozen=True)
class RequestExample:
    node_id: int
    raw_text: str
    parsed: ParsedRequest


@dataclass(frozen=True)
class ResponseExample:
    node_id: int
    raw_text: str
    is_json: bool
    body: str = ""
    status: int | None = None

    def json_value(self):
        return json.loads(self.body) if self.is_json else None


@dataclass(frozen=True)
class EndpointExamplePair:
    request: RequestExample
    response: ResponseExample | None = None


# ---------------------------------------------------------------------------
# request parsing
# ---------------------------------------------------------------------------


def _is_json_document(text: str | None) -> bool:
    if not text:
        return False
    try:
        value = json.loads(text)
    except ValueError:
        return False
    return isinstance(value, (dict, list))


def _split_url(url: str) -> tuple[str, str, tuple[tuple[str, str], ...]]:
    if "://" not in url:
        url = "http://" + url  # curl's default scheme
    parts = urlsplit(url)
    if not parts.netloc:
        raise MalformedExample(f"URL has no host: {url!r}")
    server = urlunsplit((parts.scheme.lower(), parts.netloc, "", "", ""))
    path = parts.path or "/"
    query = tuple(parse_qsl(parts.query, keep_blank_values=True))
    return server, path, query


def _clean_command(text: str) -> str:
    text = text.replace("\\\r\n", " ").replace("\\\n", " ")
    lines = [re.sub(r"^\s*\$\s+", "", line) for line in text.strip().splitlines()]
    return "\n".join(lines)


def parse_curl(text: str) -> ParsedRequest:
    """Parse a ``curl ...`` command (or an HTTP request line) into its parts.

    Method follows curl: ``-X`` wins, otherwise POST when data is sent and
    GET when it is not (``-G`` moves data into the query string).
    """
    if not text or not text.strip():
        raise MalformedExample("empty request text")
    if not _CURL_RE.match(text):
        return parse_request_text(text)
    try:
        tokens = shlex.split(_clean_command(text), posix=True)
    except ValueError as exc:
        raise MalformedExample(f"cannot tokenize command: {exc}") from exc
    # only the first command of a shell pipeline / sequence
    for stop in ("|", "&&", ";", ">"):
        if stop in tokens:
            tokens = tokens[: tokens.index(stop)]
    if not tokens or tokens[0].lower() != "curl":
        raise MalformedExample("not a curl command")

    method: str | None = None
    headers: list[tuple[str, str]] = []
    data: list[str] = []
    url: str | None = None
    force_get = head = basic = False
    json_flag = False
    form = False

    i = 1
    while i < len(tokens):
        tok = tokens[i]

        def value() -> str:
            nonlocal i
            i += 1
            if i >= len(tokens):
                raise MalformedExample(f"option {tok} needs a value")
            return tokens[i]

        if tok in ("-X", "--request"):
            method = value()
        elif tok.startswith("-X") and len(tok) > 2:
            method = tok[2:]
        elif tok in ("-H", "--header"):
            headers.append(_header(value()))
        elif tok.startswith("-H") and len(tok) > 2:
            headers.append(_header(tok[2:]))
        elif tok in _CURL_DATA_OPTS:
            data.append(value())
        elif tok.startswith("-d") and len(tok) > 2:
            data.append(tok[2:])
        elif tok == "--json":
            data.append(value())
            json_flag = True
        elif tok in ("-F", "--form"):
            value()
            form = True
        elif tok in ("-u", "--user"):
            value()
            basic = True
        elif tok in ("-G", "--get"):
            force_get = True
        elif tok in ("-I", "--head"):
            head = True
        elif tok == "--url":
            url = value()
        elif tok in _CURL_SKIP_WITH_ARG:
            value()
        elif tok.startswith("-"):
            pass  # boolean flag such as -s, -L, --compressed
        elif url is None:
            url = tok
        i += 1

    if url is None:
        raise MalformedExample("curl command has no URL")
    server, path, query = _split_url(url)
    body: str | None = "&".join(data) if data else None
    if force_get and body is not None:
        query = query + tuple(parse_qsl(body, keep_blank_values=True))
        body = None
    if method:
        method = method.lower()
    elif head:
        method = "head"
    elif force_get:
        method = "get"
    elif body is not None or form:
        method = "post"
    else:
        method = "get"
    if method not in HTTP_METHODS:
        raise MalformedExample(f"unsupported method {method!r}")
    if json_flag and not any(k.lower() == "content-type" for k, _ in headers):
        headers.append(("Content-Type", "application/json"))
    return ParsedRequest(
        method=method,
        server=server,
        path=path,
        query_params=query,
        header_params=tuple(headers),
        body=body,
        body_is_json=_is_json_document(body),
        basic_auth=basic,
    )


def _header(raw: str) -> tuple[str, str]:
    name, sep, val = raw.partition(":")
    if not sep or not name.strip():
        raise MalformedExample(f"bad header {raw!r}")
    return name.strip(), val.strip()


def parse_request_text(text: str) -> ParsedRequest:
    """Parse ``METHOD /path [HTTP/1.1]`` with optional headers and body."""
    if not text or not text.strip():
        raise MalformedExample("empty request text")
    lines = text.strip().splitlines()
    m = _HTTP_LINE_RE.match(lines[0])
    if not m:
        raise MalformedExample(f"not an HTTP request line: {lines[0]!r}")
    method, target = m.group(1).lower(), m.group(2)
    headers: list[tuple[str, str]] = []
    rest = lines[1:]
    while rest and rest[0].strip() and _HEADER_LINE_RE.match(rest[0].strip()):
        headers.append(_header(rest.pop(0).strip()))
    body = "\n".join(rest).strip() or None
    if target.startswith("/"):
        host = next((v for k, v in headers if k.lower() == "host"), None)
        if host:
            server, path, query = _split_url("https://" + host + target)
        else:
            parts = urlsplit(target)
            server, path = "", parts.path or "/"
            query = tuple(parse_qsl(parts.query, keep_blank_values=True))
    else:
        server, path, query = _split_url(target)
    headers = [(k, v) for k, v in headers if k.lower() != "host"]
    return ParsedRequest(
        method=method,
        server=server,
        path=path,
        query_params=query,
        header_params=tuple(headers),
        body=body,
        body_is_json=_is_json_document(body),
    )


# ---------------------------------------------------------------------------
# detection
# ---------------------------------------------------------------------------


def _looks_like_request(text: str, curl_only: bool = False) -> bool:
    stripped = text.strip()
    if _CURL_RE.match(stripped):
        return True
    if curl_only or not stripped:
        return False
    lines = stripped.splitlines()
    m = _HTTP_LINE_RE.match(lines[0])
    if not m:
        return False
    # A bare "GET /users/{id}" is a route signature, not an example.
    has_host = any(line.lower().startswith("host:") for line in lines[1:])
    return m.group(2).startswith("http") or has_host or "HTTP/" in lines[0]


def _code_blocks(tree: DomTree) -> list[DomNode]:
    """Outermost code-like elements, in document order."""
    blocks = []
    for node in tree.elements():
        if node.hidden or node.tag not in CODE_TAGS:
            continue
        if any(a.tag in CODE_TAGS for a in tree.ancestors(node)):
            continue
        blocks.append(node)
    return blocks


def _try_request(text: str, curl_only: bool = False) -> ParsedRequest | None:
    if not _looks_like_request(text, curl_only):
        return None
    try:
        return parse_curl(text)
    except MalformedExample:
        return None


def find_request_examples(tree: DomTree) -> list[RequestExample]:
    found: dict[int, RequestExample] = {}
    for block in _code_blocks(tree):
        text = text_content(block).strip()
        parsed = _try_request(text)
        if parsed is not None:
            found[block.node_id] = RequestExample(block.node_id, text, parsed)

    # Non-code elements whose whole text is a command, e.g. highlighted divs.
    # Keep the innermost element that still parses.
    covered = list(found)
    candidates: list[tuple[DomNode, str, ParsedRequest]] = []
    for node in tree.elements():
        if node.hidden or node.tag in CODE_TAGS or node.tag in ("html", "body"):
            continue
        if any(tree.contains(tree.node(c), node) or tree.contains(node, tree.node(c)) for c in covered):
            continue
        text = text_content(node).strip()
        parsed = _try_request(text, curl_only=True)
        if parsed is not None:
            candidates.append((node, text, parsed))
    for node, text, parsed in candidates:
        if any(other is not node and tree.is_ancestor(node, other) for other, _, _ in candidates):
            continue
        found[node.node_id] = RequestExample(node.node_id, text, parsed)
    return [found[k] for k in sorted(found)]


def split_response_text(text: str) -> tuple[int | None, str]:
    """Strip an ``HTTP/1.1 200 OK`` preamble and its header lines."""
    status = None
    m = _STATUS_RE.match(text)
    if m:
        status = int(m.group(1))
        text = text[m.end():]
        lines = text.splitlines()
        while lines and lines[0].strip() and _HEADER_LINE_RE.match(lines[0].strip()):
            lines.pop(0)
        text = "\n".join(lines)
    return status, text.strip()


def find_response_examples(tree: DomTree) -> list[ResponseExample]:
    request_ids = {r.node_id for r in find_request_examples(tree)}
    out = []
    for block in _code_blocks(tree):
        if block.node_id in request_ids:
            continue
        raw = text_content(block).strip()
        if not raw:
            continue
        status, body = split_response_text(raw)
        if _is_json_document(body):
            out.append(ResponseExample(block.node_id, raw, True, body, status))
        elif status is not None or body.startswith("<?xml"):
            out.append(ResponseExample(block.node_id, raw, False, body, status))
    return out


# ---------------------------------------------------------------------------
# pairing
# ---------------------------------------------------------------------------


def pair_examples(
    tree: DomTree, requests: list[RequestExample], responses: list[ResponseExample]
) -> list[EndpointExamplePair]:
    """Greedy, in document order: each request takes its nearest free response.

    Nearest means fewest tree edges; ties prefer responses after the request,
    then the smaller node id.
    """
    free = {r.node_id: r for r in responses}
    pairs = []
    for req in sorted(requests, key=lambda r: r.node_id):
        req_node = tree.node(req.node_id)
        best = None
        best_key = None
        for resp in free.values():
            if resp.node_id == req.node_id:
                continue
            key = (
                tree.distance(req_node, tree.node(resp.node_id)),
                0 if resp.node_id > req.node_id else 1,
                resp.node_id,
            )
            if best_key is None or key < best_key:
                best, best_key = resp, key
        if best is not None:
            del free[best.node_id]
        pairs.append(EndpointExamplePair(req, best))
    return pairs


def extract_pairs(tree: DomTree) -> list[EndpointExamplePair]:
    return pair_examples(tree, find_request_examples(tree), find_response_examples(tree))


def flatten_json_keys(value, prefix: str = "") -> list[str]:
    """Dotted paths of every object key; array elements share their parent's path."""
    out: list[str] = []
    if isinstance(value, dict):
        for k, v in value.items():
            path = f"{prefix}.{k}" if prefix else str(k)
            out.append(path)
            out.extend(flatten_json_keys(v, path))
    elif isinstance(value, list):
        for item in value:
            for p in flatten_json_keys(item, prefix):
                if p not in out:
                    out.append(p)
    return out


def example_parameter_names(pair: EndpointExamplePair) -> list[str]:
    """Names a reader would look for in reference docs: query, headers, body and response keys."""
    names: list[str] = []
    req = pair.request.parsed
    names.extend(k for k, _ in req.query_params)
    names.extend(k for k, _ in req.header_params if k.lower() not in _STANDARD_HEADERS)
    body = req.json_body()
    if body is not None:
        names.extend(flatten_json_keys(body))
    if pair.response is not None and pair.response.is_json:
        names.extend(flatten_json_keys(pair.response.json_value()))
    seen: dict[str, str] = {}
    for n in names:
        seen.setdefault(n.lower(), n)
        leaf = n.rsplit(".", 1)[-1]
        seen.setdefault(leaf.lower(), leaf)
    return [n for n in seen.values() if n]


_STANDARD_HEADERS = {
    "authorization", "content-type", "accept", "content-length", "user-agent",
    "host", "accept-encoding", "connection", "cache-control",
}
