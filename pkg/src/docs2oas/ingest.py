"""Documentation snapshots, an error-tolerant DOM, and tag histograms."""

from __future__ import annotations

import math
import re
import urllib.error
import urllib.request
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from html.parser import HTMLParser
from pathlib import Path
from typing import Iterator, Literal

from .errors import (
    DegenerateHistogram,
    EmptyDocument,
    ParseFailure,
    SourceUnreachable,
)

__all__ = [
    "DocumentSnapshot",
    "DomNode",
    "DomTree",
    "TagHistogram",
    "load_snapshot",
    "parse_dom",
    "tag_frequency",
    "histogram_similarity",
    "text_content",
    "serialize",
]

DOCUMENT_TAG = "#document"
PAGE_CONTAINERS = frozenset({DOCUMENT_TAG, "html", "body"})

VOID_ELEMENTS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)
HIDDEN_ELEMENTS = frozenset({"script", "style", "noscript", "template", "head"})
INLINE_ELEMENTS = frozenset(
    "a abbr b bdi bdo cite code data dfn em i kbd mark q s samp small span "
    "strong sub sup time u var".split()
)
# Starting one of these closes an open <p> (HTML5 "close a p element").
_CLOSES_P = frozenset(
    "address article aside blockquote details dialog div dl fieldset figcaption "
    "figure footer form h1 h2 h3 h4 h5 h6 header hgroup hr main menu nav ol p "
    "pre section summary table ul".split()
)
_HEADINGS = frozenset("h1 h2 h3 h4 h5 h6".split())
_P_SCOPE_BOUNDARY = frozenset(
    {DOCUMENT_TAG, "html", "body", "td", "th", "caption", "table", "button",
     "object", "marquee", "template"}
)
# tag -> (tags it implicitly closes, tags that stop the search)
_IMPLIED_END = {
    "li": ({"li"}, {"ul", "ol", "menu"}),
    "dt": ({"dt", "dd"}, {"dl"}),
    "dd": ({"dt", "dd"}, {"dl"}),
    "tr": ({"tr", "td", "th"}, {"table", "thead", "tbody", "tfoot"}),
    "td": ({"td", "th"}, {"tr", "table"}),
    "th": ({"td", "th"}, {"tr", "table"}),
    "thead": ({"thead", "tbody", "tfoot", "tr", "td", "th"}, {"table"}),
    "tbody": ({"thead", "tbody", "tfoot", "tr", "td", "th"}, {"table"}),
    "tfoot": ({"thead", "tbody", "tfoot", "tr", "td", "th"}, {"table"}),
    "option": ({"option"}, {"select", "datalist"}),
}


@dataclass(frozen=True)
class DocumentSnapshot:
    source_uri: str
    fetched_at: datetime
    raw_html: str


@dataclass(eq=False)
class DomNode:
    """One element.

    ``chunks`` interleaves owned text with children: ``chunks[i]`` is the text
    before ``children[i]`` and ``chunks[-1]`` the text after the last child.
    """

    tag: str
    attributes: dict[str, str]
    node_id: int
    parent_id: int | None
    children: list[DomNode] = field(default_factory=list)
    chunks: list[str] = field(default_factory=lambda: [""])
    hidden: bool = False

    @property
    def text(self) -> str:
        return "".join(self.chunks)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def is_element(self) -> bool:
        return not self.tag.startswith("#")

    def iter(self) -> Iterator[DomNode]:
        """Pre-order walk of this subtree, self included."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def __repr__(self) -> str:
        return f"DomNode({self.tag!r}, id={self.node_id}, children={len(self.children)})"


class DomTree:
    """Immutable view over a parsed page with O(1) ancestry tests.

    Node ids are assigned in pre-order, so ``b`` is inside ``a`` exactly when
    ``a.node_id < b.node_id <= last_descendant[a]``.
    """

    def __init__(self, root: DomNode):
        self.root = root
        self.id_index: dict[int, DomNode] = {}
        self._last: dict[int, int] = {}
        self._depth: dict[int, int] = {}
        self._index(root, 0)

    def _index(self, root: DomNode, depth: int) -> None:
        stack: list[tuple[DomNode, int, bool]] = [(root, depth, False)]
        while stack:
            node, d, done = stack.pop()
            if done:
                self._last[node.node_id] = (
                    self._last[node.children[-1].node_id] if node.children else node.node_id
                )
                continue
            if node.node_id in self.id_index:
                raise ValueError(f"duplicate node id {node.node_id}")
            self.id_index[node.node_id] = node
            self._depth[node.node_id] = d
            stack.append((node, d, True))
            for child in reversed(node.children):
                stack.append((child, d + 1, False))

    def __len__(self) -> int:
        return len(self.id_index)

    def node(self, node_id: int) -> DomNode:
        return self.id_index[node_id]

    def parent(self, node: DomNode) -> DomNode | None:
        return None if node.parent_id is None else self.id_index[node.parent_id]

    def ancestors(self, node: DomNode) -> Iterator[DomNode]:
        """Proper ancestors, nearest first."""
        current = self.parent(node)
        while current is not None:
            yield current
            current = self.parent(current)

    def depth(self, node: DomNode) -> int:
        return self._depth[node.node_id]

    def last_descendant_id(self, node: DomNode) -> int:
        return self._last[node.node_id]

    def contains(self, outer: DomNode, inner: DomNode) -> bool:
        """True when ``inner`` is ``outer`` or lies inside it."""
        return outer.node_id <= inner.node_id <= self._last[outer.node_id]

    def is_ancestor(self, outer: DomNode, inner: DomNode) -> bool:
        return outer.node_id < inner.node_id <= self._last[outer.node_id]

    def is_visible(self, node: DomNode) -> bool:
        return not node.hidden

    def lca(self, a: DomNode, b: DomNode) -> DomNode:
        while not self.contains(a, b):
            a = self.parent(a)  # type: ignore[assignment]
        return a

    def distance(self, a: DomNode, b: DomNode) -> int:
        """Number of edges on the tree path between two nodes."""
        common = self.lca(a, b)
        return self.depth(a) + self.depth(b) - 2 * self.depth(common)

    def body(self) -> DomNode:
        for node in self.root.iter():
            if node.tag == "body":
                return node
        return self.root

    def elements(self) -> Iterator[DomNode]:
        return (n for n in self.root.iter() if n.is_element)


@dataclass(frozen=True)
class TagHistogram:
    counts: dict[str, int]

    def __post_init__(self) -> None:
        if any(v <= 0 for v in self.counts.values()):
            raise ValueError("histogram counts must be positive")

    @property
    def total(self) -> int:
        return sum(self.counts.values())


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------


def load_snapshot(
    source: str | Path, fetch_timeout: float = 30.0, allow_network: bool = True
) -> DocumentSnapshot:
    """Read a page from disk or over http(s); bytes are decoded as lossy UTF-8.

    No script runs: pages that need interaction must be saved pre-rendered.
    """
    uri = str(source)
    if uri.startswith(("http://", "https://")):
        if not allow_network:
            raise SourceUnreachable(f"network access disabled, cannot fetch {uri}")
        try:
            request = urllib.request.Request(uri, headers={"User-Agent": "docs2oas/0.1"})
            with urllib.request.urlopen(request, timeout=fetch_timeout) as response:
                body = response.read()
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise SourceUnreachable(f"{uri}: {exc}") from exc
    else:
        try:
            body = Path(uri).read_bytes()
        except OSError as exc:
            raise SourceUnreachable(f"{uri}: {exc}") from exc
    if not body:
        raise EmptyDocument(f"{uri} has an empty body")
    return DocumentSnapshot(
        source_uri=uri,
        fetched_at=datetime.now(timezone.utc),
        raw_html=body.decode("utf-8", errors="replace"),
    )


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


_HIDING_STYLE = re.compile(r"(?:^|;)\s*(?:display\s*:\s*none|visibility\s*:\s*hidden)\b", re.IGNORECASE)


def _hidden_by_attrs(attrs: dict[str, str]) -> bool:
    return "hidden" in attrs or bool(_HIDING_STYLE.search(attrs.get("style") or ""))


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self._next_id = 0
        self.root = self._new(DOCUMENT_TAG, {}, None)
        self.stack: list[DomNode] = [self.root]
        self.element_count = 0

    def _new(self, tag: str, attrs: dict[str, str], parent: DomNode | None) -> DomNode:
        node = DomNode(
            tag=tag,
            attributes=attrs,
            node_id=self._next_id,
            parent_id=None if parent is None else parent.node_id,
            hidden=tag in HIDDEN_ELEMENTS or _hidden_by_attrs(attrs) or bool(parent and parent.hidden),
        )
        self._next_id += 1
        if parent is not None:
            parent.children.append(node)
            parent.chunks.append("")
        return node

    def _open_index(self, names: set[str] | frozenset[str], boundary) -> int | None:
        for i in range(len(self.stack) - 1, 0, -1):
            tag = self.stack[i].tag
            if tag in names:
                return i
            if tag in boundary:
                return None
        return None

    def _close_implied(self, tag: str) -> None:
        if tag in _CLOSES_P:
            idx = self._open_index({"p"}, _P_SCOPE_BOUNDARY)
            if idx is not None:
                del self.stack[idx:]
        if tag in _HEADINGS and self.stack[-1].tag in _HEADINGS:
            self.stack.pop()
        if tag in _IMPLIED_END:
            closes, boundary = _IMPLIED_END[tag]
            idx = self._open_index(closes, boundary)
            if idx is not None:
                del self.stack[idx:]

    def handle_starttag(self, tag, attrs):
        self._close_implied(tag)
        node = self._new(tag, {k: v or "" for k, v in attrs}, self.stack[-1])
        self.element_count += 1
        if tag not in VOID_ELEMENTS:
            self.stack.append(node)

    def handle_startendtag(self, tag, attrs):
        # XHTML-style <p/> is treated as an empty element.
        self._close_implied(tag)
        self._new(tag, {k: v or "" for k, v in attrs}, self.stack[-1])
        self.element_count += 1

    def handle_endtag(self, tag):
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return
        # stray end tag: ignored

    def handle_data(self, data):
        self.stack[-1].chunks[-1] += data


def parse_dom(raw_html: str) -> DomTree:
    """Parse possibly malformed HTML into a :class:`DomTree`.

    Implied end tags follow the HTML5 rules that matter for documentation
    pages (``p``, ``li``, ``dt``/``dd``, table rows and cells, headings).
    No ``tbody``/``head``/``body`` elements are synthesized.
    """
    if not raw_html or not raw_html.strip():
        raise ParseFailure("no markup to parse")
    builder = _TreeBuilder()
    try:
        builder.feed(raw_html)
        builder.close()
    except Exception as exc:  # html.parser is very tolerant; be defensive anyway
        raise ParseFailure(str(exc)) from exc
    if builder.element_count == 0:
        raise ParseFailure("no element could be recovered")
    return DomTree(builder.root)


# ---------------------------------------------------------------------------
# text & serialization
# ---------------------------------------------------------------------------


def text_content(node: DomNode, include_hidden: bool = False) -> str:
    """Visible text of a subtree; block-level boundaries become newlines."""
    out: list[str] = []

    def walk(n: DomNode) -> None:
        if n.hidden and not include_hidden:
            return
        block = n.is_element and n.tag not in INLINE_ELEMENTS
        if block:
            out.append("\n")
        for i, child in enumerate(n.children):
            out.append(n.chunks[i])
            walk(child)
        out.append(n.chunks[-1])
        if block or n.tag == "br":
            out.append("\n")

    walk(node)
    return "".join(out)


def serialize(
    node: DomNode,
    strip_attributes: bool = False,
    skip: set[int] | frozenset[int] = frozenset(),
    include_hidden: bool = False,
) -> str:
    """HTML for a subtree; nodes whose id is in ``skip`` are left out."""
    from html import escape

    out: list[str] = []

    def walk(n: DomNode) -> None:
        if n.node_id in skip or (n.hidden and not include_hidden):
            return
        if n.is_element:
            attrs = ""
            if not strip_attributes and n.attributes:
                attrs = "".join(
                    f' {k}="{escape(v, quote=True)}"' for k, v in n.attributes.items()
                )
            out.append(f"<{n.tag}{attrs}>")
        for i, child in enumerate(n.children):
            out.append(escape(n.chunks[i], quote=False))
            walk(child)
        out.append(escape(n.chunks[-1], quote=False))
        if n.is_element and n.tag not in VOID_ELEMENTS:
            out.append(f"</{n.tag}>")

    walk(node)
    return "".join(out)


# ---------------------------------------------------------------------------
# histograms
# ---------------------------------------------------------------------------


def tag_frequency(fragment: DomNode) -> TagHistogram:
    """Count visible element tags in the subtree rooted at ``fragment``."""
    counts: Counter[str] = Counter(
        n.tag for n in fragment.iter() if n.is_element and not n.hidden
    )
    return TagHistogram(dict(counts))


KL_SMOOTHING = 1e-9


def histogram_similarity(
    a: TagHistogram, b: TagHistogram, metric: Literal["cosine", "kl-divergence"] = "cosine"
) -> float:
    """Cosine similarity in [0, 1], or KL(a || b) (lower means more alike)."""
    if not a.counts or not b.counts:
        raise DegenerateHistogram("cannot compare an empty histogram")
    vocab = sorted(set(a.counts) | set(b.counts))
    if metric == "cosine":
        dot = sum(a.counts.get(t, 0) * b.counts.get(t, 0) for t in vocab)
        norm_sq = sum(v * v for v in a.counts.values()) * sum(v * v for v in b.counts.values())
        return min(1.0, dot / math.sqrt(norm_sq))
    if metric in ("kl-divergence", "kl"):
        p = [a.counts.get(t, 0) + KL_SMOOTHING for t in vocab]
        q = [b.counts.get(t, 0) + KL_SMOOTHING for t in vocab]
        sp, sq = sum(p), sum(q)
        return max(0.0, sum((pi / sp) * math.log((pi / sp) / (qi / sq)) for pi, qi in zip(p, q)))
    raise ValueError(f"unknown similarity metric {metric!r}")
