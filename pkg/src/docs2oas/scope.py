"""Locate and trim the reference documentation that belongs to one endpoint."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Literal
from urllib.parse import unquote

from .errors import BudgetImpossible, NoCandidates, ParseFailure, ScopeNotFound
from .extractor import EndpointExamplePair, example_parameter_names
from .ingest import PAGE_CONTAINERS, DomNode, DomTree, parse_dom, serialize, text_content

__all__ = [
    "PARAM_HEADER_TEMPLATES",
    "DEFAULT_SCOPE_BUDGET",
    "ScopeCandidate",
    "EnrichmentScope",
    "ProcessedScope",
    "find_scope_multi",
    "find_candidates_single",
    "rank_and_select",
    "find_scope",
    "preprocess_scope",
    "mentions_endpoint",
]

PARAM_HEADER_TEMPLATES = (
    "parameters",
    "query parameters",
    "path parameters",
    "request body",
    "response",
    "headers",
)
DEFAULT_SCOPE_BUDGET = 12000
TABLE_TAGS = frozenset({"table", "thead", "tbody", "tr", "dl"})
_TEMPLATE_HINT_MAX_CHARS = 60


@dataclass(frozen=True)
class ScopeCandidate:
    anchor_node_id: int
    rank_param_hits: int
    rank_method_hit: bool
    subtree_size: int
    ancestor_ids: frozenset[int] = frozenset()

    @property
    def rank(self) -> tuple[int, bool]:
        return (self.rank_param_hits, self.rank_method_hit)


@dataclass(frozen=True)
class EnrichmentScope:
    node_ids: tuple[int, ...]
    origin: Literal["multi-request", "single-request"]
    fallback: bool = False

    @property
    def label(self) -> str:
        return "body-fallback" if self.fallback else self.origin


@dataclass(frozen=True)
class ProcessedScope:
    cleaned_html: str
    visible_text: str
    retained_param_names: tuple[str, ...]


def _norm(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip().strip(":*").strip().lower()


def _word_re(name: str) -> re.Pattern:
    return re.compile(r"(?<![A-Za-z0-9_])" + re.escape(name) + r"(?![A-Za-z0-9_])", re.IGNORECASE)


def _example_ids(pair: EndpointExamplePair) -> set[int]:
    ids = {pair.request.node_id}
    if pair.response is not None:
        ids.add(pair.response.node_id)
    return ids


# ---------------------------------------------------------------------------
# multi-request pages
# ---------------------------------------------------------------------------


def _text_without(tree: DomTree, node: DomNode, skip: set[int]) -> str:
    parts: list[str] = []
    for n in node.iter():
        if n.hidden or any(tree.contains(tree.node(s), n) for s in skip):
            continue
        parts.append(n.text)
    return "".join(parts).strip()


def find_scope_multi(
    tree: DomTree, target: EndpointExamplePair, all_pairs: list[EndpointExamplePair]
) -> EnrichmentScope:
    """Highest ancestor of the request that holds no other request.

    When that ancestor carries nothing beyond the examples themselves, the
    scope becomes the run of its siblings up to, but excluding, the sibling
    that holds the next request (or to the end of the parent).
    """
    if target.request.node_id not in tree.id_index:
        raise ScopeNotFound(f"request node {target.request.node_id} not in tree")
    request = tree.node(target.request.node_id)
    others = [
        tree.node(p.request.node_id)
        for p in all_pairs
        if p.request.node_id != target.request.node_id and p.request.node_id in tree.id_index
    ]
    top = request
    for ancestor in tree.ancestors(request):
        if ancestor.tag in PAGE_CONTAINERS or any(tree.contains(ancestor, o) for o in others):
            break
        top = ancestor

    if _text_without(tree, top, _example_ids(target)):
        return EnrichmentScope((top.node_id,), "multi-request")

    parent = tree.parent(top)
    if parent is None:
        return EnrichmentScope((top.node_id,), "multi-request")
    siblings = [c for c in parent.children if not c.hidden]
    start = siblings.index(top)
    sequence = []
    for sib in siblings[start:]:
        if sib is not top and any(tree.contains(sib, o) for o in others):
            break
        sequence.append(sib.node_id)
    return EnrichmentScope(tuple(sequence), "multi-request")


# ---------------------------------------------------------------------------
# single-request pages
# ---------------------------------------------------------------------------


_PATH_IN_TEXT = re.compile(r"(?:https?://[^\s/]+)?(/[^\s\"'<>?#`]*)")


def mentions_endpoint(text: str, example_path: str) -> bool:
    """True when ``text`` spells out a path matching the example's path.

    Template segments (``{id}``, ``:id``) match any value; a documented
    path may omit a leading base path such as ``/v1``.
    """
    example = [s for s in unquote(example_path).split("/") if s]
    if not example:
        return False
    for m in _PATH_IN_TEXT.finditer(text):
        doc = [s for s in unquote(m.group(1)).rstrip(".,;:)").split("/") if s]
        if not doc or len(doc) > len(example):
            continue
        tail = example[len(example) - len(doc):]
        if all(
            re.fullmatch(r"\{[^{}/]+\}|:[A-Za-z_]\w*", d) or d.lower() == e.lower()
            for d, e in zip(doc, tail)
        ):
            return True
    return False


def _visible_leaves(tree: DomTree, excluded: list[DomNode]) -> list[DomNode]:
    leaves = []
    for node in tree.elements():
        if node.hidden or not node.is_leaf or not node.text.strip():
            continue
        if any(tree.contains(x, node) for x in excluded):
            continue
        leaves.append(node)
    return leaves


def find_candidates_single(tree: DomTree, target: EndpointExamplePair) -> list[ScopeCandidate]:
    """Ancestors that tie a parameter-like leaf to a leaf naming the endpoint."""
    excluded = [tree.node(i) for i in _example_ids(target) if i in tree.id_index]
    leaves = _visible_leaves(tree, excluded)
    names = {n.lower() for n in example_parameter_names(target)}
    seeds_vocab = names | set(PARAM_HEADER_TEMPLATES)
    method = target.request.parsed.method.lower()
    path = target.request.parsed.path

    endpoint_leaves = [l for l in leaves if mentions_endpoint(l.text, path)]
    if not endpoint_leaves:
        return []
    param_leaves = [(l, _norm(l.text)) for l in leaves if _norm(l.text) in names]
    method_leaves = [l for l in leaves if l.text.split() and l.text.split()[0].lower() == method]

    anchors: dict[int, DomNode] = {}
    for leaf in leaves:
        if _norm(leaf.text) not in seeds_vocab:
            continue
        for ancestor in tree.ancestors(leaf):
            if not ancestor.is_element:
                break
            if any(tree.contains(ancestor, e) for e in endpoint_leaves):
                anchors[ancestor.node_id] = ancestor
                break

    out = []
    for anchor_id in sorted(anchors):
        anchor = anchors[anchor_id]
        hits = {text for leaf, text in param_leaves if tree.contains(anchor, leaf)}
        out.append(
            ScopeCandidate(
                anchor_node_id=anchor_id,
                rank_param_hits=len(hits),
                rank_method_hit=any(tree.contains(anchor, m) for m in method_leaves),
                subtree_size=tree.last_descendant_id(anchor) - anchor_id + 1,
                ancestor_ids=frozenset(a.node_id for a in tree.ancestors(anchor)),
            )
        )
    return out


def rank_and_select(candidates: list[ScopeCandidate], rng_seed: int = 0) -> EnrichmentScope:
    """Best candidate after dropping ancestors of other candidates.

    Ties on ``(param hits, method hit)`` are broken by a seeded draw over
    the tied anchors in node-id order.
    """
    if not candidates:
        raise NoCandidates("no scope candidates to rank")
    surviving = [
        c
        for c in candidates
        if not any(c.anchor_node_id in d.ancestor_ids for d in candidates if d is not c)
    ]
    # duplicate anchors collapse to one entry
    unique = {c.anchor_node_id: c for c in surviving}
    best = max(c.rank for c in unique.values())
    tied = sorted(a for a, c in unique.items() if c.rank == best)
    pick = tied[int(random.Random(rng_seed).random() * len(tied))]
    return EnrichmentScope((pick,), "single-request")


def find_scope(
    tree: DomTree,
    target: EndpointExamplePair,
    all_pairs: list[EndpointExamplePair],
    rng_seed: int = 0,
) -> EnrichmentScope:
    """Multi-request rule when the page has several pairs, else ranked candidates.

    Falls back to the whole body when no candidate exists.
    """
    if len(all_pairs) >= 2:
        return find_scope_multi(tree, target, all_pairs)
    candidates = find_candidates_single(tree, target)
    if candidates:
        return rank_and_select(candidates, rng_seed)
    return EnrichmentScope((tree.body().node_id,), "single-request", fallback=True)


# ---------------------------------------------------------------------------
# preprocessing
# ---------------------------------------------------------------------------


def _has_template_hint(text: str) -> bool:
    norm = _norm(text)
    return bool(norm) and len(norm) <= _TEMPLATE_HINT_MAX_CHARS and any(
        t in norm for t in PARAM_HEADER_TEMPLATES
    )


def relevance(node: DomNode, name_patterns: list[re.Pattern]) -> int:
    """Distinct example names in the text, +2 for table-like markup, +1 for a parameter header."""
    text = text_content(node)
    score = sum(1 for p in name_patterns if p.search(text))
    if any(n.tag in TABLE_TAGS for n in node.iter() if not n.hidden):
        score += 2
    if _has_template_hint(text):
        score += 1
    return score


def _element_children(node: DomNode, skip: set[int]) -> list[DomNode]:
    return [c for c in node.children if not c.hidden and c.node_id not in skip]


def preprocess_scope(
    tree: DomTree,
    scope: EnrichmentScope,
    pair: EndpointExamplePair,
    char_budget: int = DEFAULT_SCOPE_BUDGET,
) -> ProcessedScope:
    """Strip examples, attributes and low-relevance children; fit the budget."""
    if char_budget <= 0:
        raise BudgetImpossible("budget must be positive")
    for node_id in scope.node_ids:
        if node_id not in tree.id_index:
            raise ScopeNotFound(f"scope node {node_id} not in tree")
    skip: set[int] = {i for i in _example_ids(pair) if i in tree.id_index}
    roots = [tree.node(i) for i in scope.node_ids]
    names = example_parameter_names(pair)
    patterns = [_word_re(n) for n in names]

    def render() -> str:
        return "".join(
            serialize(r, strip_attributes=True, skip=skip) for r in roots if r.node_id not in skip
        )

    if len(roots) == 1:
        level = roots[0]
        # look through single-child wrappers
        while True:
            kids = _element_children(level, skip)
            loose = "".join(level.chunks).strip()
            if len(kids) == 1 and not loose:
                level = kids[0]
            else:
                break
        units = _element_children(level, skip)
    else:
        units = [r for r in roots if r.node_id not in skip]

    while True:
        scored = [(relevance(u, patterns), pos, u) for pos, u in enumerate(units)]
        kept = [s for s in scored if s[0] > 0] or scored
        for _score, _pos, u in scored:
            if all(u is not k[2] for k in kept):
                skip.add(u.node_id)
        html = render()
        while len(html) > char_budget and len(kept) > 1:
            victim = min(kept, key=lambda s: (s[0], -s[1]))
            kept.remove(victim)
            skip.add(victim[2].node_id)
            html = render()
        if len(html) <= char_budget:
            break
        if not kept:
            raise BudgetImpossible(f"scope needs {len(html)} chars, budget is {char_budget}")
        units = _element_children(kept[0][2], skip)
        if not units:
            raise BudgetImpossible(f"scope needs {len(html)} chars, budget is {char_budget}")

    try:
        visible = text_content(parse_dom(html).root) if html.strip() else ""
    except ParseFailure:
        visible = html
    visible = re.sub(r"\s+", " ", visible).strip()
    retained = tuple(n for n, p in zip(names, patterns) if p.search(visible))
    return ProcessedScope(cleaned_html=html, visible_text=visible, retained_param_names=retained)
