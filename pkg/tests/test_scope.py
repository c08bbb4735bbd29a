from __future__ import annotations

import random
import re

import pytest

from docs2oas.errors import BudgetImpossible, NoCandidates
from docs2oas.extractor import example_parameter_names, extract_pairs
from docs2oas.ingest import parse_dom
from docs2oas.scope import (
    PARAM_HEADER_TEMPLATES,
    EnrichmentScope,
    ScopeCandidate,
    find_candidates_single,
    find_scope,
    find_scope_multi,
    mentions_endpoint,
    preprocess_scope,
    rank_and_select,
)

from oracles import multi_scope_oracle, planted_multi_page, planted_single_page, select_oracle, single_candidates_oracle


def _norm(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip().strip(":*").strip().lower()


def check_multi_page(seed: int) -> bool:
    rng = random.Random(seed)
    html, _ = planted_multi_page(rng, rng.randint(2, 5))
    tree = parse_dom(html)
    pairs = extract_pairs(tree)
    for pair in pairs:
        others = [p.request.node_id for p in pairs if p is not pair]
        examples = {pair.request.node_id} | ({pair.response.node_id} if pair.response else set())
        got = find_scope_multi(tree, pair, pairs).node_ids
        if got != multi_scope_oracle(tree, pair.request.node_id, examples, others):
            return False
    return True


def single_page_case(seed: int):
    rng = random.Random(seed)
    tree = parse_dom(planted_single_page(rng))
    (pair,) = extract_pairs(tree)
    example = {pair.request.node_id, pair.response.node_id}
    leaves = [
        n for n in tree.elements()
        if not n.hidden and n.is_leaf and n.text.strip()
        and not any(tree.contains(tree.node(e), n) for e in example)
    ]
    names = {n.lower() for n in example_parameter_names(pair)}
    path = pair.request.parsed.path
    seeds = [l.node_id for l in leaves if _norm(l.text) in names | set(PARAM_HEADER_TEMPLATES)]
    endpoint = [l.node_id for l in leaves if mentions_endpoint(l.text, path)]
    name_leaves = {l.node_id: _norm(l.text) for l in leaves if _norm(l.text) in names}
    method = [l.node_id for l in leaves if l.text.split()[0].lower() == pair.request.parsed.method]
    return tree, pair, single_candidates_oracle(tree, seeds, endpoint, name_leaves, method)


def check_single_page(seed: int) -> bool:
    tree, pair, oracle = single_page_case(seed)
    cands = find_candidates_single(tree, pair)
    if {c.anchor_node_id: c.rank for c in cands} != {o["anchor"]: o["rank"] for o in oracle}:
        return False
    return rank_and_select(cands, seed).node_ids == (select_oracle(oracle, seed),)


@pytest.mark.parametrize("seed", range(50))
def test_multi_scope_matches_oracle(seed):
    assert check_multi_page(seed)


@pytest.mark.parametrize("seed", range(50))
def test_single_candidates_match_oracle(seed):
    assert check_single_page(seed)


def test_multi_scope_never_spans_another_request():
    html, _ = planted_multi_page(random.Random(7), 5)
    tree = parse_dom(html)
    pairs = extract_pairs(tree)
    for pair in pairs:
        scope = find_scope_multi(tree, pair, pairs)
        held = {p.request.node_id for p in pairs
                if any(tree.contains(tree.node(i), tree.node(p.request.node_id)) for i in scope.node_ids)}
        assert held == {pair.request.node_id}


def test_sibling_run_stops_before_next_request():
    html = ("<body><main><pre>curl https://a.com/one</pre><pre>{\"a\": 1}</pre><p>one docs</p>"
            "<pre>curl https://a.com/two</pre><pre>{\"b\": 1}</pre><p>two docs</p></main></body>")
    tree = parse_dom(html)
    pairs = extract_pairs(tree)
    scope = find_scope(tree, pairs[0], pairs)
    texts = [tree.node(i).text for i in scope.node_ids]
    assert texts == ["curl https://a.com/one", '{"a": 1}', "one docs"]


def test_rank_and_select_drops_ancestors_and_is_seeded():
    outer = ScopeCandidate(1, 5, True, 10, frozenset())
    a = ScopeCandidate(2, 2, False, 3, frozenset({1}))
    b = ScopeCandidate(5, 2, False, 3, frozenset({1}))
    picks = {rank_and_select([outer, a, b], seed).node_ids for seed in range(20)}
    assert picks == {(2,), (5,)}
    assert rank_and_select([outer, a, b], 3) == rank_and_select([b, outer, a], 3)
    with pytest.raises(NoCandidates):
        rank_and_select([])


def test_single_page_without_endpoint_mention_falls_back_to_body():
    tree = parse_dom("<body><p>Nothing relevant</p><pre>curl https://a.com/x?q=1</pre></body>")
    pairs = extract_pairs(tree)
    scope = find_scope(tree, pairs[0], pairs)
    assert scope.fallback and scope.node_ids == (tree.body().node_id,) and scope.label == "body-fallback"


@pytest.mark.parametrize("text,path,hit", [
    ("GET /v1/users/{id}", "/v1/users/42", True),
    ("GET /users/:id", "/v1/users/42", True),
    ("https://api.a.com/v1/users/42", "/v1/users/42", True),
    ("GET /orders/{id}", "/v1/users/42", False),
    ("see /", "/v1/users", False),
])
def test_mentions_endpoint(text, path, hit):
    assert mentions_endpoint(text, path) is hit


def test_preprocess_strips_examples_and_attributes():
    html = ('<body><div class="doc" id="x"><h2 style="c">List items</h2><p>GET /items</p>'
            '<table class="t"><tr><td>limit</td><td>integer</td></tr></table>'
            '<pre>curl https://a.com/items?limit=1</pre><pre>{"id": 1}</pre></div></body>')
    tree = parse_dom(html)
    (pair,) = extract_pairs(tree)
    scope = find_scope(tree, pair, [pair])
    out = preprocess_scope(tree, scope, pair)
    assert "curl" not in out.cleaned_html and '{"id"' not in out.cleaned_html
    assert "class=" not in out.cleaned_html and "style=" not in out.cleaned_html
    assert "<table>" in out.cleaned_html and "limit" in out.retained_param_names


def test_preprocess_respects_budget():
    rows = "".join(f"<tr><td>p{i}</td><td>string</td></tr>" for i in range(5))
    filler = "".join(f"<p>{'filler text ' * 30}</p>" for _ in range(10))
    html = (f"<body><section><h2>Items</h2><p>GET /items</p><table>{rows}</table>{filler}"
            "<pre>curl 'https://a.com/items?p1=x'</pre></section></body>")
    tree = parse_dom(html)
    (pair,) = extract_pairs(tree)
    scope = EnrichmentScope((tree.body().node_id,), "single-request")
    out = preprocess_scope(tree, scope, pair, 600)
    assert len(out.cleaned_html) <= 600 and "p1" in out.cleaned_html
    with pytest.raises(BudgetImpossible):
        preprocess_scope(tree, scope, pair, 0)
