from __future__ import annotations

import itertools
import json
import random
from urllib.parse import parse_qsl, urlsplit

import pytest
import uncurl

from docs2oas.errors import MalformedExample
from docs2oas.extractor import (
    example_parameter_names,
    extract_pairs,
    find_request_examples,
    find_response_examples,
    flatten_json_keys,
    pair_examples,
    parse_curl,
    parse_request_text,
    split_response_text,
)
from docs2oas.ingest import parse_dom

from oracles import planted_multi_page

CURLS = [
    "curl https://api.example.com/v1/items",
    "curl 'https://api.example.com/v1/items?limit=10&cursor=abc'",
    "curl -X POST https://api.example.com/v1/charges -H 'Content-Type: application/json' -d '{\"amount\": 5}'",
    "curl -X DELETE https://api.example.com/v1/things/9 -H 'Authorization: Bearer t'",
    "curl -X PATCH 'https://api.example.com/p/1?dry=true' -H 'Accept: application/json' -d '{}'",
    "curl -s https://api.example.com/status",
    "curl -X PUT -H 'X-A: 1' -H 'X-B: 2' https://api.example.com/a -d 'k=v'",
]


@pytest.mark.parametrize("cmd", CURLS)
def test_parse_curl_agrees_with_uncurl(cmd):
    ours = parse_curl(cmd)
    ref = uncurl.parse_context(cmd)
    parts = urlsplit(ref.url)
    assert ours.method == ref.method.lower()
    assert ours.server == f"{parts.scheme}://{parts.netloc}"
    assert ours.path == (parts.path or "/")
    assert list(ours.query_params) == parse_qsl(parts.query, keep_blank_values=True)
    assert dict(ours.header_params) == dict(ref.headers)
    assert (ours.body or None) == (ref.data or None)


# outside uncurl's grammar: long options, repeated data, -L
@pytest.mark.parametrize("cmd,method,path,headers,body", [
    ("curl --request PUT --url https://api.example.com/a/b --header 'X-Key: 1' --data '{\"x\": [1, 2]}'",
     "put", "/a/b", (("X-Key", "1"),), '{"x": [1, 2]}'),
    ("curl https://api.example.com/users -d 'name=alice' -d 'role=admin'",
     "post", "/users", (), "name=alice&role=admin"),
    ("curl -s -L https://api.example.com/status", "get", "/status", (), None),
    ("curl --json '{\"a\": 1}' https://api.example.com/j", "post", "/j", (("Content-Type", "application/json"),), '{"a": 1}'),
    ("curl -I https://api.example.com/h", "head", "/h", (), None),
])
def test_parse_curl_extended(cmd, method, path, headers, body):
    req = parse_curl(cmd)
    assert (req.method, req.path, req.header_params, req.body) == (method, path, headers, body)


def test_continuation_lines_and_prompt():
    cmd = "$ curl -X POST \\\n  https://api.example.com/v1/x \\\n  -H 'X-A: 1'"
    req = parse_curl(cmd)
    assert (req.method, req.path, req.header_params) == ("post", "/v1/x", (("X-A", "1"),))


def test_json_body_detected():
    req = parse_curl(CURLS[2])
    assert req.body_is_json and req.json_body() == {"amount": 5}
    assert not parse_curl(CURLS[6]).body_is_json


def test_basic_auth_and_get_flag():
    req = parse_curl("curl -G https://api.example.com/s -u key: -d q=shoes")
    assert req.method == "get" and req.basic_auth and req.query_params == (("q", "shoes"),)


@pytest.mark.parametrize("bad", ["", "curl", "curl -X BREW https://x.com/", "curl -H 'nocolon' https://x.com/"])
def test_parse_curl_rejects(bad):
    with pytest.raises(MalformedExample):
        parse_curl(bad)


def test_parse_request_text():
    req = parse_request_text("POST /v1/things?x=1 HTTP/1.1\nHost: api.example.com\nX-A: b\n\n{\"a\": 1}")
    assert req.server == "https://api.example.com" and req.path == "/v1/things"
    assert req.query_params == (("x", "1"),) and req.header_params == (("X-A", "b"),)
    assert req.body_is_json


@pytest.mark.parametrize("text,status,body", [
    ('HTTP/1.1 201 Created\nContent-Type: application/json\n\n{"a": 1}', 201, '{"a": 1}'),
    ('{"a": 1}', None, '{"a": 1}'),
    ("HTTP/2 404\n\n{}", 404, "{}"),
])
def test_split_response_text(text, status, body):
    assert split_response_text(text) == (status, body)


def test_route_signature_is_not_a_request():
    tree = parse_dom("<body><pre>GET /users/{id}</pre><pre>curl https://a.com/users/1</pre></body>")
    found = find_request_examples(tree)
    assert [r.raw_text for r in found] == ["curl https://a.com/users/1"]


def test_non_code_block_holding_curl():
    tree = parse_dom('<body><div class="hl"><span>curl</span> <span>https://a.com/x</span></div></body>')
    (req,) = find_request_examples(tree)
    assert tree.node(req.node_id).tag == "div" and req.parsed.path == "/x"


def test_responses_skip_plain_code():
    tree = parse_dom("<body><pre>npm install thing</pre><pre>{\"ok\": true}</pre>"
                     "<pre>HTTP/1.1 204 No Content</pre></body>")
    found = find_response_examples(tree)
    assert [(r.is_json, r.status) for r in found] == [(True, None), (False, 204)]


def test_pairing_is_order_insensitive():
    html, _cmds = planted_multi_page(random.Random(3), 4)
    tree = parse_dom(html)
    reqs = find_request_examples(tree)
    resps = find_response_examples(tree)
    reference = pair_examples(tree, reqs, resps)
    for r_perm in itertools.permutations(reqs):
        for s_perm in list(itertools.permutations(resps))[:6]:
            assert pair_examples(tree, list(r_perm), list(s_perm)) == reference


@pytest.mark.parametrize("seed", range(30))
def test_planted_pairs_are_recovered(seed):
    rng = random.Random(seed)
    html, cmds = planted_multi_page(rng, rng.randint(2, 5))
    pairs = extract_pairs(parse_dom(html))
    assert [p.request.raw_text for p in pairs] == cmds
    for i, p in enumerate(pairs):
        assert p.response is not None and json.loads(p.response.body)["id"] == i


def test_unpaired_request_keeps_none():
    pairs = extract_pairs(parse_dom("<body><pre>curl https://a.com/x</pre></body>"))
    assert len(pairs) == 1 and pairs[0].response is None


def test_flatten_json_keys():
    assert flatten_json_keys({"a": {"b": 1}, "c": [{"d": 1}, {"d": 2, "e": 3}]}) == ["a", "a.b", "c", "c.d", "c.e"]


def test_example_parameter_names():
    tree = parse_dom("<body><pre>curl 'https://a.com/x?limit=1' -H 'X-Key: k' -H 'Accept: */*'</pre>"
                     "<pre>{\"user\": {\"id\": 1}}</pre></body>")
    names = example_parameter_names(extract_pairs(tree)[0])
    assert {"limit", "X-Key", "user", "user.id", "id"} <= set(names)
    assert "Accept" not in names
