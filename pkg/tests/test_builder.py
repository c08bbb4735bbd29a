from __future__ import annotations

import json
import random
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docs2oas.builder import (
    JsonSchemaNode,
    aggregate_segments,
    build_base_oas,
    generate_skeleton,
    infer_example,
    infer_from_text,
    infer_from_value,
    literal_type,
    segment_example,
    template_path,
)
from docs2oas.errors import InconsistentPrefixes, InvalidThreshold, MalformedSchema, MergeWarning, NotJson
from docs2oas.extractor import EndpointExamplePair, RequestExample, parse_curl
from docs2oas.validate import check_document

from oracles import infer_oracle, random_json

json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-10**6, 10**6)
    | st.floats(allow_nan=False, allow_infinity=False, width=32) | st.text(max_size=5),
    lambda inner: st.lists(inner, max_size=4) | st.dictionaries(st.text(min_size=1, max_size=4), inner, max_size=5),
    max_leaves=25,
)


def _pair(cmd: str) -> EndpointExamplePair:
    return EndpointExamplePair(RequestExample(0, cmd, parse_curl(cmd)))


@pytest.mark.parametrize("seed", range(40))
def test_inference_matches_brute_force(seed):
    doc = random_json(random.Random(seed))
    assert infer_from_value(doc).to_dict(keep_empty_required=True) == infer_oracle(doc)


@settings(max_examples=150, deadline=None)
@given(json_values)
def test_inference_matches_brute_force_hypothesis(doc):
    assert infer_from_value(doc).to_dict(keep_empty_required=True) == infer_oracle(doc)


@pytest.mark.parametrize("text,expected", [
    ('{"a": 1}', {"type": "object", "properties": {"a": {"type": "integer"}}, "required": ["a"]}),
    ('[1, 2.5]', {"type": "array", "items": {"type": "number"}}),
    ('[]', {"type": "array", "items": {}}),
    ('null', {"type": "string", "nullable": True}),
    ('[{"a": 1}, {"b": "x"}]', {"type": "array", "items": {
        "type": "object", "properties": {"a": {"type": "integer"}, "b": {"type": "string"}}, "required": []}}),
    ('{"v": 2.0}', {"type": "object", "properties": {"v": {"type": "integer"}}, "required": ["v"]}),
    # a scalar decides the slot, yet the later array still contributes its null
    ('[[[true]], [1], [[null]]]', {"type": "array", "items": {"type": "array", "items": {
        "type": "array", "items": {"type": "boolean", "nullable": True}}}}),
])
def test_inference_examples(text, expected):
    assert infer_from_text(text).to_dict(keep_empty_required=True) == expected


def test_inference_rejects_non_json():
    with pytest.raises(NotJson):
        infer_from_text("{nope")


@pytest.mark.parametrize("threshold", [1, 2, 5, 40, 1000])
@pytest.mark.parametrize("seed", range(25))
def test_segmentation_round_trip(seed, threshold):
    doc = random_json(random.Random(1000 + seed))
    text = json.dumps(doc)
    segments = segment_example(text, threshold)
    parts = [(s.json_pointer_prefix, infer_from_text(s.text)) for s in segments]
    with warnings.catch_warnings():
        warnings.simplefilter("error", MergeWarning)
        assert aggregate_segments(parts) == infer_from_text(text)


@pytest.mark.parametrize("seed", range(25))
def test_segments_respect_threshold_unless_atomic(seed):
    doc = random_json(random.Random(2000 + seed))
    for s in segment_example(json.dumps(doc), 5):
        lines = s.text.count("\n") + 1
        value = s.value()
        # an over-long piece is a single key whose value cannot be cut further
        assert lines <= 5 or not isinstance(value, dict) or len(value) == 1


def test_single_segment_when_small():
    segs = segment_example('{"a": 1, "b": [1, 2]}', 40)
    assert len(segs) == 1 and segs[0].json_pointer_prefix == ""


def test_large_nested_object_splits_under_prefix():
    doc = {"outer": {f"k{i}": i for i in range(10)}, "x": 1}
    segs = segment_example(json.dumps(doc), 4)
    assert {s.json_pointer_prefix for s in segs} == {"", "/outer"}


@pytest.mark.parametrize("bad", [0, -1, 2.5, "3"])
def test_bad_threshold(bad):
    with pytest.raises(InvalidThreshold):
        segment_example("{}", bad)


def test_aggregate_conflict_warns_and_keeps_first():
    a = JsonSchemaNode("object", {"v": JsonSchemaNode("integer")}, required=["v"])
    b = JsonSchemaNode("object", {"v": JsonSchemaNode("string")}, required=["v"])
    with pytest.warns(MergeWarning):
        out = aggregate_segments([("", a), ("", b)])
    assert out.properties["v"].type == "integer"


def test_aggregate_prefix_through_scalar():
    a = JsonSchemaNode("object", {"v": JsonSchemaNode("integer")}, required=["v"])
    with pytest.raises(InconsistentPrefixes):
        aggregate_segments([("", a), ("/v/w", JsonSchemaNode("object"))])


def test_infer_example_matches_unsplit():
    doc = {"user": {"id": 1, "tags": ["a"], "profile": {"name": "x", "age": 3}}, "ok": True}
    text = json.dumps(doc)
    assert infer_example(text, 3) == infer_from_text(text)


def test_schema_node_invariants():
    with pytest.raises(MalformedSchema):
        JsonSchemaNode("string", {"a": JsonSchemaNode("string")})
    with pytest.raises(MalformedSchema):
        JsonSchemaNode("object", {}, required=["a"])
    with pytest.raises(MalformedSchema):
        JsonSchemaNode("date")


def test_schema_node_dict_round_trip():
    node = infer_from_text('{"a": [{"b": null}], "c": 1.5}')
    assert JsonSchemaNode.from_dict(node.to_dict(keep_empty_required=True)) == node


@pytest.mark.parametrize("value,kind", [
    ("10", "integer"), ("-3", "integer"), ("2.5", "number"), ("true", "boolean"),
    ("False", "boolean"), ("abc", "string"), ("", "string"), ("1e3", "number"),
])
def test_literal_type(value, kind):
    assert literal_type(value) == kind


def test_skeleton_post_with_bearer():
    sk = generate_skeleton(_pair(
        "curl -X POST https://api.example.com/v1/charges -H 'Authorization: Bearer sk_test' "
        "-H 'Content-Type: application/json' -d '{\"amount\": 5}'"
    ))
    assert sk.method == "post" and sk.path == "/v1/charges"
    assert sk.has_request_body
    assert any(s.get("scheme") == "bearer" for s in sk.security_schemes.values())
    assert not any(p.location == "header" and p.name.lower() == "authorization" for p in sk.parameters)


def test_skeleton_get_query_type():
    sk = generate_skeleton(_pair("curl 'https://api.example.com/v1/items?limit=10&q=abc'"))
    types = {p.name: p.type for p in sk.parameters}
    assert types == {"limit": "integer", "q": "string"}


def test_skeleton_templated_from_documentation():
    sk = generate_skeleton(_pair("curl https://api.example.com/info/42"), "GET /info/{id}\nReturns one record.")
    assert sk.path == "/info/{id}"
    assert [(p.name, p.location, p.type) for p in sk.parameters] == [("id", "path", "integer")]


@pytest.mark.parametrize("example,doc,expected", [
    ("/users/7/posts/3", "GET /users/{user_id}/posts/{post_id}", "/users/{user_id}/posts/{post_id}"),
    ("/v1/users/7", "GET /users/:id", "/v1/users/{id}"),
    ("/users/7", "", "/users/7"),
    ("/users/7", "GET /orders/{id}", "/users/7"),
])
def test_template_path(example, doc, expected):
    assert template_path(example, doc)[0] == expected


def test_base_oas_is_valid_and_marked_base():
    sk = generate_skeleton(_pair(
        "curl -X POST 'https://api.example.com/v1/things?dry_run=true' -H 'X-Trace: 1' -d '{\"name\": \"a\"}'"
    ))
    doc = build_base_oas(sk, infer_from_text('{"name": "a"}'), infer_from_text('{"id": 1, "tags": []}'))
    report = check_document(doc.to_json())
    assert report.is_valid_oas, report.warnings
    assert doc.provenance and doc.provenance_values() == {"base"}
    assert doc.single_operation()[:2] == ("/v1/things", "post")


def test_base_oas_omits_empty_required():
    sk = generate_skeleton(_pair("curl https://api.example.com/x"))
    doc = build_base_oas(sk, None, infer_from_text('[{"a": 1}, {"b": 2}]'))
    assert '"required": []' not in doc.to_json()
    assert check_document(doc.to_json()).is_valid_oas


def test_base_oas_error_status():
    sk = generate_skeleton(_pair("curl https://api.example.com/x"))
    doc = build_base_oas(sk, None, infer_from_text('{"error": "x"}'), "404")
    assert list(doc.single_operation()[2]["responses"]) == ["404"]
