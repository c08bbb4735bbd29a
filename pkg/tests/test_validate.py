from __future__ import annotations

import json
import random

import pytest

from docs2oas.errors import EmptyCorpus
from docs2oas.validate import META_SCHEMA_ID, ValidationReport, check_document, meta_schema, summarize

VALID = {"openapi": "3.0.3", "info": {"title": "t", "version": "1"}, "paths": {}}
ONE_WARNING = {"openapi": "3.0.3", "paths": {}}  # info missing
TWO_WARNINGS = {"openapi": "2.0", "paths": {}}  # info missing, version pattern


def granite_corpus() -> list[str]:
    """100 documents: 73 valid, 21 with two warnings, 6 with one."""
    return [json.dumps(VALID)] * 73 + [json.dumps(TWO_WARNINGS)] * 21 + [json.dumps(ONE_WARNING)] * 6


def test_meta_schema_is_the_pinned_revision():
    assert meta_schema()["id"] == META_SCHEMA_ID


@pytest.mark.parametrize("doc,count,pointers", [
    (VALID, 0, []),
    (ONE_WARNING, 1, [""]),
    (TWO_WARNINGS, 2, ["", "/openapi"]),
    ({**VALID, "paths": {"/x": {"get": {}}}}, 1, ["/paths/~1x/get"]),
    ({**VALID, "paths": {"/x": {"get": {"responses": {"200": {"description": "ok"}}}}}}, 0, []),
])
def test_warning_counts(doc, count, pointers):
    report = check_document(json.dumps(doc))
    assert report.is_valid_json
    assert report.warning_count == count and report.is_valid_oas is (count == 0)
    assert [w.json_pointer for w in report.warnings] == pointers


@pytest.mark.parametrize("text", ["{", "", '{"a": NaN}', "[1,]"])
def test_invalid_json(text):
    report = check_document(text)
    assert not report.is_valid_json and not report.is_valid_oas and report.error


def test_empty_required_list_is_flagged():
    doc = {**VALID, "components": {"schemas": {"A": {"type": "object", "required": []}}}}
    assert not check_document(json.dumps(doc)).is_valid_oas


def test_report_invariant():
    with pytest.raises(ValueError):
        ValidationReport(False, True)


def test_granite_row():
    summary = summarize([check_document(t) for t in granite_corpus()])
    assert (summary.valid_json_ratio, summary.valid_oas_ratio) == (1.0, 0.73)
    assert summary.avg_warnings == pytest.approx(0.48)
    assert summary.row() == "1.00 / 0.73 / 0.48"


def test_warnings_averaged_over_json_valid_only():
    reports = [check_document(json.dumps(ONE_WARNING)), check_document("{"), check_document(json.dumps(VALID))]
    summary = summarize(reports)
    assert summary.valid_json_ratio == pytest.approx(2 / 3)
    assert summary.avg_warnings == pytest.approx(0.5)


@pytest.mark.parametrize("seed", range(10))
def test_summary_is_order_invariant(seed):
    reports = [check_document(t) for t in granite_corpus() + ["nope"] * 5]
    shuffled = reports[:]
    random.Random(seed).shuffle(shuffled)
    assert summarize(shuffled) == summarize(reports)


def test_empty_corpus():
    with pytest.raises(EmptyCorpus):
        summarize([])
