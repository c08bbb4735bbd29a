from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from docs2oas.cli import main
from docs2oas.config import build_config
from docs2oas.validate import check_document

import synthetic

TWO_ENDPOINTS = """<!DOCTYPE html><html><body><main>
<section><h2>List orders</h2><p><code>GET</code> <code>/v1/orders</code></p>
<h3>Query parameters</h3>
<table><tr><th>Name</th><th>Type</th><th>Required</th><th>Description</th></tr>
<tr><td>limit</td><td>integer</td><td>No</td><td>How many orders to return.</td></tr>
<tr><td>status</td><td>string</td><td>No</td><td>Only orders in this state.</td></tr></table>
<h3>Response fields</h3>
<table><tr><th>Field</th><th>Type</th><th>Description</th></tr>
<tr><td>data</td><td>array</td><td>The orders.</td></tr>
<tr><td>data.id</td><td>integer</td><td>Order id.</td></tr></table>
<pre>curl 'https://api.shop.test/v1/orders?limit=2&amp;status=open'</pre>
<pre>{"data": [{"id": 1}, {"id": 2}]}</pre>
</section>
<section><h2>Create an order</h2><p><code>POST</code> <code>/v1/orders</code></p>
<h3>Request body</h3>
<table><tr><th>Name</th><th>Type</th><th>Required</th><th>Description</th></tr>
<tr><td>sku</td><td>string</td><td>Yes</td><td>Product to order.</td></tr>
<tr><td>quantity</td><td>integer</td><td>No</td><td>Number of units.</td></tr></table>
<pre>curl -X POST https://api.shop.test/v1/orders -H 'Content-Type: application/json' -d '{"sku": "A1", "quantity": 2}'</pre>
<pre>{"id": 3, "sku": "A1"}</pre>
</section>
</main></body></html>
"""


@pytest.fixture
def page(tmp_path) -> Path:
    p = tmp_path / "shop.html"
    p.write_text(TWO_ENDPOINTS, encoding="utf-8")
    return p


def _run(*args):
    return CliRunner().invoke(main, list(map(str, args)), catch_exceptions=False)


def test_generate_two_endpoints(page, tmp_path, no_network):
    out = tmp_path / "out"
    res = _run("generate", "--input", page, "--out", out)
    assert res.exit_code == 0, res.output
    files = sorted(p.name for p in (out / "shop").iterdir())
    assert files == ["get_v1_orders.oas.json", "post_v1_orders.oas.json"]
    for f in (out / "shop").iterdir():
        assert check_document(f.read_text()).is_valid_oas
    get = json.loads((out / "shop" / "get_v1_orders.oas.json").read_text())
    params = {p["name"]: p for p in get["paths"]["/v1/orders"]["get"]["parameters"]}
    assert params["limit"]["description"] == "How many orders to return."
    assert params["limit"]["schema"] == {"type": "integer"}
    post = json.loads((out / "shop" / "post_v1_orders.oas.json").read_text())
    body = post["paths"]["/v1/orders"]["post"]["requestBody"]["content"]["application/json"]["schema"]
    assert body["required"] == ["sku"]
    report = json.loads((out / "run_report.json").read_text())
    assert report["totals"]["valid_oas"] == 2
    assert (out / "endpoints.tsv").read_text().count("\n") == 3


def test_no_enrichment_keeps_base_only(page, tmp_path):
    out = tmp_path / "out"
    assert _run("generate", "--input", page, "--out", out, "--no-enrichment").exit_code == 0
    report = json.loads((out / "run_report.json").read_text())
    for ep in report["documents"][0]["endpoints"]:
        assert set(ep["provenance"].values()) == {"base"}
    get = json.loads((out / "shop" / "get_v1_orders.oas.json").read_text())
    assert "description" not in get["paths"]["/v1/orders"]["get"]["parameters"][0]


def test_unreachable_remote_provider_degrades(page, tmp_path):
    out = tmp_path / "out"
    res = _run("generate", "--input", page, "--out", out, "--provider", "remote-http",
               "--endpoint", "http://127.0.0.1:9/generate", "--model", "m")
    assert res.exit_code == 0, res.output
    report = json.loads((out / "run_report.json").read_text())
    notes = [n for ep in report["documents"][0]["endpoints"] for n in ep["notes"]]
    assert any("provider failed" in n for n in notes)
    assert any("enrichment skipped" in n for n in notes)
    assert report["totals"]["valid_oas"] == 2


def test_yaml_output(page, tmp_path):
    out = tmp_path / "out"
    assert _run("generate", "--input", page, "--out", out, "--format", "yaml").exit_code == 0
    assert sorted(p.suffix for p in (out / "shop").iterdir()) == [".yaml", ".yaml"]


def test_page_without_examples_fails(tmp_path):
    p = tmp_path / "empty.html"
    p.write_text("<html><body><p>Nothing here</p></body></html>")
    res = _run("generate", "--input", p, "--out", tmp_path / "out")
    assert res.exit_code == 1
    missing = _run("generate", "--input", tmp_path / "nope.html", "--out", tmp_path / "out2")
    assert missing.exit_code == 1 and "ingest failed" in missing.output


def test_bad_config_is_a_usage_error(page, tmp_path):
    res = _run("generate", "--input", page, "--out", tmp_path / "o", "--line-threshold", "0")
    assert res.exit_code == 2


def test_config_file_and_flag_precedence(tmp_path):
    cfg = build_config({"line_threshold": 7, "icl": {"k": 2}, "seed": 5}, seed=9)
    assert (cfg.line_threshold, cfg.icl_k, cfg.seed) == (7, 2, 9)
    f = tmp_path / "c.yaml"
    f.write_text("enrichment_enabled: false\nscope_budget: 500\n")
    from docs2oas.config import read_config_file

    assert build_config(read_config_file(f)).enrichment_enabled is False


def test_validate_exit_codes(tmp_path):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"openapi": "3.0.3", "info": {"title": "t", "version": "1"}, "paths": {}}))
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert _run("validate", good).exit_code == 0
    res = _run("validate", good, bad, "--out", tmp_path / "r.json", "--figures", tmp_path / "fig")
    assert res.exit_code == 1
    summary = json.loads((tmp_path / "r.json").read_text())["summary"]
    assert summary["valid_json_ratio"] == 0.5
    assert (tmp_path / "fig" / "syntax.png").exists()
    assert _run("validate").exit_code == 2


def test_evaluate_prints_table(page, tmp_path):
    out = tmp_path / "out"
    _run("generate", "--input", page, "--out", out)
    truth = tmp_path / "truth"
    truth.mkdir()
    for f in (out / "shop").iterdir():
        (truth / f.name).write_text(f.read_text())
    res = _run("evaluate", "--pred", f"mine={out}", "--truth", truth, "--out", tmp_path / "m.json",
               "--figures", tmp_path / "fig")
    assert res.exit_code == 0
    row = res.output.splitlines()[1].split("\t")
    assert row[0] == "mine" and set(row[1:]) == {"1.00"}
    assert (tmp_path / "m.e2e.tsv").exists() and (tmp_path / "m.fields.tsv").exists()
    assert {p.name for p in (tmp_path / "fig").iterdir()} == {"e2e.png", "fields.png"}


def test_committed_corpus_is_reproducible(tmp_path, corpus_dir):
    fresh = synthetic.write_corpus(tmp_path / "corpus")
    for sub in ("pages", "truth"):
        committed = {p.name: p.read_bytes() for p in (corpus_dir / sub).iterdir()}
        regenerated = {p.name: p.read_bytes() for p in (fresh / sub).iterdir()}
        assert committed == regenerated
