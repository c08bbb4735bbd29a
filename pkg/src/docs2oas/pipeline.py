"""Per-page orchestration: ingest, extract, scope, build, enrich, validate, write."""

from __future__ import annotations

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import gateway
from .builder import (
    build_base_oas,
    generate_skeleton,
    infer_example,
)
from .builder.document import OasDocument
from .builder.skeleton import OasSkeleton
from .config import RunConfig
from .enrich import filter_hallucinations, merge, parse_request_tsv, parse_response_schema
from .errors import Docs2OasError, EmptyLibrary, OracleUnsupported, ProviderError, ValidationExhausted
from .extractor import EndpointExamplePair, extract_pairs
from .gateway import IclLibrary, Task
from .ingest import load_snapshot, parse_dom, text_content
from .scope import EnrichmentScope, ProcessedScope, find_scope, preprocess_scope
from .validate import ValidationReport, check_document, summarize

log = logging.getLogger(__name__)

REPORT_NAME = "run_report.json"
ENDPOINTS_TSV = "endpoints.tsv"
_SOFT_FAILURES = (OracleUnsupported, ProviderError, ValidationExhausted, EmptyLibrary)


def sanitize_path(path: str) -> str:
    clean = re.sub(r"[{}]", "", path.strip("/"))
    clean = re.sub(r"[^A-Za-z0-9._-]+", "_", clean).strip("_")
    return clean or "root"


def endpoint_filename(method: str, path: str, fmt: str = "json") -> str:
    return f"{method.lower()}_{sanitize_path(path)}.oas.{fmt}"


@dataclass
class EndpointResult:
    method: str
    path: str
    document: OasDocument
    report: ValidationReport
    scope_origin: str
    hallucinations: dict[str, list[str]] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    enriched: dict[str, bool] = field(default_factory=dict)
    file: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "path": self.path,
            "file": self.file,
            "valid_json": self.report.is_valid_json,
            "valid_oas": self.report.is_valid_oas,
            "warning_count": self.report.warning_count,
            "warnings": [w.to_dict() for w in self.report.warnings],
            "scope_origin": self.scope_origin,
            "enriched": self.enriched,
            "hallucinations_filtered": self.hallucinations,
            "notes": self.notes,
            "provenance": dict(sorted(self.document.provenance.items())),
        }


@dataclass
class DocumentResult:
    source: str
    requests_found: int = 0
    responses_found: int = 0
    endpoints: list[EndpointResult] = field(default_factory=list)
    error: dict[str, str] | None = None
    out_dir: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "source": self.source,
            "out_dir": self.out_dir,
            "requests_found": self.requests_found,
            "pairs_formed": self.responses_found,
            "endpoints": [e.to_dict() for e in self.endpoints],
            "error": self.error,
        }


class Pipeline:
    """Turns pages into OAS documents under one :class:`RunConfig`."""

    def __init__(self, config: RunConfig, library: IclLibrary | None = None, client=None):
        self.config = config
        self._library = library
        self._client = client

    # -- gateway helpers ---------------------------------------------------

    @property
    def library(self) -> IclLibrary | None:
        if self._library is None and self.config.provider.is_remote:
            self._library = (
                gateway.load_library(self.config.icl_path)
                if self.config.icl_path
                else gateway.default_library()
            )
        return self._library

    def _run(self, task: Task, payload: str) -> str:
        return gateway.run_task(
            self.config.provider, task, payload,
            library=self.library, decoding=self.config.decoding,
            k=self.config.icl_k, metric=self.config.icl_metric, client=self._client,
        )

    def _skeleton(self, pair: EndpointExamplePair, documentation: str, notes: list[str]) -> OasSkeleton:
        if self.config.provider.is_remote:
            try:
                text = self._run(Task.SKELETON, gateway.skeleton_payload(pair, documentation))
                return gateway.parse_skeleton_output(text)
            except _SOFT_FAILURES as exc:
                notes.append(f"skeleton: provider failed ({exc}); used reference rules")
        return generate_skeleton(pair, documentation)

    def _schema(self, json_text: str, where: str, notes: list[str]):
        provider = self.config.provider
        if provider.is_remote:
            try:
                return infer_example(json_text, self.config.line_threshold, provider,
                                     self.library, self.config.decoding)
            except _SOFT_FAILURES as exc:
                notes.append(f"{where} schema: provider failed ({exc}); used reference rules")
        return infer_example(json_text, self.config.line_threshold)

    # -- stages ------------------------------------------------------------

    def build_endpoint(self, tree, pair: EndpointExamplePair, pairs: list[EndpointExamplePair]) -> EndpointResult:
        notes: list[str] = []
        scope: EnrichmentScope = find_scope(tree, pair, pairs, rng_seed=self.config.seed)
        processed: ProcessedScope | None
        try:
            processed = preprocess_scope(tree, scope, pair, self.config.scope_budget)
        except Docs2OasError as exc:
            processed = None
            notes.append(f"scope: {exc}")
        # templates like "GET /info/{id}" are read from the whole scope, since
        # preprocessing may drop the line that carries them
        skip = {pair.request.node_id} | ({pair.response.node_id} if pair.response else set())
        documentation = "\n".join(
            text_content(tree.node(i)) for i in scope.node_ids if i not in skip
        )

        skeleton = self._skeleton(pair, documentation, notes)
        req = pair.request.parsed
        request_schema = None
        if req.body_is_json and req.body:
            request_schema = self._schema(req.body, "request", notes)
        response_schema = None
        status = "200"
        if pair.response is not None:
            if pair.response.is_json:
                response_schema = self._schema(pair.response.body, "response", notes)
            if pair.response.status is not None and pair.response.status >= 400:
                status = str(pair.response.status)
        doc = build_base_oas(skeleton, request_schema, response_schema, status)

        hallucinations: dict[str, list[str]] = {}
        enriched = {"request": False, "response": False}
        if self.config.enrichment_enabled and processed is not None and processed.cleaned_html.strip():
            table = schema = None
            try:
                table = filter_hallucinations(
                    parse_request_tsv(self._run(Task.REQUEST_ENRICHMENT, processed.cleaned_html)), processed
                )
                hallucinations["request"] = list(table.dropped)
                enriched["request"] = bool(table.rows)
            except _SOFT_FAILURES as exc:
                notes.append(f"request enrichment skipped: {exc}")
            try:
                schema = filter_hallucinations(
                    parse_response_schema(self._run(Task.RESPONSE_ENRICHMENT, processed.cleaned_html)), processed
                )
                hallucinations["response"] = list(schema.dropped)
                enriched["response"] = bool(schema.names())
            except _SOFT_FAILURES as exc:
                notes.append(f"response enrichment skipped: {exc}")
            doc = merge(doc, table, schema, notes)
        elif self.config.enrichment_enabled:
            notes.append("enrichment skipped: empty scope")

        path, method, _op = doc.single_operation()
        return EndpointResult(
            method=method,
            path=path,
            document=doc,
            report=check_document(doc.to_json()),
            scope_origin=scope.label,
            hallucinations=hallucinations,
            notes=notes,
            enriched=enriched,
        )

    def process(self, source: str) -> DocumentResult:
        result = DocumentResult(source=str(source))
        stage = "ingest"
        try:
            snapshot = load_snapshot(source, self.config.fetch_timeout, self.config.allow_network)
            tree = parse_dom(snapshot.raw_html)
            stage = "extract"
            pairs = extract_pairs(tree)
            result.requests_found = len(pairs)
            result.responses_found = sum(p.response is not None for p in pairs)
            for pair in pairs:
                stage = "build"
                result.endpoints.append(self.build_endpoint(tree, pair, pairs))
        except Docs2OasError as exc:
            result.error = {"stage": exc.stage or stage, "message": str(exc)}
        return result


def _document_dirname(source: str, used: set[str]) -> str:
    stem = Path(str(source).split("?")[0].rstrip("/")).stem or "document"
    stem = sanitize_path(stem)
    name, n = stem, 2
    while name in used:
        name, n = f"{stem}_{n}", n + 1
    used.add(name)
    return name


def write_outputs(results: list[DocumentResult], out_dir: str | Path, config: RunConfig) -> dict[str, Any]:
    """Write one file per endpoint plus the run report; invalid documents get ``.partial``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    used: set[str] = set()
    rows = ["\t".join(["source", "method", "path", "file", "valid_oas", "warnings", "scope_origin"])]
    reports = []
    for res in results:
        sub = _document_dirname(res.source, used)
        res.out_dir = sub
        names: set[str] = set()
        for ep in res.endpoints:
            base = endpoint_filename(ep.method, ep.path, config.output_format)
            name, n = base, 2
            while name in names:
                name, n = base.replace(".oas.", f"_{n}.oas."), n + 1
            names.add(name)
            if not ep.report.is_valid_oas:
                name += ".partial"
            ep.file = f"{sub}/{name}"
            target = out / sub / name
            target.parent.mkdir(parents=True, exist_ok=True)
            text = ep.document.to_yaml() if config.output_format == "yaml" else ep.document.to_json()
            target.write_text(text, encoding="utf-8")
            reports.append(ep.report)
            rows.append("\t".join([
                res.source, ep.method, ep.path, ep.file, str(ep.report.is_valid_oas).lower(),
                str(ep.report.warning_count), ep.scope_origin,
            ]))
    summary = summarize(reports).to_dict() if reports else None
    warnings = sum(len(ep.notes) for r in results for ep in r.endpoints)
    report = {
        "config": config.summary(),
        "documents": [r.to_dict() for r in results],
        "totals": {
            "documents": len(results),
            "documents_failed": sum(r.error is not None for r in results),
            "endpoints_found": sum(r.requests_found for r in results),
            "pairs_formed": sum(r.responses_found for r in results),
            "documents_emitted": len(reports),
            "valid_oas": sum(rep.is_valid_oas for rep in reports),
            "hallucinations_filtered": sum(
                len(v) for r in results for ep in r.endpoints for v in ep.hallucinations.values()
            ),
            "warnings": warnings,
        },
        "validation_summary": summary,
    }
    (out / REPORT_NAME).write_text(json.dumps(report, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    (out / ENDPOINTS_TSV).write_text("\n".join(rows) + "\n", encoding="utf-8")
    return report


def expand_inputs(inputs: list[str]) -> list[str]:
    """Directories expand to their ``.html``/``.htm`` files in sorted order."""
    out: list[str] = []
    for item in inputs:
        p = Path(item)
        if not item.startswith(("http://", "https://")) and p.is_dir():
            out.extend(str(f) for f in sorted(p.rglob("*")) if f.suffix.lower() in (".html", ".htm"))
        else:
            out.append(item)
    return out


def run(inputs: list[str], out_dir: str | Path, config: RunConfig,
        library: IclLibrary | None = None, client=None) -> dict[str, Any]:
    """Process every input (concurrently with ``config.jobs`` > 1) and write outputs."""
    sources = expand_inputs(inputs)
    pipe = Pipeline(config, library, client)
    if config.jobs > 1 and len(sources) > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(pipe.process, sources))
    else:
        results = [pipe.process(s) for s in sources]
    return write_outputs(results, out_dir, config)
