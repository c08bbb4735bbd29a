"""Semantic scoring of generated OAS documents against ground truth."""

from __future__ import annotations

import json
import math
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal

import yaml

from .builder.document import OasDocument, request_schema_of, response_schema_of
from .builder.schema import JsonSchemaNode
from .enrich import normalize_type
from .errors import EmptyCorpus, MalformedSchema, NoEligiblePairs, SelectorMiss

Side = Literal["request", "response"]
FIELDS = ("required", "type", "location")
METRIC_KEYS = ("precision", "recall", "f1", "required_precision", "type_precision",
               "location_precision", "desc_similarity")


@dataclass(frozen=True)
class ParamView:
    """One parameter (request) or dotted property path (response) of an operation."""

    name: str
    location: str | None = None
    type: str | None = None
    required: bool | None = None
    description: str | None = None

    @property
    def key(self) -> str:
        return self.name.lower()


@dataclass
class ParamMatchSet:
    matched: list[tuple[ParamView, ParamView]] = field(default_factory=list)
    pred_only: list[ParamView] = field(default_factory=list)
    truth_only: list[ParamView] = field(default_factory=list)


@dataclass(frozen=True)
class EvalCase:
    predicted: OasDocument
    truth: OasDocument
    path: str
    method: str


# ---------------------------------------------------------------------------
# parameter views
# ---------------------------------------------------------------------------


def _norm_path(path: str) -> str:
    path = re.sub(r"\{[^{}/]*\}|:[A-Za-z_]\w*", "{}", path)
    return path.rstrip("/").lower() or "/"


def find_operation(doc: OasDocument, path: str, method: str) -> dict | None:
    method = method.lower()
    exact = doc.data.get("paths", {}).get(path, {})
    if isinstance(exact, dict) and isinstance(exact.get(method), dict):
        return exact[method]
    want = _norm_path(path)
    for p, m, op in doc.operations():
        if m == method and _norm_path(p) == want:
            return op
    return None


def _resolve_ref(doc: OasDocument, obj):
    seen = 0
    while isinstance(obj, dict) and "$ref" in obj and seen < 32:
        ref = obj["$ref"]
        if not isinstance(ref, str) or not ref.startswith("#/"):
            return {}
        target = doc.data
        for token in ref[2:].split("/"):
            token = token.replace("~1", "/").replace("~0", "~")
            target = target.get(token, {}) if isinstance(target, dict) else {}
        obj, seen = target, seen + 1
    return obj


def _deref_schema(doc: OasDocument, schema, depth: int = 0):
    """Inline local ``$ref`` links so truth files written with components still score."""
    schema = _resolve_ref(doc, schema)
    if not isinstance(schema, dict) or depth > 16:
        return schema
    out = dict(schema)
    if isinstance(out.get("properties"), dict):
        out["properties"] = {k: _deref_schema(doc, v, depth + 1) for k, v in out["properties"].items()}
    if isinstance(out.get("items"), dict):
        out["items"] = _deref_schema(doc, out["items"], depth + 1)
    for combo in ("allOf",):
        if isinstance(out.get(combo), list):
            merged: dict = {"type": "object", "properties": {}, "required": []}
            for part in out.pop(combo):
                part = _deref_schema(doc, part, depth + 1)
                merged["properties"].update(part.get("properties", {}))
                merged["required"] += part.get("required", [])
            out = {**merged, **{k: v for k, v in out.items() if k not in merged}}
    return out


def _schema_node(doc: OasDocument, schema) -> JsonSchemaNode | None:
    if not isinstance(schema, dict):
        return None
    clean = _deref_schema(doc, schema)
    try:
        return JsonSchemaNode.from_dict(_strip_unknown(clean))
    except MalformedSchema:
        return None


def _strip_unknown(schema):
    """Keep only the keywords the parameter views need."""
    if not isinstance(schema, dict):
        return {}
    out = {k: schema[k] for k in ("type", "description", "nullable") if k in schema}
    if out.get("type") not in (None, "object", "array", "string", "number", "integer", "boolean"):
        out.pop("type")
    if isinstance(schema.get("properties"), dict):
        out["properties"] = {k: _strip_unknown(v) for k, v in schema["properties"].items()}
        if "type" not in out:
            out["type"] = "object"
        if out["type"] == "object" and isinstance(schema.get("required"), list):
            out["required"] = [r for r in schema["required"] if r in out["properties"]]
        elif out["type"] != "object":
            out.pop("properties")
    if isinstance(schema.get("items"), dict) and out.get("type", "array") == "array":
        out["type"] = "array"
        out["items"] = _strip_unknown(schema["items"])
    return out


def request_params(doc: OasDocument, op: dict) -> list[ParamView]:
    views = []
    for p in op.get("parameters", []) or []:
        p = _resolve_ref(doc, p)
        if not isinstance(p, dict) or "name" not in p:
            continue
        schema = _resolve_ref(doc, p.get("schema") or {})
        views.append(
            ParamView(
                name=str(p["name"]),
                location=p.get("in"),
                type=schema.get("type") if isinstance(schema, dict) else None,
                # absent means false in OAS
                required=bool(p.get("required", False)),
                description=p.get("description"),
            )
        )
    body = _resolve_ref(doc, op.get("requestBody") or {})
    node = _schema_node(doc, request_schema_of({"requestBody": body})) if body else None
    if node is not None:
        obj = node
        while obj.type == "array" and obj.items is not None:
            obj = obj.items
        for name, child in obj.properties.items():
            views.append(
                ParamView(
                    name=name,
                    location="body",
                    type=child.type,
                    required=name in (obj.required or ()),
                    description=child.description,
                )
            )
    return views


def response_params(doc: OasDocument, op: dict) -> list[ParamView]:
    op = dict(op)
    op["responses"] = {k: _resolve_ref(doc, v) for k, v in (op.get("responses") or {}).items()}
    _status, schema = response_schema_of(op)
    node = _schema_node(doc, schema)
    if node is None:
        return []
    return [
        ParamView(
            name=path,
            type=child.type,
            required=path.rsplit(".", 1)[-1] in (owner.required or ()),
            description=child.description,
        )
        for path, child, owner in node.walk()
    ]


def params_of(doc: OasDocument, path: str, method: str, side: Side) -> list[ParamView] | None:
    op = find_operation(doc, path, method)
    if op is None:
        return None
    return request_params(doc, op) if side == "request" else response_params(doc, op)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def _pair_up(pred: list[ParamView], truth: list[ParamView]) -> ParamMatchSet:
    out = ParamMatchSet()
    groups_p: dict[str, list[ParamView]] = defaultdict(list)
    groups_t: dict[str, list[ParamView]] = defaultdict(list)
    for p in pred:
        groups_p[p.key].append(p)
    for t in truth:
        groups_t[t.key].append(t)
    for key in sorted(set(groups_p) | set(groups_t)):
        ps, ts = list(groups_p.get(key, [])), list(groups_t.get(key, []))
        # same-location pairs first so duplicates line up by location
        for p in list(ps):
            t = next((t for t in ts if t.location == p.location), None)
            if t is not None:
                out.matched.append((p, t))
                ps.remove(p)
                ts.remove(t)
        while ps and ts:
            out.matched.append((ps.pop(0), ts.pop(0)))
        out.pred_only.extend(ps)
        out.truth_only.extend(ts)
    return out


def match_params(case: EvalCase, side: Side) -> ParamMatchSet:
    """Case-insensitive name matching; locations do not affect matching."""
    truth = params_of(case.truth, case.path, case.method, side)
    if truth is None:
        raise SelectorMiss(f"{case.method.upper()} {case.path} not in ground truth")
    pred = params_of(case.predicted, case.path, case.method, side) or []
    return _pair_up(pred, truth)


def prf1(m: ParamMatchSet) -> dict[str, float]:
    tp = len(m.matched)
    p = tp / (tp + len(m.pred_only)) if tp + len(m.pred_only) else 0.0
    r = tp / (tp + len(m.truth_only)) if tp + len(m.truth_only) else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return {"precision": p, "recall": r, "f1": f1}


def _norm_field(name: str, value):
    if value is None:
        return None
    if name == "type":
        return normalize_type(str(value)) or str(value).lower()
    if name == "location":
        return str(value).lower()
    return bool(value)


def field_precision(m: ParamMatchSet, field_name: str) -> float:
    """Share of matched pairs whose ``field_name`` agrees with the truth.

    Pairs where the truth has no value for the field are left out; with no
    pair left :class:`NoEligiblePairs` is raised.
    """
    if field_name not in FIELDS:
        raise ValueError(f"unknown field {field_name!r}")
    eligible = [(p, t) for p, t in m.matched if _norm_field(field_name, getattr(t, field_name)) is not None]
    if not eligible:
        raise NoEligiblePairs(f"no matched pair has a truth {field_name}")
    hits = sum(
        _norm_field(field_name, getattr(p, field_name)) == _norm_field(field_name, getattr(t, field_name))
        for p, t in eligible
    )
    return hits / len(eligible)


def _tokens(text: str | None) -> Counter[str]:
    return Counter(re.findall(r"[a-z0-9]+", (text or "").lower()))


def description_similarity(pred_text: str | None, truth_text: str | None) -> float:
    """Cosine of term-frequency vectors over lowercase alphanumeric tokens."""
    a, b = _tokens(pred_text), _tokens(truth_text)
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    dot = sum(a[t] * b[t] for t in a.keys() & b.keys())
    norm = math.sqrt(sum(v * v for v in a.values()) * sum(v * v for v in b.values()))
    return min(1.0, dot / norm)


def _side_metrics(m: ParamMatchSet, side: Side) -> dict[str, float | None]:
    out: dict[str, float | None] = dict(prf1(m))
    for f in FIELDS:
        if side == "response" and f == "location":
            continue
        try:
            out[f"{f}_precision"] = field_precision(m, f)
        except NoEligiblePairs:
            out[f"{f}_precision"] = None
    sims = [description_similarity(p.description, t.description) for p, t in m.matched if t.description]
    out["desc_similarity"] = sum(sims) / len(sims) if sims else None
    return out


@dataclass
class MetricsReport:
    request: dict[str, float | None]
    response: dict[str, float | None]
    n_cases: int
    per_case: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_cases": self.n_cases,
            "request": self.request,
            "response": self.response,
            "per_case": self.per_case,
        }


def _macro(values: Iterable[dict], keys: Iterable[str]) -> dict[str, float | None]:
    values = list(values)
    out: dict[str, float | None] = {}
    for k in keys:
        present = [v[k] for v in values if v.get(k) is not None]
        out[k] = sum(present) / len(present) if present else None
    return out


def evaluate_case(case: EvalCase) -> dict:
    return {
        "path": case.path,
        "method": case.method,
        "request": _side_metrics(match_params(case, "request"), "request"),
        "response": _side_metrics(match_params(case, "response"), "response"),
    }


def e2e_report(cases: list[EvalCase]) -> MetricsReport:
    """Per-case metrics, macro-averaged; absent values are skipped in the mean."""
    if not cases:
        raise EmptyCorpus("no evaluation cases")
    per_case = [evaluate_case(c) for c in cases]
    req_keys = [k for k in METRIC_KEYS]
    resp_keys = [k for k in METRIC_KEYS if k != "location_precision"]
    return MetricsReport(
        request=_macro((c["request"] for c in per_case), req_keys),
        response=_macro((c["response"] for c in per_case), resp_keys),
        n_cases=len(cases),
        per_case=per_case,
    )


# ---------------------------------------------------------------------------
# rendering and loading
# ---------------------------------------------------------------------------


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.2f}"


def render_e2e_table(reports: dict[str, MetricsReport]) -> str:
    """Tab-separated table: one row per variant, P/R/F1/Sim for request then response."""
    cols = ("precision", "recall", "f1", "desc_similarity")
    head = ["variant"] + [f"request_{c}" for c in ("P", "R", "F1", "Sim")] + [
        f"response_{c}" for c in ("P", "R", "F1", "Sim")
    ]
    lines = ["\t".join(head)]
    for label, rep in reports.items():
        cells = [label] + [_fmt(rep.request[c]) for c in cols] + [_fmt(rep.response[c]) for c in cols]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def render_field_table(reports: dict[str, MetricsReport]) -> str:
    """Tab-separated F1 and field precisions for both sides."""
    head = ["variant", "side", "F1", "Req", "Type", "Loc", "Desc"]
    lines = ["\t".join(head)]
    for label, rep in reports.items():
        for side, vals in (("request", rep.request), ("response", rep.response)):
            lines.append("\t".join([
                label, side, _fmt(vals["f1"]), _fmt(vals["required_precision"]),
                _fmt(vals["type_precision"]), _fmt(vals.get("location_precision")),
                _fmt(vals["desc_similarity"]),
            ]))
    return "\n".join(lines) + "\n"


def load_oas(path: str | Path) -> OasDocument:
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith((".yaml", ".yml")):
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise MalformedSchema(f"{path}: not an OAS object")
    return OasDocument(data)


def _oas_files(directory: Path) -> list[Path]:
    return sorted(
        p for p in directory.rglob("*")
        if p.is_file() and p.suffix in (".json", ".yaml", ".yml") and not p.name.startswith("run_report")
    )


def load_cases(pred_dir: str | Path, truth_dir: str | Path) -> list[EvalCase]:
    """One case per truth operation; the prediction is looked up by method and path."""
    preds = [load_oas(p) for p in _oas_files(Path(pred_dir))]
    index: dict[tuple[str, str], OasDocument] = {}
    for doc in preds:
        for path, method, _op in doc.operations():
            index.setdefault((method, _norm_path(path)), doc)
    cases = []
    for truth_path in _oas_files(Path(truth_dir)):
        truth = load_oas(truth_path)
        for path, method, _op in truth.operations():
            pred = index.get((method, _norm_path(path)), OasDocument({"paths": {}}))
            cases.append(EvalCase(pred, truth, path, method))
    if not cases:
        raise EmptyCorpus(f"no ground-truth operations under {truth_dir}")
    return cases
