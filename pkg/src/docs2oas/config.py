"""Run configuration: defaults, config file, command-line overrides."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import yaml

from .builder import DEFAULT_LINE_THRESHOLD
from .gateway import DEFAULT_K, DEFAULT_METRIC, DecodingParams, ProviderConfig
from .scope import DEFAULT_SCOPE_BUDGET

METRICS = ("cosine", "kl-divergence")
FORMATS = ("json", "yaml")


@dataclass(frozen=True)
class RunConfig:
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    decoding: DecodingParams = field(default_factory=DecodingParams)
    icl_path: str | None = None
    icl_k: int = DEFAULT_K
    icl_metric: str = DEFAULT_METRIC
    line_threshold: int = DEFAULT_LINE_THRESHOLD
    scope_budget: int = DEFAULT_SCOPE_BUDGET
    seed: int = 0
    enrichment_enabled: bool = True
    output_format: str = "json"
    fetch_timeout: float = 30.0
    allow_network: bool = True
    jobs: int = 1

    def __post_init__(self) -> None:
        for name in ("icl_k", "line_threshold", "scope_budget", "jobs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.fetch_timeout <= 0:
            raise ValueError("fetch_timeout must be positive")
        if self.icl_metric not in METRICS:
            raise ValueError(f"icl metric must be one of {METRICS}")
        if self.output_format not in FORMATS:
            raise ValueError(f"output format must be one of {FORMATS}")

    def summary(self) -> dict[str, Any]:
        """Settings that shape outputs, safe to write to the run report (no secrets)."""
        return {
            "provider": {"kind": self.provider.kind, "model_name": self.provider.model_name},
            "icl": {"path": self.icl_path or "bundled", "k": self.icl_k, "metric": self.icl_metric},
            "line_threshold": self.line_threshold,
            "scope_budget": self.scope_budget,
            "seed": self.seed,
            "enrichment_enabled": self.enrichment_enabled,
            "output_format": self.output_format,
        }


def read_config_file(path: str | Path) -> dict[str, Any]:
    text = Path(path).read_text(encoding="utf-8")
    data = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a mapping")
    return data


def _flatten(data: dict[str, Any], prefix: str = "") -> dict[str, Any]:
    out = {}
    for k, v in data.items():
        key = f"{prefix}{k}".replace("-", "_")
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


_FILE_KEYS = {
    "icl.path": "icl_path",
    "icl.k": "icl_k",
    "icl.metric": "icl_metric",
    "line_threshold": "line_threshold",
    "scope_budget": "scope_budget",
    "seed": "seed",
    "enrichment": "enrichment_enabled",
    "enrichment_enabled": "enrichment_enabled",
    "output_format": "output_format",
    "format": "output_format",
    "fetch_timeout": "fetch_timeout",
    "timeout": "fetch_timeout",
    "allow_network": "allow_network",
    "jobs": "jobs",
}


def build_config(file_values: dict[str, Any] | None = None, **flags: Any) -> RunConfig:
    """Merge settings; a flag left as ``None`` falls through to the file, then the default."""
    flat = _flatten(file_values or {})
    top: dict[str, Any] = {}
    provider: dict[str, Any] = {}
    decoding: dict[str, Any] = {}
    for key, value in flat.items():
        if key.startswith("provider."):
            provider[key.split(".", 1)[1]] = value
        elif key.startswith("decoding."):
            decoding[key.split(".", 1)[1]] = value
        elif key in _FILE_KEYS:
            top[_FILE_KEYS[key]] = value
        else:
            raise ValueError(f"unknown config key {key!r}")
    for key, value in flags.items():
        if value is None:
            continue
        if key.startswith("provider_"):
            provider[key[len("provider_"):]] = value
        else:
            top[key] = value
    provider_fields = {f.name for f in fields(ProviderConfig)}
    unknown = set(provider) - provider_fields
    if unknown:
        raise ValueError(f"unknown provider settings {sorted(unknown)}")
    if "stop_sequences" in decoding:
        decoding["stop_sequences"] = tuple(decoding["stop_sequences"] or ())
    return replace(
        RunConfig(),
        provider=ProviderConfig(**provider),
        decoding=DecodingParams(**decoding),
        **top,
    )
