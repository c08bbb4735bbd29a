"""Command line: ``docs2oas generate | validate | evaluate``."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import pipeline
from .config import FORMATS, METRICS, build_config, read_config_file
from .errors import Docs2OasError, EmptyCorpus
from .validate import check_document, summarize


@click.group()
@click.option("-v", "--verbose", count=True, help="Repeat for more logging.")
def main(verbose: int) -> None:
    """Turn HTML API documentation into OpenAPI 3.0 documents and score them."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--input", "inputs", multiple=True, required=True,
              help="HTML file, directory of pages, or http(s) URL. Repeatable.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--provider", type=click.Choice(["reference-oracle", "remote-http"]), default=None)
@click.option("--endpoint", default=None, help="Completion URL for remote-http.")
@click.option("--model", "model_name", default=None)
@click.option("--auth-env", "auth_env_var", default=None, help="Env var holding the API token.")
@click.option("--enrichment/--no-enrichment", default=None)
@click.option("--line-threshold", type=int, default=None)
@click.option("--scope-budget", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--timeout", "fetch_timeout", type=float, default=None, help="Page fetch timeout, seconds.")
@click.option("--format", "output_format", type=click.Choice(FORMATS), default=None)
@click.option("--jobs", type=int, default=None)
@click.option("--icl-path", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--icl-k", type=int, default=None)
@click.option("--icl-metric", type=click.Choice(METRICS), default=None)
@click.option("--offline", is_flag=True, help="Refuse to fetch URLs.")
def generate(inputs, out_dir, config_path, provider, endpoint, model_name, auth_env_var, enrichment,
             line_threshold, scope_budget, seed, fetch_timeout, output_format, jobs, icl_path,
             icl_k, icl_metric, offline) -> None:
    """Write one OAS file per endpoint found, plus run_report.json and endpoints.tsv."""
    try:
        config = build_config(
            read_config_file(config_path) if config_path else None,
            provider_kind=provider, provider_endpoint=endpoint, provider_model_name=model_name,
            provider_auth_env_var=auth_env_var, enrichment_enabled=enrichment,
            line_threshold=line_threshold, scope_budget=scope_budget, seed=seed,
            fetch_timeout=fetch_timeout, output_format=output_format, jobs=jobs,
            icl_path=icl_path, icl_k=icl_k, icl_metric=icl_metric,
            allow_network=False if offline else None,
        )
    except (ValueError, TypeError) as exc:
        raise click.UsageError(f"bad configuration: {exc}") from exc
    report = pipeline.run(list(inputs), out_dir, config)
    totals = report["totals"]
    for doc in report["documents"]:
        if doc["error"]:
            click.echo(f"{doc['source']}: {doc['error']['stage']} failed: {doc['error']['message']}", err=True)
    click.echo(
        f"{totals['documents_emitted']} documents written to {out_dir}, "
        f"{totals['valid_oas']} valid OAS, {totals['warnings']} warnings"
    )
    ok = (
        totals["documents_emitted"] > 0
        and totals["valid_oas"] == totals["documents_emitted"]
        and totals["documents_failed"] == 0
    )
    sys.exit(0 if ok else 1)


@main.command()
@click.argument("files", nargs=-1, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Also write the JSON report here.")
@click.option("--figures", "figures_dir", type=click.Path(file_okay=False), default=None)
def validate(files, out_path, figures_dir) -> None:
    """Check documents against the OpenAPI 3.0 meta-schema."""
    reports = {f: check_document(Path(f).read_text(encoding="utf-8", errors="replace")) for f in files}
    try:
        summary = summarize(list(reports.values()))
    except EmptyCorpus as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    payload = {
        "documents": {f: r.to_dict() for f, r in reports.items()},
        "summary": summary.to_dict(),
    }
    text = json.dumps(payload, indent=2)
    click.echo(text)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    if figures_dir:
        from .figures import plot_syntax

        Path(figures_dir).mkdir(parents=True, exist_ok=True)
        plot_syntax(summary, Path(figures_dir) / "syntax.png")
    sys.exit(0 if all(r.is_valid_oas for r in reports.values()) else 1)


@main.command()
@click.option("--pred", "pred_dirs", multiple=True, required=True,
              help="Predicted OAS directory; LABEL=DIR names the variant. Repeatable.")
@click.option("--truth", "truth_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--figures", "figures_dir", type=click.Path(file_okay=False), default=None)
def evaluate(pred_dirs, truth_dir, out_path, figures_dir) -> None:
    """Score predictions against ground truth; writes JSON plus TSV tables."""
    from .evaluate import e2e_report, load_cases, render_e2e_table, render_field_table

    reports = {}
    try:
        for item in pred_dirs:
            label, _, directory = item.rpartition("=") if "=" in item else ("", "", item)
            label = label or Path(directory).name
            if not Path(directory).is_dir():
                raise click.BadParameter(f"{directory} is not a directory", param_hint="--pred")
            reports[label] = e2e_report(load_cases(directory, truth_dir))
    except EmptyCorpus as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except Docs2OasError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({k: v.to_dict() for k, v in reports.items()}, indent=2) + "\n", encoding="utf-8")
    e2e = render_e2e_table(reports)
    out.with_suffix(".e2e.tsv").write_text(e2e, encoding="utf-8")
    out.with_suffix(".fields.tsv").write_text(render_field_table(reports), encoding="utf-8")
    click.echo(e2e, nl=False)
    if figures_dir:
        from .figures import plot_e2e, plot_fields

        fig_dir = Path(figures_dir)
        fig_dir.mkdir(parents=True, exist_ok=True)
        plot_e2e(reports, fig_dir / "e2e.png")
        plot_fields(reports, fig_dir / "fields.png")


if __name__ == "__main__":  # pragma: no cover
    main()
