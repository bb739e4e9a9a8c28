"""Command line interface: ingest, stats, gen, run, report, serve, bench."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from ..catalog import Catalog, compute_stats, ingest_table, stats_to_json
from ..config import default_config, load_config
from ..session import Pipeline, Registry
from ..vector.corpus import load_corpus_jsonl, save_corpus_jsonl


@click.group()
def main() -> None:
    """Cost-gated query clarification engine."""


@main.command()
@click.argument("csv_path", type=click.Path(exists=True))
@click.option("--table", "table_name", default=None, help="Table name override.")
def ingest(csv_path: str, table_name: str) -> None:
    """Load a CSV and print its inferred schema and row count."""
    table = ingest_table(csv_path, table_name=table_name)
    click.echo(json.dumps({
        "table": table.name,
        "row_count": table.row_count,
        "columns": [{"name": c, "kind": k} for c, k in table.schema.columns],
    }, indent=2, sort_keys=True))


@main.command()
@click.argument("csv_path", type=click.Path(exists=True))
@click.option("--buckets", default=32, show_default=True,
              help="Histogram bucket count.")
def stats(csv_path: str, buckets: int) -> None:
    """Compute and dump column statistics as JSON (stable key order)."""
    table = ingest_table(csv_path)
    click.echo(stats_to_json(compute_stats(table, buckets)))


@main.command()
@click.option("--seed", default=7, show_default=True)
@click.option("--scale", default="small", show_default=True,
              type=click.Choice(["small", "medium"]))
@click.option("--out", "outdir", default="data", show_default=True)
def gen(seed: int, scale: str, outdir: str) -> None:
    """Generate the synthetic tables, corpus, and workload files."""
    from .synth import (build_relational_workload, build_vector_workload,
                        generate_synthetic)
    from .workload import save_workload

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    data = generate_synthetic(seed, scale)
    for name, table in data.tables.items():
        _write_table_csv(table, out / f"{name}.csv")
    save_corpus_jsonl(data.corpus, out / f"{data.corpus_name}.jsonl")
    rel = build_relational_workload(seed + 10)
    vec = build_vector_workload(data.corpus, seed + 11)
    save_workload(rel, out / "workload_relational.json")
    save_workload(vec, out / "workload_vector.json")
    click.echo(f"wrote {len(data.tables)} tables, corpus "
               f"({len(data.corpus)} vectors), and 2 workload files to {out}")


def _write_table_csv(table, path: Path) -> None:
    import csv as _csv
    from datetime import date as _date

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = _csv.writer(fh, lineterminator="\n")
        names = table.schema.column_names()
        writer.writerow(names)
        cols = [table.columns[n].values for n in names]
        for i in range(table.row_count):
            row = []
            for col in cols:
                v = col[i]
                if v is None:
                    row.append(r"\N")
                elif isinstance(v, _date):
                    row.append(v.isoformat())
                else:
                    row.append(v)
            writer.writerow(row)


def build_registry(data_dir: str | Path, config) -> Registry:
    """Load every CSV and JSONL in a data directory into a registry."""
    data = Path(data_dir)
    registry = Registry(Catalog(bucket_count=config.catalog.bucket_count))
    for csv_path in sorted(data.glob("*.csv")):
        registry.catalog.add(ingest_table(csv_path))
    for jsonl_path in sorted(data.glob("*.jsonl")):
        corpus = load_corpus_jsonl(jsonl_path)
        registry.add_corpus(jsonl_path.stem, corpus, config)
    return registry


@main.command()
@click.option("--data", "data_dir", default="data", show_default=True)
@click.option("--workload", "workload_path", required=True,
              type=click.Path(exists=True))
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True))
@click.option("--out", "outdir", default="runs/latest", show_default=True)
@click.option("--verbose/--quiet", default=True)
def run(data_dir: str, workload_path: str, config_path: str, outdir: str,
        verbose: bool) -> None:
    """Run a workload through the pipeline and write report files."""
    from .report import write_report
    from .workload import load_workload, run_workload

    config = load_config(config_path) if config_path else default_config()
    registry = build_registry(data_dir, config)
    entries = load_workload(workload_path)
    report = run_workload(registry, entries, config, verbose=verbose)
    paths = write_report(report, outdir)
    agg = report.aggregates()
    click.echo(json.dumps(agg, indent=2, sort_keys=True))
    click.echo(f"report files: {paths['entries']} {paths['aggregates']}")
    failed = agg["failed_count"]
    sys.exit(1 if failed else 0)


@main.command()
@click.argument("entries_csv", type=click.Path(exists=True))
@click.option("--out", "outdir", default=None)
def report(entries_csv: str, outdir: str) -> None:
    """Re-derive aggregate JSON from a written entries.csv."""
    from .report import read_entries_csv, write_report
    from .workload import HARNESS_KAPPA, RunReport

    rows = read_entries_csv(entries_csv)
    rep = RunReport(entries=rows, kappa=HARNESS_KAPPA)
    if outdir:
        paths = write_report(rep, outdir)
        click.echo(f"report files: {paths['entries']} {paths['aggregates']}")
    else:
        click.echo(json.dumps(rep.aggregates(), indent=2, sort_keys=True))


@main.command()
@click.option("--data", "data_dir", default="data", show_default=True)
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8400, show_default=True)
def serve(data_dir: str, config_path: str, host: str, port: int) -> None:
    """Serve the HTTP JSON API (and the UI, if built) over a data directory."""
    import uvicorn

    from ..service import create_app

    config = load_config(config_path) if config_path else default_config()
    registry = build_registry(data_dir, config)
    pipeline = Pipeline(registry, config)
    app = create_app(pipeline)
    _mount_ui(app)
    uvicorn.run(app, host=host, port=port)


def _mount_ui(app) -> None:
    ui_dist = Path(__file__).resolve().parents[3] / "frontend" / "dist"
    index = ui_dist / "index.html"
    if index.exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dist), html=True),
                  name="ui")


@main.command()
@click.option("--size", default=200_000, show_default=True)
@click.option("--dim", default=32, show_default=True)
def bench(size: int, dim: int) -> None:
    """Benchmark the compiled distance kernels against the NumPy fallback."""
    import runpy

    sys.argv = ["bench_kernels", "--size", str(size), "--dim", str(dim)]
    bench_path = Path(__file__).resolve().parents[3] / "benchmarks" / "bench_kernels.py"
    runpy.run_path(str(bench_path), run_name="__main__")


if __name__ == "__main__":
    main()
