"""Command line entry points.

Every flag can also be set through an environment variable prefixed
CURVEQUERY_, e.g. CURVEQUERY_SERVE_PORT=9000.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import analytics, demo
from .dataset import ViewSpec, build_collection, load_dataset
from .engine import (
    MatchSpec,
    query_from_equation,
    query_from_series,
    query_from_upload,
    rank,
)
from .errors import CurveQueryError
from .filters import parse_filter, validate_filter
from .recommend import recommend as run_recommend
from .report import render_markov_report, render_query_report, render_recommend_report


def _fail(exc: CurveQueryError):
    click.echo(f"error [{exc.code}]: {exc.message}", err=True)
    sys.exit(1)


def _parse_x_range(_ctx, _param, value):
    if value is None:
        return None
    try:
        lo, hi = value.split(":", 1)
        return (float(lo), float(hi))
    except ValueError:
        raise click.BadParameter("expected LO:HI, e.g. 0.2:0.8") from None


def _load_collection(data_path, x, y, group, aggregate, filter_text):
    ds = load_dataset(Path(data_path).read_bytes(), Path(data_path).stem)
    view = ViewSpec(x_attr=x, y_attr=y, group_attr=group, aggregate=aggregate)
    ast = None
    if filter_text:
        ast = parse_filter(filter_text)
        validate_filter(ast, ds)
    return build_collection(ds, view, ast)


@click.group()
@click.version_option(package_name="curvequery")
def main():
    """Search, summarize, and analyze collections of line charts."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True, type=int)
@click.option("--data-dir", default="curvequery-data", show_default=True,
              type=click.Path(file_okay=False))
@click.option("--max-upload-mb", default=64.0, show_default=True, type=float)
@click.option("--session-ttl", default=3600.0, show_default=True, type=float,
              help="Idle seconds before a session is evicted.")
@click.option("--log-level", default="info", show_default=True,
              type=click.Choice(["critical", "error", "warning", "info", "debug"]))
@click.option("--demo", is_flag=True, help="Register the built-in demo datasets.")
def serve(host, port, data_dir, max_upload_mb, session_ttl, log_level, demo: bool):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(data_dir, max_upload_mb=max_upload_mb, session_ttl=session_ttl)
    if demo:
        state = app.state.curvequery
        for name, corpus in (
            ("demo-lightcurves", demo_corpus_peak()),
            ("demo-families", demo_corpus_families()),
        ):
            state.registry.register(load_dataset(corpus, name))
            state.persist_dataset(name, corpus)
    uvicorn.run(app, host=host, port=port, log_level=log_level)


def demo_corpus_peak() -> bytes:
    return demo.planted_peak_corpus()


def demo_corpus_families() -> bytes:
    return demo.three_family_corpus()


@main.command()
@click.argument("events_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", default="reports", show_default=True,
              type=click.Path(file_okay=False))
def report(events_file, out_dir):
    """Markov transition report from an event log (newline-delimited JSON).

    Writes markov.{json,csv,dot,png}; when events carry a "domain" field,
    a markov-<domain>.* set is written per domain as well.
    """
    events = []
    with open(events_file, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                event = json.loads(line)
            except json.JSONDecodeError as exc:
                click.echo(f"error [parse]: line {i}: {exc.msg}", err=True)
                sys.exit(1)
            if not isinstance(event, dict) or not isinstance(event.get("feature"), str):
                click.echo(
                    f"error [format]: line {i}: event must be a JSON object "
                    'with a "feature" string',
                    err=True,
                )
                sys.exit(1)
            events.append(event)
    if not events:
        click.echo("error [validation]: event log is empty", err=True)
        sys.exit(1)

    streams = {"": analytics.features_from_events(events)}
    for domain in sorted({e["domain"] for e in events if e.get("domain")}):
        streams[domain] = analytics.features_from_events(
            [e for e in events if e.get("domain") == domain]
        )

    written = []
    try:
        for domain, features in sorted(streams.items()):
            basename = "markov" if not domain else f"markov-{domain}"
            summary = analytics.analyze(features)
            written += render_markov_report(summary, out_dir, basename)
    except CurveQueryError as exc:
        _fail(exc)
    for path in written:
        click.echo(str(path))


@main.command()
@click.argument("data_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--x", "x_attr", required=True, help="Quantitative x attribute.")
@click.option("--y", "y_attr", required=True, help="Quantitative y attribute.")
@click.option("--group", "group_attr", required=True, help="Grouping attribute.")
@click.option("--aggregate", default="mean", show_default=True,
              type=click.Choice(["none", "mean", "median"]))
@click.option("--filter", "filter_text", default=None, help="Row filter expression.")
@click.option("--k", default=3, show_default=True, type=int)
@click.option("--m", default=3, show_default=True, type=int)
@click.option("--seed", default=7, show_default=True, type=int)
@click.option("--out-dir", default="reports", show_default=True,
              type=click.Path(file_okay=False))
def recommend(data_file, x_attr, y_attr, group_attr, aggregate, filter_text,
              k, m, seed, out_dir):
    """Representative shapes and outliers for a dataset's collection."""
    try:
        collection = _load_collection(
            data_file, x_attr, y_attr, group_attr, aggregate, filter_text
        )
        rec = run_recommend(collection.series, MatchSpec(), k=k, m=m, seed=seed)
        written = render_recommend_report(rec, collection, out_dir)
    except CurveQueryError as exc:
        _fail(exc)
    for path in written:
        click.echo(str(path))


@main.command()
@click.argument("data_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--x", "x_attr", required=True)
@click.option("--y", "y_attr", required=True)
@click.option("--group", "group_attr", required=True)
@click.option("--aggregate", default="mean", show_default=True,
              type=click.Choice(["none", "mean", "median"]))
@click.option("--filter", "filter_text", default=None, help="Row filter expression.")
@click.option("--equation", default=None, help="Query as y = f(x), e.g. 'x^2'.")
@click.option("--pattern", type=click.Path(exists=True, dir_okay=False),
              help="Query as a two-column x,y CSV file.")
@click.option("--series", "series_id", default=None,
              help="Query by an existing series id.")
@click.option("--metric", default="euclidean", show_default=True,
              type=click.Choice(["euclidean", "slope"]))
@click.option("--normalize", default="zscore", show_default=True,
              type=click.Choice(["zscore", "minmax", "none"]))
@click.option("--smooth-method", default="none", show_default=True,
              type=click.Choice(["none", "movingAverage", "exponential"]))
@click.option("--smooth-param", default=1.0, show_default=True, type=float,
              help="Odd window for movingAverage, alpha for exponential.")
@click.option("--resample-n", default=50, show_default=True, type=int)
@click.option("--top-k", default=10, show_default=True, type=int)
@click.option("--x-range", default=None, callback=_parse_x_range,
              help="Restrict matching to LO:HI.")
@click.option("--x-normalize/--no-x-normalize", default=True, show_default=True)
@click.option("--out-dir", default="reports", show_default=True,
              type=click.Path(file_okay=False))
def query(data_file, x_attr, y_attr, group_attr, aggregate, filter_text,
          equation, pattern, series_id, metric, normalize, smooth_method,
          smooth_param, resample_n, top_k, x_range, x_normalize, out_dir):
    """Rank a dataset's series against a query pattern."""
    sources = [s for s in (equation, pattern, series_id) if s]
    if len(sources) != 1:
        click.echo("error [validation]: choose exactly one of "
                   "--equation, --pattern, --series", err=True)
        sys.exit(1)
    try:
        collection = _load_collection(
            data_file, x_attr, y_attr, group_attr, aggregate, filter_text
        )
        spec = MatchSpec(
            metric=metric,
            normalize=normalize,
            smooth_method=smooth_method,
            smooth_param=smooth_param,
            resample_n=resample_n,
            x_normalize=x_normalize,
            x_range=x_range,
        )
        if equation:
            lo, hi = x_range if x_range else (0.0, 1.0)
            q = query_from_equation(equation, lo, hi, n=resample_n)
        elif pattern:
            q = query_from_upload(Path(pattern).read_bytes(),
                                  filename=Path(pattern).name)
        else:
            q = query_from_series(series_id, collection)
        result = rank(q, collection.series, spec, top_k)
        written = render_query_report(result, q, collection, out_dir)
    except CurveQueryError as exc:
        _fail(exc)
    for path in written:
        click.echo(str(path))
    for entry in result.diagnostics.skipped:
        click.echo(f"skipped {entry['seriesId']}: {entry['reason']}", err=True)


def entrypoint():
    main(auto_envvar_prefix="CURVEQUERY")


if __name__ == "__main__":
    entrypoint()
