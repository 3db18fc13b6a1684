"""File-producing reports: delimited data plus a rendered figure.

Each report writes its machine-readable outputs and a PNG side by side
in the requested directory and returns the list of paths written.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analytics import STATES, MarkovSummary, to_dot
from .dataset import Collection, export_results
from .engine import PatternQuery, RankResult


def _write(path: Path, data) -> Path:
    if isinstance(data, bytes):
        path.write_bytes(data)
    else:
        path.write_text(data, encoding="utf-8")
    return path


def render_markov_report(summary: MarkovSummary, out_dir, basename: str = "markov") -> list:
    """Write <basename>.json / .csv / .dot / .png for one event stream."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    paths.append(_write(out / f"{basename}.json", json.dumps(summary.as_dict(), indent=2) + "\n"))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["from", "to", "count", "probability"])
    for i, a in enumerate(STATES):
        for j, b in enumerate(STATES):
            w.writerow([a, b, int(summary.counts[i][j]), repr(float(summary.probabilities[i][j]))])
    paths.append(_write(out / f"{basename}.csv", buf.getvalue()))

    paths.append(_write(out / f"{basename}.dot", to_dot(summary)))

    fig, (ax_mat, ax_bar) = plt.subplots(1, 2, figsize=(9, 4))
    probs = np.asarray(summary.probabilities, dtype=float)
    im = ax_mat.imshow(probs, cmap="Blues", vmin=0.0, vmax=1.0)
    ax_mat.set_xticks(range(3), STATES, rotation=20)
    ax_mat.set_yticks(range(3), STATES)
    ax_mat.set_xlabel("to")
    ax_mat.set_ylabel("from")
    ax_mat.set_title("transition probability")
    for i in range(3):
        for j in range(3):
            ax_mat.text(j, i, f"{probs[i, j]:.2f}", ha="center", va="center",
                        color="white" if probs[i, j] > 0.5 else "black")
    fig.colorbar(im, ax=ax_mat, fraction=0.046)
    ax_bar.bar(STATES, [summary.centrality[s] for s in STATES], color="#4878d0")
    ax_bar.set_ylim(0.0, 1.0)
    ax_bar.set_title("centrality")
    ax_bar.tick_params(axis="x", rotation=20)
    fig.tight_layout()
    png = out / f"{basename}.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    paths.append(png)
    return paths


def render_recommend_report(rec, collection: Collection, out_dir, basename: str = "recommendations") -> list:
    """Write <basename>.csv and a figure of representatives and outliers."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [_write(out / f"{basename}.csv", export_results(rec, collection))]

    fig, (ax_rep, ax_out) = plt.subplots(1, 2, figsize=(10, 4))
    for i, rep in enumerate(rec.representatives):
        grid = np.linspace(0.0, 1.0, len(rep.centroid))
        ax_rep.plot(grid, rep.centroid, linewidth=2,
                    label=f"{len(rep.member_ids)} series (near {rep.nearest_member_id})")
    ax_rep.set_title("representative shapes")
    ax_rep.set_xlabel("normalized x")
    ax_rep.legend(fontsize=8)
    for o in rec.outliers:
        s = collection.get(o.series_id)
        ax_out.plot(
            s.xs, s.ys, linewidth=1,
            label=f"{o.series_id} ({o.distance_to_centroid:.2f})",
        )
    ax_out.set_title("outliers")
    if rec.outliers:
        ax_out.legend(fontsize=8)
    fig.tight_layout()
    png = out / f"{basename}.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    paths.append(png)
    return paths


def render_query_report(
    result: RankResult,
    query: PatternQuery,
    collection: Collection,
    out_dir,
    basename: str = "matches",
    plot_top: int = 5,
) -> list:
    """Write <basename>.csv and a figure of the query beside its matches."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [_write(out / f"{basename}.csv", export_results(result.matches))]

    fig, (ax_q, ax_m) = plt.subplots(1, 2, figsize=(10, 4))
    qx = [p[0] for p in query.points]
    qy = [p[1] for p in query.points]
    ax_q.plot(qx, qy, color="black", linewidth=2)
    ax_q.set_title(f"query ({query.source})")
    for m in result.matches[:plot_top]:
        s = collection.get(m.series_id)
        ax_m.plot(s.xs, s.ys, linewidth=1,
                  label=f"#{m.rank} {m.series_id} ({m.distance:.3f})")
    ax_m.set_title("top matches")
    if result.matches:
        ax_m.legend(fontsize=8)
    fig.tight_layout()
    png = out / f"{basename}.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    paths.append(png)
    return paths
