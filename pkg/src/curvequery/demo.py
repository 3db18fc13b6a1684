"""Synthetic corpora for demos and end-to-end exercises.

Both builders return CSV bytes so callers go through the normal loading
path. Shapes are controlled by the seed; the same seed always yields the
same bytes.
"""

from __future__ import annotations

import csv
import io

import numpy as np


def _emit(header, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue().encode("utf-8")


def planted_peak_corpus(seed: int = 7, n_background: int = 19, n_points: int = 60) -> bytes:
    """A light-curve style table with exactly one peak-then-decay series.

    Columns: object (group), time (x), brightness (y), flux and star
    (per-object scalars useful for filtering). The planted series is
    named "sn-peak"; backgrounds are gently rising or falling lines with
    noise, named "bg-00" onward.
    """
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 10.0, n_points)
    rows = []

    peak = np.exp(-((t - 3.0) ** 2) / 1.2) * 4.0 + np.exp(-t / 8.0)
    peak += rng.normal(0.0, 0.02, n_points)
    for x, y in zip(t, peak):
        rows.append(["sn-peak", f"{x:.6f}", f"{y:.6f}", "25.0", "1"])

    for i in range(n_background):
        slope = rng.uniform(0.2, 0.8) * (1 if i % 2 == 0 else -1)
        base = rng.uniform(0.0, 2.0)
        ys = base + slope * t + rng.normal(0.0, 0.05, n_points)
        flux = f"{rng.uniform(1.0, 30.0):.3f}"
        star = "1" if i % 3 == 0 else "0"
        for x, y in zip(t, ys):
            rows.append([f"bg-{i:02d}", f"{x:.6f}", f"{y:.6f}", flux, star])
    return _emit(["object", "time", "brightness", "flux", "star"], rows)


def three_family_corpus(seed: int = 7, per_family: int = 8, n_points: int = 40) -> bytes:
    """Series from three shape families: rising, falling, and a transient
    spike. Ids are prefixed by family ("rise-", "fall-", "spike-") so a
    caller can check cluster assignments against ground truth.
    """
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.0, n_points)
    rows = []

    def add(sid, ys):
        for x, y in zip(t, ys):
            rows.append([sid, f"{x:.6f}", f"{y:.6f}"])

    for i in range(per_family):
        gain = rng.uniform(0.8, 1.4)
        add(f"rise-{i:02d}", gain * t + rng.normal(0.0, 0.03, n_points))
    for i in range(per_family):
        gain = rng.uniform(0.8, 1.4)
        add(f"fall-{i:02d}", gain * (1.0 - t) + rng.normal(0.0, 0.03, n_points))
    for i in range(per_family):
        width = rng.uniform(0.01, 0.02)
        add(
            f"spike-{i:02d}",
            np.exp(-((t - 0.5) ** 2) / width) + rng.normal(0.0, 0.03, n_points),
        )
    return _emit(["series", "t", "value"], rows)


def demo_events() -> list:
    """A plausible analysis session: browse, search top-down, lean on
    recommendations, refine context, with one fresh start in the middle."""
    return [
        "dataSelection",
        "displayControl",
        "sketch",
        "smoothing",
        "sketch",
        "rangeSelection",
        "filter",
        "recommendations",
        "dragAndDrop",
        "filter",
        "dynamicClass",
        "breakMarker",
        "dataSelection",
        "equation",
        "rangeInvariance",
        "recommendations",
        "dragAndDrop",
        "dataSelection",
        "filter",
        "sketch",
    ]
