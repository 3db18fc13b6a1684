"""Interaction analytics: Markov summaries of how a session was used.

Logged feature events are grouped into three processes (top-down pattern
search, bottom-up inquiry, context creation). Consecutive events induce
transitions between processes; a break marker ends the current segment
so no transition spans it. The summary is the 3x3 transition count
matrix, its row-normalized probabilities, and a stationary-distribution
centrality that says where a workflow concentrates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import NoDataError, VocabularyError

STATES = ("TopDown", "BottomUp", "ContextCreation")
BREAK_MARKER = "breakMarker"

FEATURE_PROCESS = {
    "sketch": "TopDown",
    "equation": "TopDown",
    "patternUpload": "TopDown",
    "smoothing": "TopDown",
    "rangeSelection": "TopDown",
    "rangeInvariance": "TopDown",
    "dragAndDrop": "BottomUp",
    "recommendations": "BottomUp",
    "dataSelection": "ContextCreation",
    "displayControl": "ContextCreation",
    "filter": "ContextCreation",
    "dynamicClass": "ContextCreation",
}

DAMPING = 0.99
POWER_TOL = 1e-12
POWER_MAX_ITER = 10_000

_INDEX = {s: i for i, s in enumerate(STATES)}


def classify(feature: str) -> str:
    """Map a feature event to its process, or raise on unknown features."""
    process = FEATURE_PROCESS.get(feature)
    if process is None:
        raise VocabularyError(
            f"unknown feature {feature!r}; expected one of "
            f"{sorted(FEATURE_PROCESS)} or {BREAK_MARKER!r}"
        )
    return process


def features_from_events(events: Iterable[dict]) -> list:
    """Feature names from event records, ordered by timestamp.

    The sort is stable, so records sharing a timestamp keep arrival
    order. Records without a timestamp sort as time zero.
    """
    ordered = sorted(events, key=lambda e: e.get("timestamp") or 0)
    return [e["feature"] for e in ordered]


def segment_features(features: Iterable[str]) -> list:
    """Split a feature stream on break markers; empty segments are dropped."""
    segments: list = []
    current: list = []
    for f in features:
        if f == BREAK_MARKER:
            if current:
                segments.append(current)
            current = []
        else:
            current.append(classify(f))
    if current:
        segments.append(current)
    return segments


def count_transitions(features: Iterable[str]) -> np.ndarray:
    """3x3 transition counts between consecutive events within segments."""
    counts = np.zeros((3, 3), dtype=float)
    for seg in segment_features(features):
        for a, b in zip(seg, seg[1:]):
            counts[_INDEX[a], _INDEX[b]] += 1
    return counts


def transition_probabilities(counts: np.ndarray):
    """Row-normalize counts. Zero rows stay zero and are flagged."""
    counts = np.asarray(counts, dtype=float)
    sums = counts.sum(axis=1, keepdims=True)
    zero_rows = sums[:, 0] == 0.0
    safe = np.where(sums == 0.0, 1.0, sums)
    return counts / safe, [STATES[i] for i in range(3) if zero_rows[i]]


def centrality(counts: np.ndarray) -> dict:
    """Stationary distribution of the damped transition chain.

    States that were never left get a uniform outgoing row before
    damping, which keeps the chain stochastic; damping with a uniform
    jump makes it irreducible so the distribution is unique. Computed by
    power iteration to an L1 tolerance of 1e-12.
    """
    counts = np.asarray(counts, dtype=float)
    if counts.sum() == 0.0:
        raise NoDataError("no transitions recorded; log at least two events")
    probs, zero_states = transition_probabilities(counts)
    n = len(STATES)
    for s in zero_states:
        probs[_INDEX[s]] = 1.0 / n
    m = DAMPING * probs + (1.0 - DAMPING) / n

    pi = np.full(n, 1.0 / n)
    for _ in range(POWER_MAX_ITER):
        nxt = pi @ m
        nxt /= nxt.sum()
        if np.abs(nxt - pi).sum() < POWER_TOL:
            pi = nxt
            break
        pi = nxt
    return {s: float(pi[i]) for i, s in enumerate(STATES)}


@dataclass
class MarkovSummary:
    counts: np.ndarray
    probabilities: np.ndarray
    centrality: dict
    zero_rows: list
    event_count: int
    segment_count: int

    def as_dict(self) -> dict:
        return {
            "states": list(STATES),
            "counts": [[int(v) for v in row] for row in self.counts],
            "probabilities": [[float(v) for v in row] for row in self.probabilities],
            "centrality": dict(self.centrality),
            "zeroRows": list(self.zero_rows),
            "eventCount": self.event_count,
            "segmentCount": self.segment_count,
        }


def analyze(features: Sequence[str]) -> MarkovSummary:
    """Full Markov summary of a feature event stream."""
    features = list(features)
    counts = count_transitions(features)
    probs, zero_rows = transition_probabilities(counts)
    return MarkovSummary(
        counts=counts,
        probabilities=probs,
        centrality=centrality(counts),
        zero_rows=zero_rows,
        event_count=sum(1 for f in features if f != BREAK_MARKER),
        segment_count=len(segment_features(features)),
    )


def to_dot(summary: MarkovSummary) -> str:
    """Render the summary as Graphviz dot.

    Nodes carry their centrality, edges their transition probability,
    both to two decimals; zero-probability edges are omitted.
    """
    lines = ["digraph transitions {", "  rankdir=LR;"]
    for s in STATES:
        lines.append(f'  {s} [label="{s}\\n{summary.centrality[s]:.2f}"];')
    for i, a in enumerate(STATES):
        for j, b in enumerate(STATES):
            p = summary.probabilities[i][j]
            if p > 0.0:
                lines.append(f'  {a} -> {b} [label="{p:.2f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
