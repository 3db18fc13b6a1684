"""Bottom-up recommendations: representative trends and outlier series.

A collection is summarized by clustering its series after the same
resample / smooth / normalize preprocessing the matcher applies (the
x-range restriction does not apply here; recommendations always look at
whole series). Cluster centroids are the representative trends; the
series farthest from their assigned centroid are the outliers.

The clustering is written out longhand so the update rule and its
guarantees stay auditable: the within-cluster sum of squared errors is
asserted nonincreasing on every Lloyd iteration, and an emptied cluster
is re-seeded with the globally worst-fit point. The default seed is the
documented constant DEFAULT_SEED = 7; a fixed seed gives bit-identical
results across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .engine import MatchSpec, _normalize_matrix, _smooth_matrix, resample
from .errors import ValidationError

DEFAULT_SEED = 7
DEFAULT_K = 3
DEFAULT_M = 3
MAX_ITER = 100


@dataclass
class KMeansResult:
    assignments: list  # cluster index per input vector
    centroids: np.ndarray
    sse_history: list
    reseeds: int


def _plusplus_init(vectors: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Seed centers far apart: each next center is drawn with probability
    proportional to the squared distance from the centers chosen so far."""
    n = vectors.shape[0]
    centers = np.empty((k, vectors.shape[1]))
    centers[0] = vectors[int(rng.integers(n))]
    d2 = ((vectors - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))  # all points coincide with a center
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[j] = vectors[idx]
        d2 = np.minimum(d2, ((vectors - centers[j]) ** 2).sum(axis=1))
    return centers


def kmeans(
    vectors,
    k: int,
    seed: int = DEFAULT_SEED,
    max_iter: int = MAX_ITER,
) -> KMeansResult:
    """K-means over fixed-length vectors.

    k-means++ initialization drawn from the seeded generator, then Lloyd
    iterations until assignments stabilize or max_iter. Ties in
    assignment go to the lower cluster index.
    """
    vectors = np.asarray(vectors, dtype=float)
    n = vectors.shape[0]
    if not 1 <= k <= n:
        raise ValidationError(f"k must be between 1 and {n}, got {k}")
    rng = np.random.default_rng(seed)
    centers = _plusplus_init(vectors, k, rng)

    labels = np.full(n, -1)
    sse_history: list = []
    reseeds = 0
    for _ in range(max_iter):
        d2 = ((vectors[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)

        for j in range(k):
            if not (new_labels == j).any():
                worst = int(d2[np.arange(n), new_labels].argmax())
                centers[j] = vectors[worst]
                new_labels[worst] = j
                reseeds += 1

        if (new_labels == labels).all():
            break
        labels = new_labels
        for j in range(k):
            centers[j] = vectors[labels == j].mean(axis=0)
        sse = float(((vectors - centers[labels]) ** 2).sum())
        if sse_history and sse > sse_history[-1] + 1e-9:
            raise AssertionError(f"SSE increased from {sse_history[-1]} to {sse}")
        sse_history.append(sse)
    return KMeansResult(
        assignments=[int(j) for j in labels],
        centroids=centers,
        sse_history=sse_history,
        reseeds=reseeds,
    )


@dataclass
class RepresentativeTrend:
    centroid: np.ndarray  # preprocessed shape, resample_n long
    member_ids: list
    nearest_member_id: str  # a real series the UI can drag


@dataclass
class OutlierRef:
    series_id: str
    distance_to_centroid: float


@dataclass
class Recommendation:
    representatives: list
    outliers: list
    k: int
    m: int
    seed: int
    sse_history: list = field(default_factory=list)
    reseeds: int = 0

    def as_dict(self) -> dict:
        return {
            "representatives": [
                {
                    "centroid": [float(v) for v in r.centroid],
                    "memberIds": list(r.member_ids),
                    "nearestMemberId": r.nearest_member_id,
                }
                for r in self.representatives
            ],
            "outliers": [
                {"seriesId": o.series_id, "distanceToCentroid": o.distance_to_centroid}
                for o in self.outliers
            ],
            "k": self.k,
            "m": self.m,
            "seed": self.seed,
            "sseHistory": list(self.sse_history),
            "reseeds": self.reseeds,
        }


def recommend(
    collection: Sequence,
    spec: Optional[MatchSpec] = None,
    k: int = DEFAULT_K,
    m: int = DEFAULT_M,
    seed: int = DEFAULT_SEED,
) -> Recommendation:
    """Cluster a collection into k representative trends plus m outliers.

    Representatives are ordered by descending cluster size, then by
    nearest member id; outliers by descending centroid distance, then
    by id. m larger than the collection returns every series.
    """
    spec = spec or MatchSpec()
    spec.validate()
    series = list(getattr(collection, "series", collection))
    if not series:
        raise ValidationError("cannot recommend from an empty collection")
    if k > len(series):
        raise ValidationError(
            f"k={k} exceeds the collection size {len(series)}"
        )
    if k < 1 or m < 0:
        raise ValidationError("k must be >= 1 and m >= 0")

    mat = np.stack([resample(s.points, spec.resample_n) for s in series])
    mat = _smooth_matrix(mat, spec.smooth_method, spec.smooth_param)
    mat, _ = _normalize_matrix(mat, spec.normalize)
    ids = [s.id for s in series]

    result = kmeans(mat, k, seed=seed)
    labels, centers = result.assignments, result.centroids

    reps = []
    for j in range(k):
        members = [i for i in range(len(ids)) if labels[i] == j]
        dists = [float(np.linalg.norm(mat[i] - centers[j])) for i in members]
        nearest = min(zip(dists, (ids[i] for i in members)))[1]
        reps.append(
            RepresentativeTrend(
                centroid=centers[j].copy(),
                member_ids=sorted(ids[i] for i in members),
                nearest_member_id=nearest,
            )
        )
    reps.sort(key=lambda r: (-len(r.member_ids), r.nearest_member_id))

    per_point = np.linalg.norm(mat - centers[labels], axis=1)
    order = sorted(range(len(ids)), key=lambda i: (-per_point[i], ids[i]))
    outliers = [
        OutlierRef(series_id=ids[i], distance_to_centroid=float(per_point[i]))
        for i in order[:m]
    ]
    return Recommendation(
        representatives=reps,
        outliers=outliers,
        k=k,
        m=m,
        seed=seed,
        sse_history=result.sse_history,
        reseeds=result.reseeds,
    )
