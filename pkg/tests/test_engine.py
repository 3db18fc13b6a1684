"""Pattern matching pipeline: resampling, smoothing, distances, ranking."""

import math
import random

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from curvequery import (
    Collection,
    DegenerateSketchError,
    DomainError,
    MatchSpec,
    NotFoundError,
    ParseError,
    Series,
    ValidationError,
    distance,
    normalize,
    query_from_equation,
    query_from_series,
    query_from_sketch,
    query_from_upload,
    rank,
    resample,
    smooth,
)
from curvequery.dataset import CollectionDiagnostics
from curvequery.engine import PatternQuery

from oracles import (
    oracle_distance,
    oracle_normalize,
    oracle_rank,
    oracle_resample,
    oracle_smooth,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
vectors = st.lists(finite, min_size=2, max_size=40)


def _collection(series_list):
    return Collection(
        series=[Series(sid, pts) for sid, pts in series_list],
        diagnostics=CollectionDiagnostics(0, 0, 0, []),
    )


def _query(points):
    return PatternQuery(source="test", points=tuple(points))


def _random_points(rng, n, x0=0.0, x1=10.0):
    xs = sorted(rng.uniform(x0, x1) for _ in range(n))
    while len(set(xs)) < n:
        xs = sorted(rng.uniform(x0, x1) for _ in range(n))
    return [(x, rng.uniform(-5.0, 5.0)) for x in xs]


class TestResample:
    def test_two_point_line(self):
        out = resample([(0.0, 0.0), (1.0, 1.0)], 3)
        assert out.tolist() == [0.0, 0.5, 1.0]

    def test_constant_segment(self):
        out = resample([(0.0, 5.0), (2.0, 5.0)], 4)
        assert out.tolist() == [5.0, 5.0, 5.0, 5.0]

    def test_tent(self):
        out = resample([(0.0, 0.0), (1.0, 2.0), (2.0, 0.0)], 5)
        assert out.tolist() == [0.0, 1.0, 2.0, 1.0, 0.0]

    def test_endpoints_exact(self):
        pts = [(0.3, 1.7), (1.1, -4.0), (9.0, 2.5)]
        out = resample(pts, 7)
        assert out[0] == 1.7 and out[-1] == 2.5

    def test_matches_reference(self):
        rng = random.Random(31)
        for _ in range(50):
            pts = _random_points(rng, rng.randrange(2, 15))
            n = rng.randrange(2, 30)
            assert resample(pts, n).tolist() == pytest.approx(
                oracle_resample(pts, n), abs=1e-12
            )

    def test_too_few_grid_points(self):
        with pytest.raises(ValidationError):
            resample([(0.0, 0.0), (1.0, 1.0)], 1)


class TestSmoothing:
    def test_window_one_is_identity(self):
        v = [3.0, 1.0, 4.0, 1.0, 5.0]
        assert smooth(v, "movingAverage", 1).tolist() == v

    def test_window_three_shrinks_at_edges(self):
        assert smooth([0.0, 3.0, 0.0], "movingAverage", 3).tolist() == [1.5, 1.0, 1.5]

    def test_alpha_one_is_identity(self):
        v = [3.0, 1.0, 4.0]
        assert smooth(v, "exponential", 1.0).tolist() == v

    def test_exponential_recurrence(self):
        out = smooth([0.0, 1.0, 1.0], "exponential", 0.5)
        assert out.tolist() == [0.0, 0.5, 0.75]

    def test_none_is_identity(self):
        v = [9.0, -2.0]
        assert smooth(v, "none").tolist() == v

    def test_even_window_rejected(self):
        with pytest.raises(ValidationError):
            smooth([1.0, 2.0, 3.0], "movingAverage", 4)

    def test_window_longer_than_vector_rejected(self):
        with pytest.raises(ValidationError):
            smooth([1.0, 2.0, 3.0], "movingAverage", 5)

    def test_alpha_out_of_range_rejected(self):
        for alpha in (0.0, -0.5, 1.5):
            with pytest.raises(ValidationError):
                smooth([1.0, 2.0], "exponential", alpha)

    def test_unknown_method_rejected(self):
        with pytest.raises(ValidationError):
            smooth([1.0, 2.0], "median")

    def test_matches_reference(self):
        rng = random.Random(47)
        for _ in range(60):
            n = rng.randrange(2, 25)
            v = [rng.uniform(-5, 5) for _ in range(n)]
            w = rng.choice([w for w in range(1, n + 1, 2)])
            assert smooth(v, "movingAverage", w).tolist() == pytest.approx(
                oracle_smooth(v, "movingAverage", w), abs=1e-12
            )
            a = rng.uniform(0.05, 1.0)
            assert smooth(v, "exponential", a).tolist() == pytest.approx(
                oracle_smooth(v, "exponential", a), abs=1e-12
            )

    @given(vectors, st.integers(min_value=0, max_value=10))
    @settings(max_examples=60, deadline=None)
    def test_moving_average_reduces_total_variation(self, v, half):
        window = min(2 * half + 1, len(v) - (1 - len(v) % 2))
        out = smooth(v, "movingAverage", max(window, 1))
        tv_in = float(np.abs(np.diff(v)).sum())
        tv_out = float(np.abs(np.diff(out)).sum())
        assert tv_out <= tv_in + 1e-9 * max(1.0, tv_in)

    @given(vectors, st.floats(min_value=0.01, max_value=1.0))
    @settings(max_examples=60, deadline=None)
    def test_exponential_stays_in_range(self, v, alpha):
        out = smooth(v, "exponential", alpha)
        assert out.min() >= min(v) - 1e-9
        assert out.max() <= max(v) + 1e-9


class TestNormalize:
    def test_zscore_standardizes(self):
        out = normalize([1.0, 2.0, 3.0], "zscore")
        assert float(out.mean()) == pytest.approx(0.0, abs=1e-12)
        assert float(out.std()) == pytest.approx(1.0, abs=1e-12)

    def test_zscore_uses_population_std(self):
        out = normalize([0.0, 2.0], "zscore")
        assert out.tolist() == [-1.0, 1.0]

    def test_minmax_unit_interval(self):
        out = normalize([2.0, 4.0, 6.0], "minmax")
        assert out.tolist() == [0.0, 0.5, 1.0]

    def test_constant_vector_becomes_zeros(self):
        assert normalize([4.0, 4.0, 4.0], "zscore").tolist() == [0.0, 0.0, 0.0]
        assert normalize([4.0, 4.0, 4.0], "minmax").tolist() == [0.0, 0.0, 0.0]

    def test_none_is_identity(self):
        v = [5.0, -1.0]
        assert normalize(v, "none").tolist() == v

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValidationError):
            normalize([1.0, 2.0], "robust")

    def test_matches_reference(self):
        rng = random.Random(58)
        for _ in range(60):
            v = [rng.uniform(-5, 5) for _ in range(rng.randrange(2, 20))]
            for mode in ("zscore", "minmax", "none"):
                assert normalize(v, mode).tolist() == pytest.approx(
                    oracle_normalize(v, mode), abs=1e-12
                )

    @given(
        st.lists(st.floats(min_value=-1e3, max_value=1e3), min_size=2, max_size=40),
        st.floats(min_value=-1e3, max_value=1e3),
        st.floats(min_value=0.1, max_value=100.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_zscore_affine_invariant(self, v, shift, scale):
        assume(max(v) - min(v) > 1e-3)  # keep the transform well conditioned
        base = normalize(v, "zscore")
        moved = normalize([scale * y + shift for y in v], "zscore")
        assert float(np.abs(base - moved).max()) == pytest.approx(0.0, abs=1e-6)


class TestDistance:
    def test_identical_vectors(self):
        assert distance([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0

    def test_euclidean_example(self):
        assert distance([0.0, 1.0], [1.0, 0.0]) == pytest.approx(math.sqrt(2.0))

    def test_slope_ignores_vertical_offset(self):
        assert distance([0.0, 1.0, 2.0], [5.0, 6.0, 7.0], "slope") == 0.0

    def test_slope_example(self):
        # diffs (1,1) vs (-1,-1)
        assert distance([0.0, 1.0, 2.0], [0.0, -1.0, -2.0], "slope") == pytest.approx(
            math.sqrt(8.0)
        )

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            distance([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_slope_needs_three_points(self):
        with pytest.raises(ValidationError):
            distance([1.0, 2.0], [1.0, 2.0], "slope")

    def test_unknown_metric_rejected(self):
        with pytest.raises(ValidationError):
            distance([1.0, 2.0], [1.0, 2.0], "cosine")

    def test_matches_reference(self):
        rng = random.Random(64)
        for _ in range(60):
            n = rng.randrange(3, 20)
            a = [rng.uniform(-5, 5) for _ in range(n)]
            b = [rng.uniform(-5, 5) for _ in range(n)]
            for metric in ("euclidean", "slope"):
                assert distance(a, b, metric) == pytest.approx(
                    oracle_distance(a, b, metric), abs=1e-12
                )

    @given(st.integers(3, 20), st.data())
    @settings(max_examples=60, deadline=None)
    def test_metric_axioms(self, n, data):
        a = data.draw(st.lists(finite, min_size=n, max_size=n))
        b = data.draw(st.lists(finite, min_size=n, max_size=n))
        c = data.draw(st.lists(finite, min_size=n, max_size=n))
        for metric in ("euclidean", "slope"):
            dab = distance(a, b, metric)
            assert dab >= 0.0
            assert dab == pytest.approx(distance(b, a, metric), rel=1e-9, abs=1e-9)
            assert distance(a, c, metric) <= dab + distance(b, c, metric) + 1e-6


class TestMatchSpec:
    def test_defaults(self):
        spec = MatchSpec()
        assert (spec.metric, spec.normalize, spec.smooth_method) == (
            "euclidean", "zscore", "none",
        )
        assert spec.resample_n == 50 and spec.x_normalize is True

    def test_enum_validation(self):
        with pytest.raises(ValidationError):
            MatchSpec(metric="dtw").validate()
        with pytest.raises(ValidationError):
            MatchSpec(normalize="sigmoid").validate()
        with pytest.raises(ValidationError):
            MatchSpec(smooth_method="loess").validate()

    def test_resample_floor(self):
        with pytest.raises(ValidationError):
            MatchSpec(resample_n=1).validate()
        with pytest.raises(ValidationError):
            MatchSpec(metric="slope", resample_n=2).validate()
        MatchSpec(metric="slope", resample_n=3).validate()

    def test_window_must_fit_grid(self):
        with pytest.raises(ValidationError):
            MatchSpec(smooth_method="movingAverage", smooth_param=9, resample_n=7).validate()

    def test_x_range_ordering(self):
        with pytest.raises(ValidationError):
            MatchSpec(x_range=(0.8, 0.2)).validate()
        with pytest.raises(ValidationError):
            MatchSpec(x_range=(0.2, 0.2)).validate()
        MatchSpec(x_range=(0.2, 0.8)).validate()

    def test_x_range_must_be_finite(self):
        with pytest.raises(ValidationError):
            MatchSpec(x_range=(0.0, math.inf)).validate()


class TestRank:
    def _corpus(self, rng, count=12, length=8):
        return _collection(
            [(f"s{idx:02d}", _random_points(rng, length)) for idx in range(count)]
        )

    def test_self_match_is_rank_one(self):
        rng = random.Random(70)
        col = self._corpus(rng)
        query = query_from_series("s03", col)
        result = rank(query, col)
        assert result.matches[0].series_id == "s03"
        assert result.matches[0].distance <= 1e-9
        assert result.matches[0].rank == 1

    def test_ranks_are_contiguous_and_sorted(self):
        rng = random.Random(71)
        col = self._corpus(rng)
        result = rank(_query(_random_points(rng, 6)), col)
        assert [m.rank for m in result.matches] == list(range(1, 13))
        dists = [m.distance for m in result.matches]
        assert dists == sorted(dists)

    def test_top_k_truncates(self):
        rng = random.Random(72)
        col = self._corpus(rng)
        result = rank(_query(_random_points(rng, 6)), col, top_k=3)
        assert len(result.matches) == 3

    def test_top_k_below_one_rejected(self):
        rng = random.Random(73)
        col = self._corpus(rng)
        with pytest.raises(ValidationError):
            rank(_query(_random_points(rng, 6)), col, top_k=0)

    def test_empty_collection_rejected(self):
        with pytest.raises(ValidationError):
            rank(_query([(0.0, 0.0), (1.0, 1.0)]), _collection([]))

    def test_full_range_is_identity_under_x_normalize(self):
        rng = random.Random(74)
        col = self._corpus(rng)
        q = _query(_random_points(rng, 6))
        plain = rank(q, col)
        ranged = rank(q, col, MatchSpec(x_range=(0.0, 1.0)))
        assert [m.series_id for m in plain.matches] == [m.series_id for m in ranged.matches]
        for a, b in zip(plain.matches, ranged.matches):
            assert a.distance == pytest.approx(b.distance, abs=1e-9)

    def test_x_range_must_overlap_query(self):
        q = _query([(0.0, 0.0), (1.0, 1.0)])
        col = _collection([("a", [(0.0, 0.0), (1.0, 1.0)])])
        with pytest.raises(ValidationError):
            rank(q, col, MatchSpec(x_range=(2.0, 3.0), x_normalize=False))

    def test_series_outside_range_skipped_with_reason(self):
        q = _query([(0.0, 0.0), (10.0, 1.0)])
        col = _collection(
            [
                ("inside", [(1.0, 0.0), (2.0, 1.0), (3.0, 0.5)]),
                ("outside", [(20.0, 0.0), (30.0, 1.0)]),
            ]
        )
        result = rank(q, col, MatchSpec(x_range=(0.0, 10.0), x_normalize=False))
        assert [m.series_id for m in result.matches] == ["inside"]
        skipped = {d["seriesId"]: d["reason"] for d in result.diagnostics.skipped}
        assert "outside" in skipped
        assert skipped["outside"]

    def test_all_skipped_is_an_error(self):
        q = _query([(0.0, 0.0), (10.0, 1.0)])
        col = _collection([("outside", [(20.0, 0.0), (30.0, 1.0)])])
        with pytest.raises(ValidationError):
            rank(q, col, MatchSpec(x_range=(0.0, 10.0), x_normalize=False))

    def test_constant_series_flagged(self):
        q = _query([(0.0, 0.0), (1.0, 1.0)])
        col = _collection(
            [("flat", [(0.0, 3.0), (1.0, 3.0)]), ("rise", [(0.0, 0.0), (1.0, 1.0)])]
        )
        result = rank(q, col)
        assert "flat" in result.diagnostics.constant_ids
        assert result.diagnostics.query_constant is False

    def test_constant_query_flagged(self):
        q = _query([(0.0, 2.0), (1.0, 2.0)])
        col = _collection([("rise", [(0.0, 0.0), (1.0, 1.0)])])
        assert rank(q, col).diagnostics.query_constant is True

    def test_tie_breaks_by_series_id(self):
        pts = [(0.0, 0.0), (1.0, 1.0)]
        col = _collection([("b", pts), ("a", pts)])
        result = rank(_query(pts), col)
        assert [m.series_id for m in result.matches] == ["a", "b"]

    def test_deterministic(self):
        rng = random.Random(75)
        col = self._corpus(rng)
        q = _query(_random_points(rng, 6))
        first = rank(q, col)
        second = rank(q, col)
        assert [(m.series_id, m.distance) for m in first.matches] == [
            (m.series_id, m.distance) for m in second.matches
        ]

    def test_matches_reference_ranker(self):
        rng = random.Random(76)
        for _ in range(25):
            n_series = rng.randrange(3, 20)
            series = [
                (f"s{idx:02d}", _random_points(rng, rng.randrange(2, 12)))
                for idx in range(n_series)
            ]
            spec_kwargs = {
                "metric": rng.choice(("euclidean", "slope")),
                "normalize": rng.choice(("zscore", "minmax", "none")),
                "smooth_method": rng.choice(("none", "movingAverage", "exponential")),
                "resample_n": rng.randrange(3, 20),
                "x_normalize": True,
            }
            if spec_kwargs["smooth_method"] == "movingAverage":
                spec_kwargs["smooth_param"] = rng.choice(
                    [w for w in range(1, spec_kwargs["resample_n"] + 1, 2)]
                )
            elif spec_kwargs["smooth_method"] == "exponential":
                spec_kwargs["smooth_param"] = rng.uniform(0.1, 1.0)
            spec = MatchSpec(**spec_kwargs)
            q_points = _random_points(rng, rng.randrange(2, 12))
            got = rank(_query(q_points), _collection(series), spec)
            want, _ = oracle_rank(
                q_points,
                series,
                {
                    "metric": spec.metric,
                    "normalize": spec.normalize,
                    "smooth_method": spec.smooth_method,
                    "smooth_param": spec.smooth_param,
                    "resample_n": spec.resample_n,
                    "x_range": spec.x_range,
                    "x_normalize": spec.x_normalize,
                },
            )
            assert [m.series_id for m in got.matches] == [sid for sid, _ in want]
            for m, (_, ref_dist) in zip(got.matches, want):
                assert m.distance == pytest.approx(ref_dist, rel=1e-9, abs=1e-9)


class TestSketchQueries:
    def test_corner_mapping(self):
        # canvas y grows downward; data y grows upward
        q = query_from_sketch([(0.0, 200.0), (100.0, 0.0)], 100.0, 200.0)
        assert q.points == ((0.0, 0.0), (1.0, 1.0))
        assert q.source == "sketch"

    def test_midpoint_scaling(self):
        q = query_from_sketch([(0.0, 100.0), (50.0, 50.0), (100.0, 0.0)], 100.0, 100.0)
        assert q.points == ((0.0, 0.0), (0.5, 0.5), (1.0, 1.0))

    def test_backtracking_keeps_last_sample(self):
        strokes = [(0.0, 100.0), (50.0, 80.0), (50.0, 20.0), (100.0, 0.0)]
        q = query_from_sketch(strokes, 100.0, 100.0)
        assert q.points == ((0.0, 0.0), (0.5, 0.8), (1.0, 1.0))

    def test_unordered_strokes_are_sorted(self):
        q = query_from_sketch([(100.0, 0.0), (0.0, 100.0)], 100.0, 100.0)
        assert q.points[0][0] == 0.0

    def test_degenerate_sketch_rejected(self):
        with pytest.raises(DegenerateSketchError):
            query_from_sketch([(50.0, 10.0), (50.0, 90.0)], 100.0, 100.0)
        with pytest.raises(DegenerateSketchError):
            query_from_sketch([(50.0, 10.0)], 100.0, 100.0)

    def test_bad_canvas_rejected(self):
        with pytest.raises(ValidationError):
            query_from_sketch([(0.0, 0.0), (1.0, 1.0)], 0.0, 100.0)


class TestEquationQueries:
    def test_parabola_samples(self):
        q = query_from_equation("y=x^2", 0.0, 1.0, 3)
        assert q.points == ((0.0, 0.0), (0.5, 0.25), (1.0, 1.0))
        assert q.source == "equation"

    def test_accepts_parsed_tree(self):
        from curvequery import parse_equation

        ast = parse_equation("x+1")
        q = query_from_equation(ast, 0.0, 1.0, 2)
        assert q.points == ((0.0, 1.0), (1.0, 2.0))
        assert q.origin_text

    def test_domain_error_names_the_offending_x(self):
        with pytest.raises(DomainError) as err:
            query_from_equation("1/x", -1.0, 1.0, 3)
        assert "x=0" in str(err.value)

    def test_non_finite_sample_rejected(self):
        with pytest.raises(DomainError):
            query_from_equation("x*1e308 + x*1e308", 0.0, 1.0, 3)

    def test_invalid_window(self):
        with pytest.raises(ValidationError):
            query_from_equation("x", 1.0, 0.0, 5)
        with pytest.raises(ValidationError):
            query_from_equation("x", 0.0, 1.0, 1)


class TestUploadQueries:
    def test_with_header(self):
        q = query_from_upload(b"x,y\n0,1\n1,2\n", "trend.csv")
        assert q.points == ((0.0, 1.0), (1.0, 2.0))
        assert q.source == "upload"
        assert q.origin_text == "trend.csv"

    def test_without_header(self):
        q = query_from_upload(b"0,1\n1,2\n")
        assert q.points == ((0.0, 1.0), (1.0, 2.0))

    def test_rows_sorted_by_x(self):
        q = query_from_upload(b"2,0\n0,1\n1,5\n")
        assert q.points == ((0.0, 1.0), (1.0, 5.0), (2.0, 0.0))

    def test_duplicate_x_rejected(self):
        with pytest.raises(ParseError):
            query_from_upload(b"0,1\n0,2\n1,3\n")

    def test_wrong_field_count_reports_line(self):
        with pytest.raises(ParseError) as err:
            query_from_upload(b"0,1\n1,2,3\n")
        assert "2" in str(err.value)

    def test_non_numeric_cell_rejected(self):
        with pytest.raises(ParseError):
            query_from_upload(b"x,y\n0,1\none,2\n")

    def test_single_row_rejected(self):
        with pytest.raises(ValidationError):
            query_from_upload(b"x,y\n0,1\n")


class TestSeriesQueries:
    def test_origin_recorded(self):
        col = _collection([("sf", [(0.0, 1.0), (1.0, 2.0)])])
        q = query_from_series("sf", col)
        assert q.source == "series"
        assert q.origin_id == "sf"
        assert q.points == ((0.0, 1.0), (1.0, 2.0))

    def test_unknown_series(self):
        with pytest.raises(NotFoundError):
            query_from_series("nope", _collection([("sf", [(0.0, 1.0), (1.0, 2.0)])]))
