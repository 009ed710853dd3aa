import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from treefield import (
    DimensionError,
    DistanceMatrix,
    LinearFamily,
    MedianError,
    MetricKind,
    PowerFamily,
    Tolerance,
    distance,
    distance_matrix,
    distance_rows,
    gromov_median,
    radial_distance,
    river_distance,
    segment_contains,
)
from treefield.metrics import _verify_median

from conftest import structured_radial_points, structured_river_points

coord = st.floats(min_value=-20.0, max_value=20.0, allow_nan=False).map(lambda v: round(v, 3))
point2 = st.tuples(coord, coord).map(np.array)


def gromov_targets(kind, a, b, c):
    dab = distance(kind, a, b)
    dac = distance(kind, a, c)
    dbc = distance(kind, b, c)
    return {
        "a": 0.5 * (dab + dac - dbc),
        "b": 0.5 * (dab + dbc - dac),
        "c": 0.5 * (dac + dbc - dab),
    }


def brute_force_median(kind, a, b, c, extent=6.0, step=0.25):
    """Independent oracle: grid-search the point minimizing the worst
    half-perimeter identity residual."""
    targets = gromov_targets(kind, a, b, c)
    axis = np.arange(-extent, extent + step / 2, step)
    candidates = [np.array([x, y]) for x in axis for y in axis]
    candidates += [np.asarray(p, float) for p in (a, b, c, [0.0, 0.0])]

    def residual(o):
        return max(
            abs(distance(kind, o, a) - targets["a"]),
            abs(distance(kind, o, b) - targets["b"]),
            abs(distance(kind, o, c) - targets["c"]),
        )

    return min(candidates, key=residual)


class TestRadialDistance:
    def test_same_ray(self):
        assert radial_distance([1.0, 0.0], [3.0, 0.0]) == 2.0

    def test_cross_ray(self):
        assert radial_distance([1.0, 0.0], [0.0, 1.0]) == 2.0

    def test_opposite_ray_branches_agree(self):
        # Collinear with a negative factor: the straight-line value equals
        # |a| + |b|, so both branch choices give 3.
        a, b = np.array([1.0, 0.0]), np.array([-2.0, 0.0])
        assert radial_distance(a, b) == 3.0
        assert radial_distance(a, b) == np.linalg.norm(a) + np.linalg.norm(b)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            radial_distance([1.0, 0.0], [1.0, 0.0, 0.0])


class TestRiverDistance:
    def test_same_vertical(self):
        assert river_distance([1.0, 2.0], [1.0, 5.0]) == 3.0

    def test_cross_vertical(self):
        assert river_distance([1.0, 2.0], [3.0, -1.0]) == 5.0

    def test_from_origin(self):
        assert river_distance([0.0, 0.0], [4.0, -2.5]) == 6.5

    def test_requires_planar_points(self):
        with pytest.raises(DimensionError):
            river_distance([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])


class TestParametricFamilies:
    def test_power_cross_ray(self):
        kind = MetricKind.parametric_radial(PowerFamily(1.5))
        assert distance(kind, [1.0, 0.0], [0.0, 1.0]) == 2.0

    def test_power_from_origin(self):
        kind = MetricKind.parametric_radial(PowerFamily(1.5))
        assert distance(kind, [4.0, 0.0], [0.0, 0.0]) == 8.0

    def test_linear_scales(self):
        kind = MetricKind.parametric_radial(LinearFamily(2.0))
        assert distance(kind, [1.0, 0.0], [3.0, 0.0]) == 4.0

    @given(a=point2, b=point2)
    def test_power_one_is_radial_exactly(self, a, b):
        kind = MetricKind.parametric_radial(PowerFamily(1.0))
        assert distance(kind, a, b) == radial_distance(a, b)

    def test_power_one_is_river_exactly(self):
        rng = np.random.default_rng(7)
        pts = structured_river_points(rng, 40)
        kind = MetricKind.parametric_river(PowerFamily(1.0))
        got = distance_rows(kind, pts[:-1], pts[1:])
        want = distance_rows(MetricKind.river(), pts[:-1], pts[1:])
        assert np.array_equal(got, want)

    def test_invalid_profiles(self):
        with pytest.raises(ValueError):
            PowerFamily(0.0)
        with pytest.raises(ValueError):
            LinearFamily(-1.0)
        with pytest.raises(ValueError):
            MetricKind.parametric_radial(None)


class TestMetricAxioms:
    @pytest.mark.parametrize("metric", ["radial", "river"])
    def test_axioms_on_structured_triples(self, metric):
        rng = np.random.default_rng(11)
        kind = MetricKind.radial() if metric == "radial" else MetricKind.river()
        sampler = structured_radial_points if metric == "radial" else structured_river_points
        pts = sampler(rng, 3000)
        a, b, c = pts[:1000], pts[1000:2000], pts[2000:]
        dab = distance_rows(kind, a, b)
        dba = distance_rows(kind, b, a)
        dac = distance_rows(kind, a, c)
        dcb = distance_rows(kind, c, b)
        assert np.array_equal(dab, dba)
        assert np.all(dab >= 0.0)
        # Triangle inequality through c, vectorized over the triples.
        assert np.all(dab <= dac + dcb + 1e-9)
        assert np.all(distance_rows(kind, a, a) == 0.0)

    def test_zero_iff_equal_within_tolerance(self):
        assert radial_distance([1.0, 1.0], [1.0, 1.0]) == 0.0
        assert radial_distance([1.0, 1.0], [1.0, 1.0 + 1e-6]) > 0.0

    def test_radial_bounded_by_norm_sum(self):
        rng = np.random.default_rng(3)
        pts = structured_radial_points(rng, 400)
        a, b = pts[:200], pts[200:]
        d = distance_rows(MetricKind.radial(), a, b)
        sums = np.linalg.norm(a, axis=1) + np.linalg.norm(b, axis=1)
        assert np.all(d <= sums + 1e-12)


class TestSegments:
    def test_origin_between_rays(self):
        kind = MetricKind.radial()
        assert segment_contains(kind, [0.0, 5.0], [5.0, 0.0], [0.0, 0.0])

    def test_collinear_betweenness(self):
        kind = MetricKind.radial()
        assert segment_contains(kind, [1.0, 0.0], [3.0, 0.0], [2.0, 0.0])
        assert not segment_contains(kind, [1.0, 0.0], [3.0, 0.0], [4.0, 0.0])

    def test_river_projection_on_segment(self):
        kind = MetricKind.river()
        assert segment_contains(kind, [1.0, 2.0], [3.0, 1.0], [2.0, 0.0])


class TestGromovMedian:
    def test_radial_pair_on_ray(self):
        o = gromov_median(MetricKind.radial(), [1.0, 0.0], [2.0, 0.0], [0.0, 1.0])
        np.testing.assert_allclose(o, [1.0, 0.0])

    def test_radial_vertical_pair(self):
        o = gromov_median(MetricKind.radial(), [0.0, 1.0], [0.0, 3.0], [1.0, 0.0])
        np.testing.assert_allclose(o, [0.0, 1.0])

    def test_radial_three_rays_meet_at_origin(self):
        o = gromov_median(MetricKind.radial(), [1.0, 0.0], [0.0, 1.0], [-1.0, -1.0])
        np.testing.assert_allclose(o, [0.0, 0.0])

    def test_river_shared_vertical(self):
        kind = MetricKind.river()
        a, b, c = np.array([1.0, 2.0]), np.array([1.0, 5.0]), np.array([4.0, 1.0])
        o = gromov_median(kind, a, b, c)
        np.testing.assert_allclose(o, [1.0, 2.0])
        oracle = brute_force_median(kind, a, b, c)
        np.testing.assert_allclose(oracle, o)

    def test_river_three_verticals(self):
        kind = MetricKind.river()
        o = gromov_median(kind, [-2.0, 1.0], [1.0, 3.0], [4.0, -2.0])
        np.testing.assert_allclose(o, [1.0, 0.0])

    def test_brute_force_agreement_radial(self):
        kind = MetricKind.radial()
        a, b, c = np.array([1.0, 0.0]), np.array([2.0, 0.0]), np.array([0.0, 1.0])
        oracle = brute_force_median(kind, a, b, c)
        np.testing.assert_allclose(oracle, gromov_median(kind, a, b, c))

    @pytest.mark.parametrize("metric", ["radial", "river"])
    def test_median_identities_on_random_triples(self, metric):
        rng = np.random.default_rng(23)
        kind = MetricKind.radial() if metric == "radial" else MetricKind.river()
        sampler = structured_radial_points if metric == "radial" else structured_river_points
        pts = sampler(rng, 600)
        for start in range(0, 600, 3):
            a, b, c = pts[start], pts[start + 1], pts[start + 2]
            o = gromov_median(kind, a, b, c)
            targets = gromov_targets(kind, a, b, c)
            assert abs(distance(kind, a, o) - targets["a"]) <= 1e-9
            assert abs(distance(kind, b, o) - targets["b"]) <= 1e-9
            assert abs(distance(kind, c, o) - targets["c"]) <= 1e-9
            for x, y in ((a, b), (a, c), (b, c)):
                assert segment_contains(kind, x, y, o)

    def test_wrong_candidate_raises(self):
        kind = MetricKind.radial()
        a, b, c = np.array([1.0, 0.0]), np.array([2.0, 0.0]), np.array([0.0, 1.0])
        dists = (distance(kind, a, b), distance(kind, a, c), distance(kind, b, c))
        with pytest.raises(MedianError):
            _verify_median(kind, a, b, c, np.array([5.0, 5.0]), Tolerance(), dists)

    def test_unsupported_kind_rejected(self):
        with pytest.raises(ValueError):
            gromov_median(MetricKind.euclidean(), [0.0, 0.0], [1.0, 0.0], [0.0, 1.0])


class TestDistanceMatrix:
    def test_small_matrices(self):
        kind = MetricKind.radial()
        dm = distance_matrix(kind, [[1.0, 0.0], [2.0, 0.0]])
        np.testing.assert_array_equal(dm.entries, [[0.0, 1.0], [1.0, 0.0]])
        dm = distance_matrix(kind, [[1.0, 0.0], [0.0, 1.0]])
        np.testing.assert_array_equal(dm.entries, [[0.0, 2.0], [2.0, 0.0]])
        dm = distance_matrix(MetricKind.river(), [[0.0, 0.0], [1.0, 1.0]])
        np.testing.assert_array_equal(dm.entries, [[0.0, 2.0], [2.0, 0.0]])

    def test_symmetry_exact_on_random_input(self):
        rng = np.random.default_rng(5)
        pts = structured_radial_points(rng, 40)
        dm = distance_matrix(MetricKind.radial(), pts)
        assert np.array_equal(dm.entries, dm.entries.T)
        assert np.all(np.diagonal(dm.entries) == 0.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            DistanceMatrix(np.array([[0.0, 1.0], [2.0, 0.0]]))
        with pytest.raises(ValueError):
            DistanceMatrix(np.array([[1.0]]))
        with pytest.raises(ValueError):
            DistanceMatrix(np.array([[0.0, -1.0], [-1.0, 0.0]]))


@given(a=point2, b=point2)
def test_scalar_matches_rowwise(a, b):
    kind = MetricKind.river()
    assert distance(kind, a, b) == distance_rows(kind, a[None, :], b[None, :])[0]
