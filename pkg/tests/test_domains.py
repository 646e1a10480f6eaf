import json
import math

import numpy as np
import pytest

from qhkit.domains import (
    ArcPolyline,
    Ball,
    CustomDomain,
    HalfSpace,
    PuncturedBall,
    SlitDisk,
    domain_from_spec,
    euclidean_shortest_arc,
    sample_interior,
)
from qhkit.errors import InvalidInputError, SamplingExhaustedError


def test_ball_center_distance(unit_ball):
    assert unit_ball.boundary_distance([0.0, 0.0]) == 1.0


def test_punctured_ball_distance(punctured_ball):
    assert punctured_ball.boundary_distance([0.3, 0.0]) == pytest.approx(0.3)


def brute_force_slit_distance(p, n=6000):
    th = np.linspace(0, 2 * np.pi, n, endpoint=False)
    circle = np.stack([np.cos(th), np.sin(th)], axis=1)
    slit = np.stack([np.linspace(0, 1, n), np.zeros(n)], axis=1)
    cloud = np.vstack([circle, slit])
    return np.linalg.norm(cloud - np.asarray(p), axis=1).min()


def test_slit_disk_distance_against_brute_force(slit_disk):
    spacing = 2 * np.pi / 6000
    for p in ([-0.5, 0.0], [0.3, 0.2], [0.9, -0.05], [-0.1, 0.01]):
        exact = slit_disk.boundary_distance(p)
        brute = brute_force_slit_distance(p)
        assert abs(exact - brute) <= 2 * spacing
    assert slit_disk.boundary_distance([-0.5, 0.0]) == pytest.approx(0.5)


def test_contains_catalog(unit_ball, slit_disk):
    hs = HalfSpace(axis=1, offset=0.0, window=([-6.0, 0.0], [6.0, 2.0]))
    assert not unit_ball.contains([2.0, 0.0])
    assert not slit_disk.contains([0.5, 0.0])  # boundary point on the slit
    assert hs.contains([5.0, 0.1])


def test_exterior_distance_signals_nonpositive(unit_ball):
    assert unit_ball.boundary_distance([2.0, 0.0]) <= 0.0
    assert unit_ball.boundary_distance([1.0, 0.0]) == 0.0


def test_nan_coordinates_rejected(unit_ball):
    with pytest.raises(InvalidInputError):
        unit_ball.boundary_distance([np.nan, 0.0])


def test_sample_interior_empty(unit_ball):
    assert len(sample_interior(unit_ball, 0, seed=1)) == 0


def test_sample_interior_deterministic(unit_ball):
    a = sample_interior(unit_ball, 100, seed=7, floor=0.05)
    b = sample_interior(unit_ball, 100, seed=7, floor=0.05)
    assert np.array_equal(a, b)


def test_sample_interior_respects_floor(unit_ball):
    pts = sample_interior(unit_ball, 100, seed=3, floor=0.05)
    assert len(pts) == 100
    assert (unit_ball.boundary_distance_many(pts) >= 0.05).all()


def test_sample_interior_exhaustion():
    # window almost entirely outside the ball: acceptance rate ~ 0
    tiny = Ball([0.0, 0.0], 1e-3, window=([-1.0, -1.0], [1.0, 1.0]))
    with pytest.raises(SamplingExhaustedError):
        sample_interior(tiny, 10, seed=0, floor=5e-4)


def test_sample_floor_below_domain_floor_rejected(unit_ball):
    with pytest.raises(InvalidInputError):
        sample_interior(unit_ball, 1, seed=0, floor=unit_ball.delta_floor / 10)


class TestArcPolyline:
    def test_lengths_cached(self):
        arc = ArcPolyline([[0, 0], [1, 0], [1, 1]])
        assert arc.length == pytest.approx(2.0)
        assert np.allclose(arc.cum_lengths, [0, 1, 2])
        assert np.all(np.diff(arc.cum_lengths) >= 0)

    def test_diameter_at_vertices(self):
        arc = ArcPolyline([[0, 0], [1, 0], [1, 1]])
        assert arc.diameter() == pytest.approx(math.sqrt(2))

    def test_resample_preserves_endpoints(self):
        arc = ArcPolyline([[0, 0], [1, 0], [1, 1]]).resample(33)
        assert arc.n == 33
        assert np.allclose(arc.vertices[0], [0, 0])
        assert np.allclose(arc.vertices[-1], [1, 1])
        assert arc.length == pytest.approx(2.0, rel=1e-9)

    def test_single_vertex(self):
        arc = ArcPolyline([[0.5, 0.5]])
        assert arc.length == 0.0
        assert arc.diameter() == 0.0

    def test_json_round_trip(self):
        arc = ArcPolyline([[0, 0], [0.25, 1.5]])
        again = ArcPolyline.from_json(arc.to_json())
        assert np.array_equal(arc.vertices, again.vertices)

    def test_vertices_immutable(self):
        arc = ArcPolyline([[0, 0], [1, 0]])
        with pytest.raises(ValueError):
            arc.vertices[0, 0] = 5.0


def test_domain_spec_round_trip(unit_ball, slit_disk, punctured_ball):
    for dom in (unit_ball, slit_disk, punctured_ball):
        spec = dom.spec_dict()
        again = domain_from_spec(json.loads(json.dumps(spec)))
        assert again.kind == dom.kind
        pts = sample_interior(dom, 25, seed=5)
        assert np.allclose(
            again.boundary_distance_many(pts), dom.boundary_distance_many(pts)
        )


def test_domain_spec_rejects_unknown_kind():
    with pytest.raises(InvalidInputError):
        domain_from_spec({"kind": "torus", "params": {}})


def test_custom_domain_matches_disk():
    th = np.linspace(0, 2 * np.pi, 600, endpoint=False)
    loop = 0.4 * np.stack([np.cos(th), np.sin(th)], axis=1) + np.array([-0.4, 0.0])
    custom = CustomDomain(loop)
    pts = np.array([[-0.4, 0.0], [-0.7, 0.0], [-0.4, 0.3], [0.3, 0.0], [-0.9, 0.0]])
    exact = 0.4 - np.linalg.norm(pts - np.array([-0.4, 0.0]), axis=1)
    got = custom.boundary_distance_many(pts)
    assert np.abs(got - exact).max() < 2 * custom.cloud_spacing


class TestEuclideanShortestArc:
    def test_convex_chord(self, unit_ball):
        arc, length = euclidean_shortest_arc(unit_ball, [-0.5, 0.0], [0.5, 0.0], 0.05)
        assert length >= 1.0 - 1e-12
        assert length <= 1.01  # within 1% at resolution <= |x-y| / 20
        assert (unit_ball.boundary_distance_many(arc.vertices) > 0).all()

    def test_identical_endpoints(self, unit_ball):
        arc, length = euclidean_shortest_arc(unit_ball, [0.2, 0.2], [0.2, 0.2], 0.1)
        assert arc.n == 1
        assert length == 0.0

    def test_slit_detour(self, slit_disk):
        arc, length = euclidean_shortest_arc(
            slit_disk, [0.5, 0.01], [0.5, -0.01], 0.05
        )
        assert length >= 1.0  # must round the slit tip at the origin
        assert (slit_disk.boundary_distance_many(arc.vertices) > 0).all()

    def test_length_upper_bounds_distance(self, unit_ball, rng):
        pts = sample_interior(unit_ball, 8, seed=11, floor=0.1)
        for i in range(4):
            x, y = pts[2 * i], pts[2 * i + 1]
            _, length = euclidean_shortest_arc(unit_ball, x, y, 0.1)
            assert length >= np.linalg.norm(x - y) - 1e-12

    def test_quasiconvexity_growth_on_slit(self, slit_disk):
        hats = []
        for t in (0.05, 0.02, 0.01):
            _, length = euclidean_shortest_arc(
                slit_disk, [0.5, t], [0.5, -t], 0.05
            )
            hats.append(length / (2 * t))
        assert hats[0] >= 0.9 / (2 * 0.05)
        assert hats[1] >= 0.9 / (2 * 0.02)
        assert hats[2] >= 0.9 / (2 * 0.01)
        assert hats[0] < hats[1] < hats[2]
