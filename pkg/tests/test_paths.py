import math

import numpy as np
import pytest

from qhkit.domains import ArcPolyline, HalfSpace, SlitDisk, sample_interior, segments_cross
from qhkit.errors import InvalidInputError, NotConnectedError
from qhkit.paths import (
    build_path_graph,
    load_path_graph,
    qh_shortest_arc,
    save_path_graph,
    shorten_arc,
)
from qhkit.qh_metric import (
    growth_lower_bound,
    halfspace_qh_distance,
    qh_polyline_length,
)


class TestBuildPathGraph:
    def test_halfspace_unit_window(self):
        hs = HalfSpace(axis=1, offset=0.0, window=([0.0, 0.0], [1.0, 1.0]))
        g = build_path_graph(hs, 0.1)
        assert g.n_nodes >= 100
        # connectivity: a search from node 0 reaches every node
        from qhkit._grid import dijkstra

        dist, _ = dijkstra(g.indptr, g.nbr, g.wts, 0)
        assert np.all(np.isfinite(dist))

    def test_deterministic(self, unit_ball):
        g1 = build_path_graph(unit_ball, 0.2, seed=9)
        g2 = build_path_graph(unit_ball, 0.2, seed=9)
        assert np.array_equal(g1.nodes, g2.nodes)
        assert np.array_equal(g1.nbr, g2.nbr)
        assert np.array_equal(g1.wts, g2.wts)

    def test_no_edge_crosses_slit(self, slit_disk):
        g = build_path_graph(slit_disk, 0.08)
        for i, j, _ in g.edge_list():
            assert not segments_cross(
                g.nodes[i][None, :], g.nodes[j][None, :],
                slit_disk.slit[0], slit_disk.slit[1],
            )[0]

    def test_resolution_guard(self, unit_ball):
        with pytest.raises(InvalidInputError):
            build_path_graph(unit_ball, unit_ball.delta_floor)

    def test_weights_positive_symmetric(self, halfspace_graph):
        g = halfspace_graph
        assert (g.wts > 0).all()
        lookup = {}
        for u in range(g.n_nodes):
            for e in range(g.indptr[u], g.indptr[u + 1]):
                lookup[(u, int(g.nbr[e]))] = g.wts[e]
        for (u, v), w in lookup.items():
            assert lookup[(v, u)] == w


class TestQhShortestArc:
    def test_halfspace_vertical_pair(self, halfspace, halfspace_graph):
        res = qh_shortest_arc(halfspace, halfspace_graph, [0.0, 1.0], [0.0, math.e])
        assert res.lower == pytest.approx(1.0, abs=1e-12)
        assert 1.0 <= res.upper <= 1.02
        assert res.epsilon_hat <= 0.02

    def test_identical_endpoints(self, halfspace, halfspace_graph):
        res = qh_shortest_arc(halfspace, halfspace_graph, [0.3, 1.0], [0.3, 1.0])
        assert res.upper == res.lower == 0.0
        assert res.arc.n == 1

    def test_ball_radial_pair(self, unit_ball, ball_graph):
        res = qh_shortest_arc(unit_ball, ball_graph, [0.0, 0.0], [0.5, 0.0])
        log2 = math.log(2.0)
        assert res.lower == pytest.approx(log2, abs=1e-12)
        assert log2 - 1e-9 <= res.upper <= 1.02 * log2
        assert res.epsilon_hat <= 0.02 * log2

    def test_oracle_crosscheck_horizontal(self, halfspace, halfspace_graph):
        k = halfspace_qh_distance([0.0, 1.0], [3.0, 1.0])
        # split across the window: use points within it
        res = qh_shortest_arc(halfspace, halfspace_graph, [-1.5, 1.0], [1.5, 1.0])
        k = halfspace_qh_distance([-1.5, 1.0], [1.5, 1.0])
        assert k <= res.upper <= 1.02 * k

    def test_lower_dominates_growth_bound(self, halfspace, halfspace_graph):
        x, y = np.array([0.4, 0.3]), np.array([-0.8, 1.1])
        res = qh_shortest_arc(halfspace, halfspace_graph, x, y)
        dmin = min(halfspace.boundary_distance(x), halfspace.boundary_distance(y))
        assert res.lower >= growth_lower_bound(np.linalg.norm(x - y), dmin) - 1e-12

    def test_endpoints_preserved_exactly(self, halfspace, halfspace_graph):
        x, y = np.array([0.123, 0.77]), np.array([-1.01, 1.33])
        res = qh_shortest_arc(halfspace, halfspace_graph, x, y)
        assert np.array_equal(res.arc.vertices[0], x)
        assert np.array_equal(res.arc.vertices[-1], y)
        assert res.snap_distance <= halfspace_graph.resolution * 1.01

    def test_disconnected_raises(self):
        # two components: disk pair separated by the full slit through it
        slit = SlitDisk([0.0, 0.0], 1.0, ([-1.0, 0.0], [1.0, 0.0]))
        g = build_path_graph(slit, 0.1)
        with pytest.raises(NotConnectedError):
            qh_shortest_arc(slit, g, [0.0, 0.5], [0.0, -0.5])


class TestShortenArc:
    def test_geodesic_unchanged(self, halfspace):
        arc = ArcPolyline(
            np.stack([np.zeros(17), np.exp(np.linspace(0, 1, 17))], axis=1)
        )
        before = qh_polyline_length(halfspace, arc, tol=1e-8).value
        after_arc = shorten_arc(halfspace, arc, 50)
        after = qh_polyline_length(halfspace, after_arc, tol=1e-8).value
        assert after <= before + 1e-9
        assert after == pytest.approx(before, rel=1e-3)

    def test_detour_strictly_shorter(self, halfspace):
        arc = ArcPolyline([[0.0, 1.0], [0.5, 2.0], [1.0, 1.0]])
        before = qh_polyline_length(halfspace, arc, tol=1e-8).value
        after_arc = shorten_arc(halfspace, arc, 50)
        after = qh_polyline_length(halfspace, after_arc, tol=1e-8).value
        assert after < before

    def test_zero_iterations_identity(self, halfspace):
        arc = ArcPolyline([[0.0, 1.0], [0.5, 2.0], [1.0, 1.0]])
        out = shorten_arc(halfspace, arc, 0)
        assert np.array_equal(out.vertices, arc.vertices)

    def test_never_longer(self, halfspace, rng):
        pts = sample_interior(halfspace, 12, seed=23, floor=0.2)
        arc = ArcPolyline(pts[:4])
        before = qh_polyline_length(halfspace, arc, tol=1e-7).value
        after = qh_polyline_length(
            halfspace, shorten_arc(halfspace, arc, 30), tol=1e-7
        ).value
        assert after <= before + 1e-7 * before


def test_lemma_a_bracket_on_short_results(halfspace, halfspace_graph):
    """Close pairs: 0.5 r < k-upper and k-lower < 3 r, r = |x-y| / delta(x)."""
    pts = sample_interior(halfspace, 20, seed=31, floor=0.15)
    rng = np.random.default_rng(77)
    checked = 0
    for x in pts[:10]:
        dx = halfspace.boundary_distance(x)
        u = rng.normal(size=2)
        u /= np.linalg.norm(u)
        y = x + (dx / 3.5) * u
        if halfspace.boundary_distance(y) < halfspace.delta_floor:
            continue
        res = qh_shortest_arc(halfspace, halfspace_graph, x, y)
        r = np.linalg.norm(x - y) / dx
        assert res.upper * 1.05 > 0.5 * r
        assert res.lower < 3.0 * r * 1.05
        checked += 1
    assert checked >= 5


def test_subarc_shortness(halfspace, halfspace_graph):
    """Subarcs of an epsilon-short arc are epsilon-short (half-space oracle)."""
    res = qh_shortest_arc(halfspace, halfspace_graph, [-1.0, 0.4], [1.0, 0.6])
    arc = res.arc
    eps = res.epsilon_hat
    idx = np.linspace(0, arc.n - 1, 6).astype(int)
    for a, b in zip(idx[:-1], idx[1:]):
        if b <= a:
            continue
        sub = arc.subarc(int(a), int(b))
        qh = qh_polyline_length(halfspace, sub, tol=1e-8)
        k = halfspace_qh_distance(sub.vertices[0], sub.vertices[-1])
        eps_sub = qh.value + qh.est_error - k
        assert eps_sub <= eps + 1e-6


def test_refinement_monotonicity(halfspace):
    """Halving the resolution never worsens the upper bound beyond tolerance."""
    coarse = build_path_graph(halfspace, 0.1)
    fine = build_path_graph(halfspace, 0.05)
    for x, y in [((-1.0, 0.5), (1.0, 0.8)), ((0.0, 0.2), (0.4, 1.7))]:
        up_c = qh_shortest_arc(halfspace, coarse, x, y).upper
        up_f = qh_shortest_arc(halfspace, fine, x, y).upper
        assert up_f <= up_c + 1e-3 * up_c + 1e-9


def test_graph_cache_round_trip(tmp_path, unit_ball):
    g = build_path_graph(unit_ball, 0.2)
    path = tmp_path / "ball.graph.json"
    save_path_graph(g, path)
    g2 = load_path_graph(path, unit_ball)
    assert np.array_equal(g.nodes, g2.nodes)
    assert np.array_equal(g.wts, g2.wts)
    assert g2.resolution == g.resolution
    res1 = qh_shortest_arc(unit_ball, g, [0.0, 0.0], [0.5, 0.0])
    res2 = qh_shortest_arc(unit_ball, g2, [0.0, 0.0], [0.5, 0.0])
    assert res1.upper == res2.upper


def test_graph_cache_domain_mismatch(tmp_path, unit_ball, punctured_ball):
    g = build_path_graph(unit_ball, 0.2)
    path = tmp_path / "ball.graph.json"
    save_path_graph(g, path)
    with pytest.raises(InvalidInputError):
        load_path_graph(path, punctured_ball)
