import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhkit.conditions import (
    cigar_constant,
    cone_constant,
    mu1_bound,
    mu3_constant,
    solidity_estimate,
    uniform_k_bound,
    uniformity_estimate,
)
from qhkit.domains import ArcPolyline, sample_interior
from qhkit.errors import InvalidInputError, UndefinedRatioError
from qhkit.qh_metric import (
    halfspace_geodesic_points,
    halfspace_k_eval,
    halfspace_qh_distance,
    qh_polyline_length,
)


class TestConeConstant:
    # the estimator is a lower estimate of the sup over >= 128 grid points,
    # so exact peaks can be missed by up to half a grid spacing (~1/254)

    def test_ball_chord(self, unit_ball):
        arc = ArcPolyline([[-0.5, 0.0], [0.5, 0.0]])
        # ratio (0.5 - |s|) / (1 - |s|) is maximized at the center
        got = cone_constant(unit_ball, arc)
        assert 0.5 - 5e-3 <= got <= 0.5 + 1e-12

    def test_single_point(self, unit_ball):
        assert cone_constant(unit_ball, ArcPolyline([[0.1, 0.1]])) == 0.0

    def test_halfspace_horizontal(self, halfspace):
        arc = ArcPolyline([[0.0, 1.0], [1.0, 1.0]])
        got = cone_constant(halfspace, arc)
        assert 0.5 - 5e-3 <= got <= 0.5 + 1e-12

    def test_diameter_mode_below_length_mode(self, halfspace):
        arc = ArcPolyline([[0.0, 1.0], [0.5, 1.4], [1.0, 1.0], [1.5, 1.5]])
        c_len = cone_constant(halfspace, arc, mode="length")
        c_diam = cone_constant(halfspace, arc, mode="diameter")
        assert c_diam <= c_len + 1e-12

    def test_max_delta_split(self, halfspace):
        arc = ArcPolyline([[0.0, 0.5], [0.5, 1.5], [1.0, 0.6]])
        v = cone_constant(halfspace, arc, mode="diameter", split="max_delta")
        assert v >= 0.0 and math.isfinite(v)

    def test_bad_mode(self, halfspace):
        with pytest.raises(InvalidInputError):
            cone_constant(halfspace, ArcPolyline([[0, 1], [1, 1]]), mode="area")


class TestCigarConstant:
    def test_straight_segment(self):
        assert cigar_constant(ArcPolyline([[0, 0], [1, 0]])) == pytest.approx(1.0)

    def test_right_angle(self):
        arc = ArcPolyline([[0, 0], [1, 0], [1, 1]])
        assert cigar_constant(arc) == pytest.approx(math.sqrt(2.0))
        assert cigar_constant(arc, mode="diameter") == pytest.approx(1.0)

    def test_coincident_endpoints(self):
        with pytest.raises(UndefinedRatioError):
            cigar_constant(ArcPolyline([[0, 0], [1, 0], [0, 0]]))

    @given(
        st.lists(
            st.tuples(st.floats(-2, 2), st.floats(0.1, 2)), min_size=2, max_size=6
        )
    )
    @settings(max_examples=60, deadline=None)
    def test_length_mode_dominates_diameter_mode(self, pts):
        arr = np.array(pts)
        if np.linalg.norm(arr[0] - arr[-1]) < 1e-9:
            return
        arc = ArcPolyline(arr)
        assert cigar_constant(arc) >= cigar_constant(arc, mode="diameter") - 1e-12


class TestFormulas:
    def test_mu1_substitution(self):
        assert mu1_bound(1, 1, 0, 3, 1) == pytest.approx(6 * (math.e**2 - 1))

    def test_mu1_zero(self):
        assert mu1_bound(1, 1, 0, 3, 0) == 0.0

    def test_mu1_coarse_branch(self):
        assert mu1_bound(1, 2, 1, 1, 0) == pytest.approx(2 * (math.e - 1))

    def test_uniform_k_bound_values(self):
        assert uniform_k_bound(1, 0, 1) == 0.0
        assert uniform_k_bound(1, 1, 1) == pytest.approx(4 * math.log(2))
        assert uniform_k_bound(2, 3, 1) == pytest.approx(16 * math.log(4))

    def test_mu3_desk_value(self):
        assert mu3_constant(1, 1, 1, 0, 1) == pytest.approx(6552.75)

    def test_mu3_degenerate(self):
        assert mu3_constant(1, 1, 1, 0, 0) == pytest.approx(0.75)

    def test_mu3_large_against_mpmath(self):
        import mpmath

        got = mu3_constant(1, 2, 1, 1, 1)
        with mpmath.workdps(60):
            expo = 1 + 4 * 4 * 1 * mpmath.log(5)
            want = mpmath.mpf(3) / 4 * (1 + 2 * 7 * (mpmath.e**expo - 1))
            assert abs(got - float(want)) <= 1e-9 * float(want)

    def test_mu3_overflow_signals_inf(self):
        assert mu3_constant(1, 10, 50, 500, 1e6) == math.inf

    def test_mu1_below_mu3(self):
        # the proof uses mu1 < mu3 for matching parameters
        for nu, h in ((1.0, 0.0), (2.0, 1.0), (5.0, 2.0)):
            assert 6 * math.expm1(2 * nu) < mu3_constant(1, 1, nu, h, 1.0)


class TestSolidity:
    def test_vertical_geodesic_tight(self, halfspace):
        arc = ArcPolyline(
            np.stack([np.zeros(33), np.exp(np.linspace(0, 2, 33))], axis=1)
        )
        k_eval = halfspace_k_eval(halfspace)
        for h in (0.0, 0.5, 1.5):
            est = solidity_estimate(halfspace, arc, h, k_eval, m=32)
            assert est.nu_hat <= 1.0 + 1e-3

    def test_short_arc_empty_family(self, halfspace):
        arc = ArcPolyline([[0.0, 1.0], [0.0, 1.1]])  # total qh length ~ 0.095
        k_eval = halfspace_k_eval(halfspace)
        est = solidity_estimate(halfspace, arc, 2.0, k_eval)
        assert est.nu_hat == 0.0

    def test_epsilon_short_arc(self, halfspace):
        pts = halfspace_geodesic_points([-1.0, 0.3], [1.0, 0.5], m=96)
        arc = ArcPolyline(pts)
        k = halfspace_qh_distance([-1.0, 0.3], [1.0, 0.5])
        qh = qh_polyline_length(halfspace, arc, tol=1e-8)
        assert qh.value - k <= 0.02 * k
        k_eval = halfspace_k_eval(halfspace)
        for h in (0.0, 1.0):
            est = solidity_estimate(halfspace, arc, h, k_eval, m=48)
            assert est.nu_hat <= 1.03
            assert est.pairs_checked > 0


class TestUniformityEstimate:
    def test_ball_range_and_stability(self, unit_ball):
        pts = sample_interior(unit_ball, 60, seed=101, floor=0.05)
        pairs = [(pts[2 * i], pts[2 * i + 1]) for i in range(30)]
        coarse = uniformity_estimate(unit_ball, pairs, 0.08, seed=0)
        fine = uniformity_estimate(unit_ball, pairs, 0.04, seed=0)
        assert 1.0 <= coarse.value <= 3.0
        assert 1.0 <= fine.value <= 3.0
        drift = abs(fine.value - coarse.value) / coarse.value
        assert drift <= 0.15
        assert coarse.sidedness == "lower_estimate_of_sup"

    def test_monotone_under_inclusion(self, unit_ball):
        pts = sample_interior(unit_ball, 40, seed=55, floor=0.05)
        pairs = [(pts[2 * i], pts[2 * i + 1]) for i in range(20)]
        small = uniformity_estimate(unit_ball, pairs[:8], 0.08, seed=0)
        large = uniformity_estimate(unit_ball, pairs, 0.08, seed=0)
        assert large.value >= small.value - 1e-12

    def test_slit_pairs_divergence(self, slit_disk):
        values = []
        for t in (0.05, 0.02, 0.01):
            est = uniformity_estimate(
                slit_disk, [([0.5, t], [0.5, -t])], 0.05, seed=0
            )
            values.append(est.value)
        assert values[0] >= 9.0
        assert values[1] >= 22.5
        assert values[2] >= 45.0

    def test_identical_pair_skipped(self, unit_ball):
        est = uniformity_estimate(
            unit_ball, [([0.1, 0.1], [0.1, 0.1])], 0.2, seed=0
        )
        assert est.skipped == 1
        assert est.samples == 0
