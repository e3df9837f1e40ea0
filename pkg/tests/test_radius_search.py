"""Critical-radius searches: emptiness, boundary case, polytope inclusion."""

import numpy as np
import pytest

from farpoint import (Ball, FrameworkConfig, InstanceError, Polytope,
                      farthest_point, h_minus_f_pieces, polytope_family,
                      polytope_inclusion, r_bar, r_star_boundary_case,
                      r_star_inclusion)

CFG = FrameworkConfig()

TWO_BALLS = [Ball(np.zeros(2), 1.0), Ball(np.array([1.0, 0.0]), 1.0)]
MIDPOINT = np.array([0.5, 0.0])


def slab(t):
    return Polytope(np.array([[1.0, 0.0], [-1.0, 0.0]]),
                    np.array([-t, -t]))


class TestRBar:
    def test_constant_family(self):
        # single ball, query at its center: the family collapses at R = 1
        pieces = h_minus_f_pieces([Ball(np.zeros(2), 1.0)], np.zeros(2))
        assert r_bar(pieces, CFG) == pytest.approx(1.0, abs=1e-6)

    def test_symmetric_lens(self):
        pieces = h_minus_f_pieces(TWO_BALLS, MIDPOINT)
        assert r_bar(pieces, CFG) == pytest.approx(np.sqrt(0.75), abs=1e-6)

    def test_redundant_ball_ignored(self):
        enlarged = TWO_BALLS + [Ball(MIDPOINT, 10.0)]
        pieces = h_minus_f_pieces(enlarged, MIDPOINT)
        assert r_bar(pieces, CFG) == pytest.approx(np.sqrt(0.75), abs=1e-4)

    def test_unbounded_family_rejected(self):
        # query outside the centers' hull: the family never empties
        pieces = h_minus_f_pieces(TWO_BALLS, np.array([0.5, -3.0]))
        with pytest.raises(InstanceError):
            r_bar(pieces, CFG)

    def test_emptiness_flips_at_reported_radius(self):
        pieces = h_minus_f_pieces(TWO_BALLS, MIDPOINT)
        rb = r_bar(pieces, CFG)
        below = polytope_family(pieces, rb - 1e-3)
        above = polytope_family(pieces, rb + 1e-3)
        rng = np.random.default_rng(3)
        X = rng.uniform(-1, 2, (200_000, 2))
        assert np.any(below.contains_batch(X))
        assert not np.any(above.contains_batch(X))


class TestRStarBoundary:
    def test_unit_ball_centered_query(self):
        rep = r_star_boundary_case([Ball(np.zeros(2), 1.0)], np.zeros(2), CFG)
        assert rep.method == "BoundaryCase"
        assert rep.r_star == pytest.approx(1.0, abs=1e-6)
        assert float(rep.touching_point @ rep.touching_point) == \
            pytest.approx(1.0, abs=1e-6)

    def test_concentric_pair(self):
        balls = [Ball(np.zeros(2), 1.0), Ball(np.zeros(2), 2.0)]
        rep = r_star_boundary_case(balls, np.zeros(2), CFG)
        assert rep.r_star == pytest.approx(1.0, abs=1e-6)

    def test_case_mismatch_rejected(self):
        with pytest.raises(InstanceError):
            r_star_boundary_case([Ball(np.zeros(2), 1.0)],
                                 np.array([3.0, 0.0]), CFG)

    def test_matches_farthest_point(self):
        balls = [Ball(np.zeros(3), 1.7)]
        rep = r_star_boundary_case(balls, np.zeros(3), CFG)
        far = farthest_point(balls, np.zeros(3), CFG)
        assert rep.r_star**2 == pytest.approx(far.value, abs=1e-5)


class TestPolytopeInclusion:
    A = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])

    def test_nested_boxes(self):
        inner = Polytope(self.A, np.array([-1.0, 0.0, -1.0, 0.0]))
        outer = Polytope(self.A, np.array([-2.0, -1.0, -2.0, -1.0]))
        ok, row, witness = polytope_inclusion(inner, outer)
        assert ok
        assert row is None and witness is None

    def test_violation_reports_row_and_witness(self):
        inner = Polytope(self.A, np.array([-2.0, -1.0, -2.0, -1.0]))
        outer = Polytope(self.A, np.array([-1.0, 0.0, -1.0, 0.0]))
        ok, row, witness = polytope_inclusion(inner, outer)
        assert not ok
        assert inner.contains(witness, tol=1e-9)
        assert float(outer.A[row] @ witness + outer.b[row]) > 0

    def test_empty_inner_always_included(self):
        empty = Polytope(np.array([[1.0], [-1.0]]), np.array([1.0, 1.0]))
        outer = Polytope(np.array([[1.0]]), np.array([-5.0]))
        ok, _, _ = polytope_inclusion(empty, outer)
        assert ok

    def test_threshold_sweep(self):
        inner = Polytope(self.A, np.array([-1.0, 0.0, -1.0, 0.0]))
        for t in np.linspace(0.2, 2.0, 10):
            outer = Polytope(self.A, np.array([-t, 0.0, -t, 0.0]))
            ok, _, _ = polytope_inclusion(inner, outer)
            assert ok == (t >= 1.0 - 1e-9)


class TestRStarInclusion:
    def pieces(self):
        return h_minus_f_pieces(TWO_BALLS, MIDPOINT)

    def test_family_inside_its_own_base(self):
        pieces = self.pieces()
        P0 = polytope_family(pieces, 0.0)
        rep = r_star_inclusion(pieces, P0, CFG)
        assert rep.method == "InclusionBisection"
        assert rep.r_star == 0.0

    def test_slab_closed_form(self):
        # family reduces to R^2 - 0.25 <= x1 <= 1.25 - R^2, x2 free;
        # inclusion in |x1| <= t first holds at R^2 = 1.25 - t
        pieces = self.pieces()
        for t in (0.7, 0.9, 1.1):
            rep = r_star_inclusion(pieces, slab(t), CFG)
            assert rep.r_star == pytest.approx(np.sqrt(1.25 - t), abs=1e-5)

    def test_generous_container_gives_zero(self):
        rep = r_star_inclusion(self.pieces(), slab(1.3), CFG)
        assert rep.r_star == 0.0

    def test_bounded_container_flips_at_emptiness(self):
        # a box also bounds x2, which the family never restricts, so the
        # inclusion only becomes true once the family is empty
        box = Polytope(
            np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]),
            np.array([-10.0, -10.0, -10.0, -10.0]))
        rep = r_star_inclusion(self.pieces(), box, CFG)
        assert rep.r_star == pytest.approx(r_bar(self.pieces(), CFG),
                                           abs=1e-5)

    def test_monotone_in_container(self):
        pieces = self.pieces()
        values = [r_star_inclusion(pieces, slab(t), CFG).r_star
                  for t in (0.5, 0.7, 0.9, 1.1)]
        assert all(a >= b - 1e-9 for a, b in zip(values, values[1:]))

    def test_one_dimensional_scan(self):
        balls = [Ball(np.zeros(1), 1.0), Ball(np.array([1.0]), 1.0)]
        pieces = h_minus_f_pieces(balls, np.array([0.5]))
        container = Polytope(np.array([[1.0], [-1.0]]),
                             np.array([-0.4, -0.4]))
        rep = r_star_inclusion(pieces, container, CFG)
        xs = np.linspace(-2.0, 2.0, 40_001).reshape(-1, 1)
        flip = None
        for R in np.linspace(0.0, 1.0, 2001):
            P = polytope_family(pieces, float(R))
            inside = P.contains_batch(xs)
            if not np.any(inside & ~container.contains_batch(xs, tol=1e-9)):
                flip = R
                break
        assert flip is not None
        assert rep.r_star == pytest.approx(flip, abs=1e-3)
