"""Convex minimization, level-set solves, and LP helper tests."""

import numpy as np
import pytest

from farpoint import (Ball, FrameworkConfig, InstanceError,
                      PiecewiseMaxFunction, Polytope, QuadraticPiece,
                      build_h_from_balls, grid_min, lp_feasible_strict,
                      lp_max, minimize_unconstrained, minimize_with_level,
                      polytope_empty, single_quadratic)

CFG = FrameworkConfig()


def quad(center):
    return single_quadratic(np.asarray(center, dtype=float))


class TestMinimizeUnconstrained:
    def test_pure_quadratic(self):
        rep = minimize_unconstrained(quad([0.7, -0.3]), CFG)
        assert rep.converged
        np.testing.assert_allclose(rep.minimizer, [0.7, -0.3], atol=1e-6)
        assert rep.value == pytest.approx(0.0, abs=1e-10)

    def test_affine_vee(self):
        pm = PiecewiseMaxFunction((
            QuadraticPiece(0.0, np.array([1.0]), -1.0),
            QuadraticPiece(0.0, np.array([-1.0]), -1.0)))
        rep = minimize_unconstrained(pm, CFG)
        assert rep.value == pytest.approx(-1.0, abs=1e-7)
        np.testing.assert_allclose(rep.minimizer, [0.0], atol=1e-6)

    def test_matches_grid_search(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            pieces = tuple(
                QuadraticPiece(1.0, rng.uniform(-2, 2, 2),
                               rng.uniform(-1, 1))
                for _ in range(3))
            pm = PiecewiseMaxFunction(pieces)
            rep = minimize_unconstrained(pm, CFG)
            ref, _ = grid_min(pm, ([-3, -3], [3, 3]), 0.01)
            assert rep.value <= ref + 1e-4
            assert rep.value >= ref - 0.01

    def test_bounds_bracket_value(self):
        h = build_h_from_balls([Ball(np.zeros(2), 1.0),
                                Ball(np.array([1.5, 0.0]), 1.0)])
        rep = minimize_unconstrained(h, CFG)
        assert rep.lower_bound <= rep.value + 1e-12
        assert rep.value <= rep.upper_bound + 1e-12
        assert rep.converged
        assert rep.value - rep.lower_bound <= 1e-6 * (1 + abs(rep.value))

    def test_non_singleton_flag_on_flat_minimum(self):
        # h for one unit ball has a strict minimum at the center, while f-h
        # for identical center is constant; use the constant piece directly.
        pm = PiecewiseMaxFunction((QuadraticPiece(0.0, np.zeros(2), -1.0),))
        rep = minimize_unconstrained(pm, CFG, probe=True)
        assert rep.non_singleton
        assert len(rep.minimizers) >= 2


class TestMinimizeWithLevel:
    def test_linear_over_disk(self):
        objective = PiecewiseMaxFunction((
            QuadraticPiece(0.0, np.array([-1.0, 0.0]), 0.0),))
        constraint = build_h_from_balls([Ball(np.zeros(2), 1.0)])
        rep = minimize_with_level(objective, constraint, 0.0, CFG)
        assert rep.value == pytest.approx(-1.0, abs=1e-6)
        np.testing.assert_allclose(rep.minimizer, [1.0, 0.0], atol=1e-4)
        assert rep.active_constraint

    def test_inactive_level_matches_unconstrained(self):
        pm = quad([0.2, 0.2])
        constraint = build_h_from_balls([Ball(np.zeros(2), 10.0)])
        rep = minimize_with_level(pm, constraint, 0.0, CFG)
        free = minimize_unconstrained(pm, CFG)
        assert rep.value == pytest.approx(free.value, abs=1e-7)
        assert not rep.active_constraint

    def test_infeasible_level_rejected(self):
        constraint = build_h_from_balls([Ball(np.zeros(2), 1.0)])
        with pytest.raises(InstanceError):
            minimize_with_level(quad([0, 0]), constraint, -2.0, CFG)


class TestLpMax:
    def box(self):
        A = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        b = np.array([-1.0, 0.0, -1.0, 0.0])
        return Polytope(A, b)

    def test_box_corner(self):
        res = lp_max(np.array([1.0, 1.0]), self.box())
        assert res.status == "optimal"
        assert res.optimal_value == pytest.approx(2.0, abs=1e-9)
        np.testing.assert_allclose(res.argmax, [1.0, 1.0], atol=1e-9)

    def test_simplex_face(self):
        A = np.array([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]])
        b = np.array([0.0, 0.0, -1.0])
        res = lp_max(np.array([2.0, 1.0]), Polytope(A, b))
        assert res.optimal_value == pytest.approx(2.0, abs=1e-9)
        np.testing.assert_allclose(res.argmax, [1.0, 0.0], atol=1e-9)

    def test_infeasible_status(self):
        A = np.array([[1.0], [-1.0]])
        b = np.array([1.0, 1.0])  # x <= -1 and x >= 1
        res = lp_max(np.array([1.0]), Polytope(A, b))
        assert res.status == "infeasible"

    def test_unbounded_status(self):
        A = np.array([[-1.0, 0.0]])
        b = np.array([0.0])  # x1 >= 0 only
        res = lp_max(np.array([1.0, 0.0]), Polytope(A, b))
        assert res.status == "unbounded"

    def test_dimension_mismatch(self):
        with pytest.raises(InstanceError):
            lp_max(np.array([1.0, 0.0, 0.0]), self.box())


class TestLpFeasibleStrict:
    def test_opposing_rows_infeasible(self):
        ok, _ = lp_feasible_strict(np.array([[1.0], [-1.0]]))
        assert not ok

    def test_single_row_feasible_with_point(self):
        ok, x = lp_feasible_strict(np.array([[-1.0]]))
        assert ok
        assert x is not None and float(np.asarray(x)[0]) > 0

    def test_returned_point_is_strict(self):
        rng = np.random.default_rng(33)
        for _ in range(20):
            M = rng.normal(size=(4, 3))
            ok, x = lp_feasible_strict(M)
            if ok:
                assert np.all(M @ np.asarray(x) < 0)


class TestPolytopeEmpty:
    def test_nonempty_box(self):
        A = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        b = np.array([-1.0, 0.0, -1.0, 0.0])
        assert not polytope_empty(Polytope(A, b))

    def test_contradictory_rows(self):
        A = np.array([[1.0], [-1.0]])
        b = np.array([1.0, 1.0])
        assert polytope_empty(Polytope(A, b))

    def test_flip_point_against_sampler(self):
        # Slide a half-plane across a box; emptiness should flip where the
        # sampler stops finding feasible points, up to the membership tol.
        base_A = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        base_b = np.array([-1.0, 0.0, -1.0, 0.0])
        rng = np.random.default_rng(17)
        X = rng.uniform(-0.2, 1.2, (200_000, 2))
        for t in np.linspace(-0.5, 1.5, 21):
            P = Polytope(np.vstack([base_A, [1.0, 1.0]]),
                         np.append(base_b, -t))
            empty = polytope_empty(P)
            sampled = bool(np.any(P.contains_batch(X)))
            if abs(t) > 1e-4:
                assert empty == (not sampled) or t < 0


class TestCertificates:
    def test_lower_bound_is_certified(self):
        # The reported lower bound must undercut the true function:
        # no probe point may fall below it.
        rng = np.random.default_rng(41)
        pieces = tuple(
            QuadraticPiece(1.0, rng.uniform(-2, 2, 2), rng.uniform(-1, 1))
            for _ in range(4))
        pm = PiecewiseMaxFunction(pieces)
        rep = minimize_unconstrained(pm, CFG)
        X = rng.uniform(-4, 4, (1000, 2))
        assert np.all(pm.evaluate_batch(X) >= rep.lower_bound - 1e-9)

    def test_redundant_row_harmless(self):
        A = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0],
                      [1.0, 0.0]])
        b = np.array([-1.0, 0.0, -1.0, 0.0, -5.0])
        res = lp_max(np.array([1.0, 1.0]), Polytope(A, b))
        assert res.optimal_value == pytest.approx(2.0, abs=1e-9)

    def test_value_monotone_in_level(self):
        objective = quad([2.0, 0.0])
        constraint = build_h_from_balls([Ball(np.zeros(2), 1.0)])
        prev = None
        for level in [0.0, 0.5, 1.0, 2.0]:
            rep = minimize_with_level(objective, constraint, level, CFG)
            if prev is not None:
                assert rep.value <= prev + 1e-7
            prev = rep.value
