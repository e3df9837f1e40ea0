"""Radius searches over the shrinking polytope family.

For affine pieces of h - f, the family P_{R^2} = {x : piece_k(x) + R^2 <= 0}
shrinks as R grows and is empty past a vanishing radius r_bar.  The largest
squared distance from C attained on the region {h <= 0} can be recovered
either directly at r_bar (when the minimizer of h - f touches the boundary)
or as the smallest R at which P_{R^2} slips inside a known container
polytope (the inclusion route used by the subset-sum reduction).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .convex_solver import lp_max, polytope_empty
from .geometry import (
    Ball,
    FrameworkConfig,
    InstanceError,
    Polytope,
    QuadraticPiece,
    h_minus_f_pieces,
    polytope_family,
)


class InclusionNeverHolds(RuntimeError):
    """P_{R^2} stayed outside the container all the way up to r_bar."""


@dataclass(frozen=True)
class RStarReport:
    r_star: float
    touching_point: Optional[np.ndarray]
    method: str  # BoundaryCase | InclusionBisection
    iterations: int


def r_bar(pieces: Sequence[QuadraticPiece], cfg: FrameworkConfig) -> float:
    """Smallest radius past which P_{R^2} is empty, by emptiness bisection.

    Equivalently r_bar^2 = -min(h - f); requires h - f bounded below
    (guaranteed when the minimizer set of h - f is strictly interior).
    """
    pieces = list(pieces)
    for p in pieces:
        if p.quad_coeff != 0.0:
            raise InstanceError("pieces must be affine (quadratic terms cancel)")
    if polytope_empty(polytope_family(pieces, 0.0), 0.0):
        return 0.0
    hi = 1.0
    for _ in range(60):
        if polytope_empty(polytope_family(pieces, hi), 0.0):
            break
        hi *= 2.0
    else:
        raise InstanceError(
            "h - f appears unbounded below (family never empties)"
        )
    lo = 0.0
    it = 0
    while hi - lo > cfg.tol_bisection and it < 200:
        it += 1
        mid = 0.5 * (lo + hi)
        if polytope_empty(polytope_family(pieces, mid), 0.0):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def polytope_inclusion(inner: Polytope, outer: Polytope, tol: float = 1e-7,
                       ) -> tuple[bool, Optional[int], Optional[np.ndarray]]:
    """Is inner a subset of outer?  Row-by-row LP maximization.

    Reports the lowest violating outer row and the inner point realizing
    the violation.  An empty inner polytope is trivially included.
    """
    if inner.dim != outer.dim:
        raise InstanceError("polytope dimension mismatch")
    for idx in range(outer.nrows):
        a = outer.A[idx]
        res = lp_max(a, inner)
        if res.status == "infeasible":
            return True, None, None
        if res.status == "unbounded":
            return False, idx, None
        if res.optimal_value > -outer.b[idx] + tol:
            return False, idx, res.argmax
    return True, None, None


def r_star_boundary_case(balls: Sequence[Ball], C,
                         cfg: FrameworkConfig) -> RStarReport:
    """R* when the minimizer of h - f sits on the boundary {h = 0}.

    There the vanishing radius itself is the answer: r_star = r_bar, and
    the boundary minimizer is the touching point.
    """
    from .maximize import CaseLabel, classify_case

    label, x1 = classify_case(balls, C, cfg)
    if label is not CaseLabel.ON_BOUNDARY:
        raise InstanceError(
            f"boundary-case search requires an OnBoundary instance, got {label.value}"
        )
    pieces = h_minus_f_pieces(balls, C)
    r = r_bar(pieces, cfg)
    return RStarReport(r_star=r, touching_point=np.asarray(x1, dtype=float),
                       method="BoundaryCase", iterations=0)


def _project_onto_level(pieces, x: np.ndarray, level: float) -> np.ndarray:
    """One Newton step of the active piece onto {max pieces = level}."""
    vals = np.array([p(x) for p in pieces])
    k = int(np.argmax(vals))
    g = pieces[k].linear
    denom = float(np.dot(g, g))
    if denom <= 1e-300:
        return x
    return x - (vals[k] - level) / denom * g


def r_star_inclusion(pieces: Sequence[QuadraticPiece], container: Polytope,
                     cfg: FrameworkConfig) -> RStarReport:
    """Smallest R with P_{R^2} inside the container, by bisection.

    Inclusion is monotone in R (the family is nested), so bisection on
    [0, r_bar] applies.  The touching point is the last violating argmax,
    projected onto the level set {h - f = -r_star^2}.
    """
    pieces = list(pieces)
    cap = r_bar(pieces, cfg)
    inc0, _, _ = polytope_inclusion(
        polytope_family(pieces, 0.0), container, cfg.tol_membership)
    if inc0:
        return RStarReport(r_star=0.0, touching_point=None,
                           method="InclusionBisection", iterations=0)
    hi = cap + 2 * cfg.tol_bisection
    inc_hi, _, _ = polytope_inclusion(
        polytope_family(pieces, hi), container, cfg.tol_membership)
    if not inc_hi:
        raise InclusionNeverHolds(
            f"P_(R^2) never entered the container up to r_bar = {cap:.6g}"
        )
    lo = 0.0
    witness = None
    it = 0
    while hi - lo > cfg.tol_bisection and it < 64:
        it += 1
        mid = 0.5 * (lo + hi)
        inc, _, point = polytope_inclusion(
            polytope_family(pieces, mid), container, cfg.tol_membership)
        if inc:
            hi = mid
        else:
            lo = mid
            if point is not None:
                witness = point
    r_star = 0.5 * (lo + hi)
    touching = None
    if witness is not None:
        touching = _project_onto_level(pieces, witness, -r_star ** 2)
    return RStarReport(r_star=float(r_star), touching_point=touching,
                       method="InclusionBisection", iterations=it)
