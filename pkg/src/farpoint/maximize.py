"""Certificate-driven maximization of a convex quadratic over a ball intersection.

The chain implemented here:

* ``classify_case`` locates the minimizer set of h - f over {h <= 1} and
  reports whether it avoids the open intersection {h < 0}, sits strictly
  inside it, or touches the boundary {h = 0}.
* ``reach_certificate`` minimizes the surrogate g = max{R - k_f f, 0} + k_h h;
  when the minimizer set avoids {h < 0}, the sign pattern at argmin g decides
  whether some interior point reaches k_f f >= R.
* ``bisection_max`` turns the yes/no certificate into a maximizer of f over
  {h <= 0} by bisecting on the reach threshold R.
* ``farthest_point`` is the driver for f(x) = ||x - C||^2, routing through
  the separating-hyperplane test, the bisection, the boundary shortcut, or
  the polytope-inclusion machinery depending on the classification.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .convex_solver import (
    SolveReport,
    lp_feasible_strict,
    minimize_unconstrained,
    minimize_with_level,
)
from .geometry import (
    Ball,
    FrameworkConfig,
    InstanceError,
    PiecewiseMaxFunction,
    QuadraticPiece,
    build_g,
    build_h_from_balls,
    single_quadratic,
)


class PreconditionError(RuntimeError):
    """A driver was invoked outside the regime its certificate covers."""


class CaseLabel(enum.Enum):
    DISJOINT_FROM_INTERIOR = "DisjointFromInterior"
    STRICTLY_INTERIOR = "StrictlyInterior"
    ON_BOUNDARY = "OnBoundary"


@dataclass(frozen=True)
class CertificateResult:
    witness_exists: bool
    witness: Optional[np.ndarray]
    g_minimizer: np.ndarray
    precondition_ok: bool


def _difference(h: PiecewiseMaxFunction, f: PiecewiseMaxFunction) -> PiecewiseMaxFunction:
    """h - f as a max of pieces (f must be a single piece)."""
    if len(f.pieces) != 1:
        raise InstanceError("f must be a single piece")
    fp = f.pieces[0]
    pieces = []
    for hp in h.pieces:
        pieces.append(
            QuadraticPiece(
                hp.quad_coeff - fp.quad_coeff,
                hp.linear - fp.linear,
                hp.constant - fp.constant,
            )
        )
    return PiecewiseMaxFunction(tuple(pieces))


def _boundary_point_on_ray(h: PiecewiseMaxFunction, x0: np.ndarray,
                           direction: np.ndarray, tol: float) -> np.ndarray:
    """Point with h = 0 on the ray x0 + t * direction (h(x0) < 0)."""
    t_hi = 1.0
    for _ in range(80):
        if h(x0 + t_hi * direction) > 0:
            break
        t_hi *= 2.0
    else:
        raise InstanceError("feasible set appears unbounded along the ray")
    t_lo = 0.0
    for _ in range(100):
        mid = 0.5 * (t_lo + t_hi)
        if h(x0 + mid * direction) > 0:
            t_hi = mid
        else:
            t_lo = mid
        if t_hi - t_lo < 1e-15 * (1.0 + t_hi):
            break
    return x0 + 0.5 * (t_lo + t_hi) * direction


def _boundary_point_on_segment(h, inside: np.ndarray, outside: np.ndarray) -> np.ndarray:
    lo, hi = 0.0, 1.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if h(inside + mid * (outside - inside)) > 0:
            hi = mid
        else:
            lo = mid
    return inside + 0.5 * (lo + hi) * (outside - inside)


def _classify(h: PiecewiseMaxFunction, f: PiecewiseMaxFunction,
              cfg: FrameworkConfig) -> tuple[CaseLabel, np.ndarray]:
    """Classification core, for a general single-piece objective f."""
    tol = cfg.tol_membership
    interior = minimize_unconstrained(h, cfg)
    if interior.value >= -tol:
        raise InstanceError(
            f"the interior {{h < 0}} is empty (min h = {interior.value:.3g})"
        )

    phi = _difference(h, f)
    grad_scale = max(float(np.abs(p.linear).max(initial=0.0)) + 2 * p.quad_coeff
                     for p in phi.pieces)
    if grad_scale <= 1e-12:
        # h - f is constant: every feasible point minimizes it, including
        # boundary points, so the boundary case applies.
        direction = np.zeros(h.dim)
        direction[0] = 1.0
        x1 = _boundary_point_on_ray(h, interior.minimizer, direction, tol)
        return CaseLabel.ON_BOUNDARY, x1

    rep = minimize_with_level(phi, h, 1.0, cfg, probe=True)
    value_slack = max(cfg.tol_solver, 1e-9 * abs(rep.value))
    candidates = [np.asarray(m, dtype=float) for m in rep.minimizers]
    # The deepest interior point is a minimizer candidate too whenever its
    # value matches; checking it directly is robust when the optimal face
    # crosses the interior but the located vertices all sit on the shell.
    if phi(interior.minimizer) <= rep.value + value_slack:
        candidates.append(interior.minimizer)
    if len(candidates) > 1:
        centroid = np.mean(candidates, axis=0)
        # A mean of minimizers of a convex function is again a minimizer;
        # it sees the interior when the optimal face crosses it.
        if phi(centroid) <= rep.value + value_slack:
            candidates.append(centroid)
    hs = np.array([h(c) for c in candidates])

    if np.any(hs < -tol):
        pick = candidates[int(np.argmin(hs))]
        return CaseLabel.STRICTLY_INTERIOR, pick
    if np.any(np.abs(hs) <= tol):
        idx = int(np.argmin(np.abs(hs)))
        return CaseLabel.ON_BOUNDARY, candidates[idx]
    return CaseLabel.DISJOINT_FROM_INTERIOR, rep.minimizer


def classify_case(balls: Sequence[Ball], C, cfg: FrameworkConfig,
                  ) -> tuple[CaseLabel, np.ndarray]:
    """Locate argmin of h - f over {h <= 1} and place it w.r.t. {h < 0}.

    Returns the case label and a located minimizer x1* (a boundary one when
    the label is ON_BOUNDARY).
    """
    h = build_h_from_balls(balls)
    f = single_quadratic(C)
    return _classify(h, f, cfg)


def _certify(f: PiecewiseMaxFunction, h: PiecewiseMaxFunction, R: float,
             cfg: FrameworkConfig, cut_pool: Optional[list] = None):
    """Minimize g and test the witness conditions (no precondition check)."""
    g = build_g(f, h, R, cfg)
    rep = minimize_unconstrained(g, cfg, cut_pool=cut_pool)
    x_star = rep.minimizer
    h_val = h(x_star)
    f_val = f(x_star)
    exists = h_val < -cfg.tol_membership and cfg.k_f * f_val >= R - cfg.tol_membership
    return exists, x_star, f_val, h_val


def reach_certificate(f: PiecewiseMaxFunction, h: PiecewiseMaxFunction,
                      R: float, cfg: FrameworkConfig) -> CertificateResult:
    """Does {h < 0} contain a point with k_f f(x) >= R?

    Valid only when argmin of (k_h h - k_f f over {h <= 1}) avoids {h < 0};
    that precondition is verified here and recorded in precondition_ok.
    When it fails, no claim is made (witness_exists is not meaningful).
    """
    label, _ = _classify(h, f, cfg)
    ok = label is CaseLabel.DISJOINT_FROM_INTERIOR
    exists, x_star, _, _ = _certify(f, h, R, cfg)
    return CertificateResult(
        witness_exists=exists if ok else False,
        witness=x_star if (ok and exists) else None,
        g_minimizer=x_star,
        precondition_ok=ok,
    )


def _bisection(f: PiecewiseMaxFunction, h: PiecewiseMaxFunction,
               x1: np.ndarray, R_low: float, R_high: float,
               cfg: FrameworkConfig) -> SolveReport:
    """Bisection on the reach threshold; returns the best interior witness.

    Bracket invariant: [R_low, R_high] always contains k_f * max f, its
    width never grows, and the returned witness is feasible with
    k_f f(witness) = R_low.
    """
    best = np.asarray(x1, dtype=float)
    cut_pool: list = []
    iters = 0
    while R_high - R_low > cfg.tol_bisection and iters < 200:
        iters += 1
        R = 0.5 * (R_low + R_high)
        exists, x_star, f_val, _ = _certify(f, h, R, cfg, cut_pool=cut_pool)
        if exists:
            R_low = max(R_low, min(cfg.k_f * f_val, R_high))
            best = x_star
        else:
            # Both R and k_f f(x*) bound k_f max f from above here.  The
            # f-based refinement assumes an exact argmin, so pad it by a
            # slack covering solver error; the min with the current bracket
            # keeps the width monotone.
            refined = cfg.k_f * f_val + 10 * cfg.tol_membership
            R_high = min(R_high, R, max(refined, R_low))
        if R_low > R_high:
            R_low = R_high
    return SolveReport(
        minimizer=best,
        value=float(f(best)),
        iterations=iters,
        converged=R_high - R_low <= cfg.tol_bisection,
        lower_bound=R_low,
        upper_bound=R_high,
    )


def bisection_max(balls: Sequence[Ball], C, x1, F_bar: float,
                  cfg: FrameworkConfig) -> SolveReport:
    """Maximize ||x - C||^2 over the ball intersection by threshold bisection.

    Requires the DisjointFromInterior regime (caller-established) plus an
    interior point x1 and an upper bound F_bar on the maximum.
    """
    h = build_h_from_balls(balls)
    f = single_quadratic(C)
    x1 = np.asarray(x1, dtype=float)
    interior = minimize_unconstrained(h, cfg)
    if interior.value > cfg.tol_membership:
        raise InstanceError("ball intersection is empty")
    if abs(interior.value) <= cfg.tol_membership:
        # The intersection is numerically a single point; nothing to search.
        p = interior.minimizer
        return SolveReport(minimizer=p, value=float(f(p)), iterations=0,
                           converged=True, lower_bound=cfg.k_f * float(f(p)),
                           upper_bound=cfg.k_f * float(f(p)))
    if h(x1) >= 0:
        x1 = interior.minimizer
    if F_bar < f(x1):
        raise InstanceError(
            f"upper bound F_bar={F_bar:.6g} is below f at the interior point"
        )
    return _bisection(f, h, x1, cfg.k_f * float(f(x1)), cfg.k_f * float(F_bar), cfg)


def separating_hyperplane(C, centers) -> tuple[bool, Optional[np.ndarray], Optional[float]]:
    """Strictly separating hyperplane between C and the ball centers.

    Looks for (d, d_H) with d.C < d_H and d.C_k > d_H for every center,
    i.e. a certificate that C is outside the centers' convex hull.
    """
    C = np.asarray(C, dtype=float).ravel()
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    m, n = centers.shape
    M = np.zeros((m + 1, n + 1))
    M[0, :n] = C
    M[0, n] = -1.0
    M[1:, :n] = -centers
    M[1:, n] = 1.0
    found, z = lp_feasible_strict(M)
    if not found:
        return False, None, None
    return True, z[:n], float(z[n])


def default_upper_bound(balls: Sequence[Ball], C) -> float:
    """(max_k(||C - C_k|| + r_k))^2: valid since the set lies in each ball."""
    C = np.asarray(C, dtype=float).ravel()
    return float(
        max(np.linalg.norm(C - b.center) + b.radius for b in balls) ** 2
    )


def farthest_point(balls: Sequence[Ball], C, cfg: FrameworkConfig,
                   container=None) -> SolveReport:
    """Maximize ||x - C||^2 over the ball intersection (the main driver).

    Routes by geometry: separating hyperplane or a disjoint classification
    lead to the bisection; a boundary classification returns the boundary
    minimizer directly; a strictly interior classification needs the
    polytope-inclusion machinery and therefore a `container` polytope known
    to sit inside the intersection (raises PreconditionError without one).
    """
    h = build_h_from_balls(balls)
    f = single_quadratic(C)
    C = np.asarray(C, dtype=float).ravel()
    interior = minimize_unconstrained(h, cfg)
    if interior.value > cfg.tol_membership:
        raise InstanceError("ball intersection is empty")
    if abs(interior.value) <= cfg.tol_membership:
        p = interior.minimizer
        return SolveReport(minimizer=p, value=float(f(p)), iterations=0,
                           converged=True, method="singleton")
    found, _, _ = separating_hyperplane(C, [b.center for b in balls])
    if found:
        label = CaseLabel.DISJOINT_FROM_INTERIOR
        x1 = interior.minimizer
    else:
        label, x1 = _classify(h, f, cfg)
        if label is CaseLabel.DISJOINT_FROM_INTERIOR:
            x1 = interior.minimizer
    if label is CaseLabel.DISJOINT_FROM_INTERIOR:
        rep = _bisection(f, h, x1, cfg.k_f * float(f(x1)),
                         cfg.k_f * default_upper_bound(balls, C), cfg)
        return SolveReport(minimizer=rep.minimizer, value=rep.value,
                           iterations=rep.iterations, converged=rep.converged,
                           lower_bound=rep.lower_bound,
                           upper_bound=rep.upper_bound, method="bisection")
    if label is CaseLabel.ON_BOUNDARY:
        # The boundary minimizer of h - f is itself a maximizer of f.
        return SolveReport(minimizer=x1, value=float(f(x1)), iterations=0,
                           converged=True, method="boundary")
    if container is None:
        raise PreconditionError(
            "strictly interior minimizer set: the bisection certificate does "
            "not apply and no container polytope was supplied"
        )
    from . import radius_search
    from .geometry import h_minus_f_pieces

    pieces = h_minus_f_pieces(balls, C)
    rs = radius_search.r_star_inclusion(pieces, container, cfg)
    point = rs.touching_point if rs.touching_point is not None else x1
    return SolveReport(minimizer=np.asarray(point, dtype=float),
                       value=rs.r_star ** 2, iterations=rs.iterations,
                       converged=True, method="inclusion")


def linear_perturbation_max(balls: Sequence[Ball],
                            base_f: PiecewiseMaxFunction,
                            C_lin, cfg: FrameworkConfig) -> SolveReport:
    """Maximize base_f(x) + C_lin . x over the ball intersection.

    The shifted objective must put the instance in the disjoint regime
    (a large enough |C_lin| removes every stationary point of h - f);
    anything else raises PreconditionError rather than silently returning
    an uncertified value.
    """
    C_lin = np.asarray(C_lin, dtype=float).ravel()
    if len(base_f.pieces) != 1:
        raise InstanceError("base_f must be a single piece")
    bp = base_f.pieces[0]
    if bp.dim != C_lin.shape[0]:
        raise InstanceError("C_lin dimension does not match base_f")
    f = PiecewiseMaxFunction(
        (QuadraticPiece(bp.quad_coeff, bp.linear + C_lin, bp.constant),)
    )
    h = build_h_from_balls(balls)
    label, _ = _classify(h, f, cfg)
    if label is not CaseLabel.DISJOINT_FROM_INTERIOR:
        raise PreconditionError(
            f"shifted objective classifies as {label.value}; the reach "
            "certificate does not cover this instance (larger |C_lin| needed)"
        )
    interior = minimize_unconstrained(h, cfg)
    x1 = interior.minimizer
    # Simple valid bound: the piece's maximum over the first ball alone.
    c0, r0 = balls[0].center, balls[0].radius
    lin = f.pieces[0].linear
    F_bar = (f.pieces[0].quad_coeff * (np.linalg.norm(c0) + r0) ** 2
             + float(np.dot(lin, c0)) + np.linalg.norm(lin) * r0
             + f.pieces[0].constant)
    F_bar = max(F_bar, float(f(x1)))
    return _bisection(f, h, x1, cfg.k_f * float(f(x1)), cfg.k_f * F_bar, cfg)
