"""Convex minimization and linear-program primitives.

Two layers live here:

* a dense two-phase simplex (Bland's rule, free variables split) behind
  ``lp_max``, ``lp_feasible_strict`` and ``polytope_empty``;
* a global minimizer for max-of-quadratic/affine functions, optionally
  under a level constraint on a second such function.

The minimizer works in the lifted space (x, u, t) where u stands for
||x||^2: every piece and every constraint row is then linear, and the only
approximated object is the paraboloid u >= ||x||^2, outer-approximated by
tangent cuts.  Each LP relaxation yields a certified lower bound over a
bounding box known to contain the optimum; a KKT polish on the active
pieces then drives the incumbent to full precision.  The method differs
from a projected-subgradient scheme but honors the same contract (value
within tol_solver of the optimum, deterministic given starts and config).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .geometry import (
    FrameworkConfig,
    InstanceError,
    PiecewiseMaxFunction,
    Polytope,
    eval_piecewise,
)

_BIG_BOX = 1e6
_STRICT_MARGIN = 1e-7  # t* above this counts as strictly feasible


class SolverFailure(RuntimeError):
    """Simplex did not terminate cleanly even after perturbation retries."""


@dataclass(frozen=True)
class LPResult:
    optimal_value: float
    argmax: np.ndarray
    status: str  # optimal | infeasible | unbounded


@dataclass(frozen=True)
class SolveReport:
    """Outcome of a convex minimization.

    ``minimizers`` collects distinct near-optimal points located by the
    optimal-face probes; ``non_singleton`` is set when two of them are
    farther apart than 1e-4 with values within tol_solver.
    """

    minimizer: np.ndarray
    value: float
    iterations: int
    converged: bool
    active_constraint: bool = False
    lower_bound: float = -np.inf
    upper_bound: float = np.inf
    non_singleton: bool = False
    minimizers: tuple = ()
    method: str = ""


# ---------------------------------------------------------------------------
# LP layer
# ---------------------------------------------------------------------------


def _solve_lp_free(A: np.ndarray, rhs: np.ndarray, c: np.ndarray,
                   tol: float = 1e-9, max_iter: int = 20000):
    """maximize c.y subject to A y <= rhs, y free.

    Returns (status, y, value) with status in {"optimal", "infeasible",
    "unbounded"}.  Free variables are split y = y+ - y-; rows with negative
    right-hand side get an artificial variable and a phase-I pass.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    rhs = np.asarray(rhs, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    m, n = A.shape
    if m == 0:
        return "optimal", np.zeros(n), 0.0

    Asp = np.hstack([A, -A])  # columns for y+, y-
    flip = rhs < 0
    Asp[flip] *= -1.0
    b = np.where(flip, -rhs, rhs)

    nn = 2 * n
    art_rows = np.nonzero(flip)[0]
    n_art = art_rows.size
    ncols = nn + m + n_art

    T = np.zeros((m + 1, ncols + 1))
    T[:m, :nn] = Asp
    T[:m, ncols] = b
    slack = np.eye(m)
    slack[flip] *= -1.0
    T[:m, nn:nn + m] = slack
    basis = np.empty(m, dtype=np.int64)
    basis[:] = nn + np.arange(m)
    for j, i in enumerate(art_rows):
        T[i, nn + m + j] = 1.0
        basis[i] = nn + m + j

    if n_art:
        # Phase I: maximize -(sum of artificials); z-row starts at +1 on
        # artificial columns, then basic columns are eliminated.
        T[m, nn + m:ncols] = 1.0
        for i in art_rows:
            T[m, :] -= T[i, :]
        status = _kernels.run_simplex(T, basis, tol, max_iter)
        if status == _kernels.ITERATION_LIMIT:
            raise SolverFailure("phase I hit the iteration limit")
        if T[m, ncols] < -1e-7 * (1.0 + np.abs(b).max()):
            return "infeasible", np.zeros(n), 0.0
        # Pivot remaining basic artificials out (or drop redundant rows).
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= nn + m:
                row = T[i, :nn + m]
                nz = np.nonzero(np.abs(row) > 1e-9)[0]
                if nz.size == 0:
                    keep[i] = False
                    continue
                col = int(nz[0])
                T[i, :] /= T[i, col]
                for r in range(m + 1):
                    if r != i and T[r, col] != 0.0:
                        T[r, :] -= T[r, col] * T[i, :]
                basis[i] = col
        if not np.all(keep):
            T = np.vstack([T[:m][keep], T[m:]])
            basis = basis[keep]
            m = basis.size
    # Phase II on the structural + slack columns.
    T2 = np.ascontiguousarray(
        np.hstack([T[:, :nn + m], T[:, [ncols]]])
    )
    z = np.zeros(nn + m + 1)
    z[:n] = -c
    z[n:nn] = c
    T2[m, :] = z
    for i in range(m):
        coef = T2[m, basis[i]]
        if coef != 0.0:
            T2[m, :] -= coef * T2[i, :]
    status = _kernels.run_simplex(T2, basis, tol, max_iter)
    if status == _kernels.ITERATION_LIMIT:
        raise SolverFailure("phase II hit the iteration limit")
    if status == _kernels.UNBOUNDED:
        return "unbounded", np.zeros(n), np.inf

    y = np.zeros(nn + m)
    for i in range(m):
        y[basis[i]] = T2[i, nn + m]
    x = y[:n] - y[n:nn]
    return "optimal", x, float(np.dot(c, x))


def lp_max(c, P: Polytope) -> LPResult:
    """Maximum of c.x over {A x + b <= 0}, by dense two-phase simplex."""
    c = np.asarray(c, dtype=float).ravel()
    if c.shape[0] != P.dim:
        raise InstanceError(
            f"objective has dimension {c.shape[0]}, polytope has {P.dim}"
        )
    try:
        status, x, val = _solve_lp_free(P.A, -P.b, c)
    except SolverFailure:
        # Degenerate pivoting: retry once on a slightly perturbed system.
        rng = np.random.default_rng(0)
        pert = 1e-11 * (1.0 + np.abs(P.b)) * rng.random(P.nrows)
        status, x, val = _solve_lp_free(P.A, -P.b + pert, c)
    return LPResult(optimal_value=val, argmax=x, status=status)


def lp_feasible_strict(M) -> tuple[bool, Optional[np.ndarray]]:
    """Is there z with M z < 0 strictly (all rows)?

    Solved as max t subject to M z + t 1 <= 0, ||z||_inf <= 1; strict
    feasibility means t* > 1e-7.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    m, k = M.shape
    if m == 0:
        return True, np.zeros(k)
    A = np.zeros((m + 2 * k, k + 1))
    A[:m, :k] = M
    A[:m, k] = 1.0
    A[m:m + k, :k] = np.eye(k)
    A[m + k:, :k] = -np.eye(k)
    rhs = np.concatenate([np.zeros(m), np.ones(2 * k)])
    obj = np.zeros(k + 1)
    obj[k] = 1.0
    status, y, val = _solve_lp_free(A, rhs, obj)
    if status != "optimal" or val <= _STRICT_MARGIN:
        return False, None
    return True, y[:k]


def polytope_empty(P: Polytope, tol_membership: float = 1e-7) -> bool:
    """True iff no x satisfies A x + b <= tol_membership."""
    status, _, _ = _solve_lp_free(P.A, -P.b + tol_membership, np.zeros(P.dim))
    return status == "infeasible"


# ---------------------------------------------------------------------------
# Convex minimization
# ---------------------------------------------------------------------------


def _pieces_arrays(pm: PiecewiseMaxFunction):
    q = np.array([p.quad_coeff for p in pm.pieces])
    L = np.array([p.linear for p in pm.pieces])
    c = np.array([p.constant for p in pm.pieces])
    return q, L, c


def _box_from_quadratics(pm: PiecewiseMaxFunction, level: float):
    """Coordinate box containing {pm <= level}, from the quadratic pieces.

    Each quadratic piece ||x - v||^2 + k bounds the set by a ball; the box
    intersects their coordinate intervals.  Returns None when pm is affine.
    """
    lo = None
    hi = None
    for p in pm.pieces:
        if p.quad_coeff != 1.0:
            continue
        v = -0.5 * p.linear
        k = p.constant - float(np.dot(v, v))
        rad_sq = level - k
        if rad_sq < 0:
            rad_sq = 0.0
        r = np.sqrt(rad_sq)
        plo, phi = v - r, v + r
        lo = plo if lo is None else np.maximum(lo, plo)
        hi = phi if hi is None else np.minimum(hi, phi)
    if lo is None:
        return None
    return lo, hi


def _min_norm_in_hull(G: np.ndarray, iters: int = 200) -> np.ndarray:
    """Minimum-norm point of conv(rows of G), by Frank-Wolfe (small inputs)."""
    w = np.full(G.shape[0], 1.0 / G.shape[0])
    s = w @ G
    for it in range(iters):
        grads = G @ s
        j = int(np.argmin(grads))
        d = G[j] - s
        dd = float(np.dot(d, d))
        if dd <= 1e-30:
            break
        gamma = min(1.0, max(0.0, -float(np.dot(s, d)) / dd))
        if gamma <= 0:
            break
        s = s + gamma * d
        w = (1 - gamma) * w
        w[j] += gamma
    return s


class _LiftedLP:
    """LP relaxation in (x, u, t) with a growing pool of paraboloid cuts."""

    def __init__(self, objective, constraints, lo, hi, u_max):
        self.n = lo.shape[0]
        self.lo = lo
        self.hi = hi
        self.u_max = u_max
        n = self.n
        rows = []
        rhs = []
        q, L, c = _pieces_arrays(objective)
        for qi, li, ci in zip(q, L, c):
            # q u + l.x + c <= t
            rows.append(np.concatenate([li, [qi, -1.0]]))
            rhs.append(-ci)
        for con, level in constraints:
            qc, Lc, cc = _pieces_arrays(con)
            for qi, li, ci in zip(qc, Lc, cc):
                rows.append(np.concatenate([li, [qi, 0.0]]))
                rhs.append(level - ci)
        eye = np.eye(n)
        for i in range(n):
            rows.append(np.concatenate([eye[i], [0.0, 0.0]]))
            rhs.append(hi[i])
            rows.append(np.concatenate([-eye[i], [0.0, 0.0]]))
            rhs.append(-lo[i])
        rows.append(np.concatenate([np.zeros(n), [-1.0, 0.0]]))
        rhs.append(0.0)  # u >= 0
        rows.append(np.concatenate([np.zeros(n), [1.0, 0.0]]))
        rhs.append(u_max)
        self.base_rows = np.array(rows)
        self.base_rhs = np.array(rhs)
        self.cut_points: list[np.ndarray] = []
        self.obj = np.concatenate([np.zeros(n), [0.0, -1.0]])  # maximize -t

    def add_cut(self, y: np.ndarray) -> None:
        # u >= 2 y.x - ||y||^2, the tangent of the paraboloid at y.
        self.cut_points.append(np.asarray(y, dtype=float).copy())

    def solve(self):
        if self.cut_points:
            Y = np.array(self.cut_points)
            cut_rows = np.hstack([
                2.0 * Y,
                -np.ones((Y.shape[0], 1)),
                np.zeros((Y.shape[0], 1)),
            ])
            cut_rhs = np.einsum("ij,ij->i", Y, Y)
            A = np.vstack([self.base_rows, cut_rows])
            rhs = np.concatenate([self.base_rhs, cut_rhs])
        else:
            A, rhs = self.base_rows, self.base_rhs
        status, y, val = _solve_lp_free(A, rhs, self.obj)
        if status != "optimal":
            return status, None, None, None
        return status, y[:self.n], y[self.n], y[self.n + 1]

    def probe(self, direction: np.ndarray, t_cap: float):
        """Extreme point of the relaxation's near-optimal face along direction."""
        cap_row = np.concatenate([np.zeros(self.n), [0.0, 1.0]])
        if self.cut_points:
            Y = np.array(self.cut_points)
            cut_rows = np.hstack([
                2.0 * Y,
                -np.ones((Y.shape[0], 1)),
                np.zeros((Y.shape[0], 1)),
            ])
            cut_rhs = np.einsum("ij,ij->i", Y, Y)
            A = np.vstack([self.base_rows, cut_rows, cap_row[None, :]])
            rhs = np.concatenate([self.base_rhs, cut_rhs, [t_cap]])
        else:
            A = np.vstack([self.base_rows, cap_row[None, :]])
            rhs = np.concatenate([self.base_rhs, [t_cap]])
        obj = np.concatenate([direction, [0.0, 0.0]])
        status, y, _ = _solve_lp_free(A, rhs, obj)
        if status != "optimal":
            return None
        return y[:self.n]


def _eval_all(pm: PiecewiseMaxFunction, x: np.ndarray) -> np.ndarray:
    q, L, c = _pieces_arrays(pm)
    return q * float(np.dot(x, x)) + L @ x + c


def _kkt_polish(objective, constraints, x0, tol_act):
    """Newton solve of the active-set KKT system from a near-optimal point.

    Returns the polished point or None when the system is degenerate or
    the iteration wanders.
    """
    x = np.asarray(x0, dtype=float).copy()
    n = x.shape[0]
    fvals = _eval_all(objective, x)
    fmax = float(fvals.max())
    act_obj = [i for i, v in enumerate(fvals) if v >= fmax - tol_act]
    act_con = []
    for ci, (con, level) in enumerate(constraints):
        cvals = _eval_all(con, x)
        for j, v in enumerate(cvals):
            if v >= level - tol_act and v >= cvals.max() - tol_act:
                act_con.append((ci, j))

    obj_pieces = [objective.pieces[i] for i in act_obj]
    con_pieces = [(constraints[ci][0].pieces[j], constraints[ci][1])
                  for ci, j in act_con]
    na, nc = len(obj_pieces), len(con_pieces)
    theta = np.full(na, 1.0 / na)
    nu = np.zeros(nc)

    def residual(x, theta, nu, mu):
        grads_o = np.array([2 * p.quad_coeff * x + p.linear for p in obj_pieces])
        grads_c = np.array([2 * p.quad_coeff * x + p.linear for p, _ in con_pieces]) \
            if nc else np.zeros((0, n))
        r_stat = theta @ grads_o + (nu @ grads_c if nc else 0.0)
        r_obj = np.array([p(x) - mu for p in obj_pieces])
        r_con = np.array([p(x) - lvl for p, lvl in con_pieces])
        r_sum = np.array([theta.sum() - 1.0])
        return np.concatenate([r_stat, r_obj, r_con, r_sum]), grads_o, grads_c

    mu = fmax
    for _ in range(40):
        r, grads_o, grads_c = residual(x, theta, nu, mu)
        if np.abs(r).max() < 1e-13 * (1.0 + abs(mu)):
            break
        # Jacobian over unknowns (x, mu, theta, nu)
        dim = n + 1 + na + nc
        J = np.zeros((dim, dim))
        curv = 2.0 * (sum(t * p.quad_coeff for t, p in zip(theta, obj_pieces))
                      + sum(v * p.quad_coeff for v, (p, _) in zip(nu, con_pieces)))
        J[:n, :n] = curv * np.eye(n)
        J[:n, n + 1:n + 1 + na] = grads_o.T
        if nc:
            J[:n, n + 1 + na:] = grads_c.T
        J[n:n + na, :n] = grads_o
        J[n:n + na, n] = -1.0
        if nc:
            J[n + na:n + na + nc, :n] = grads_c
        J[n + na + nc, n + 1:n + 1 + na] = 1.0
        # rows: [stat (n), obj (na), con (nc), sum (1)]
        rows = np.concatenate([
            r[:n], r[n:n + na], r[n + na:n + na + nc], r[-1:]
        ])
        try:
            step = np.linalg.solve(J, -rows)
        except np.linalg.LinAlgError:
            return None
        x = x + step[:n]
        mu = mu + step[n]
        theta = theta + step[n + 1:n + 1 + na]
        if nc:
            nu = nu + step[n + 1 + na:]
        if not np.all(np.isfinite(x)):
            return None
    if np.any(theta < -1e-8) or np.any(nu < -1e-8):
        return None
    if float(np.linalg.norm(x - np.asarray(x0))) > 1.0:
        return None
    return x


def _minimize(objective: PiecewiseMaxFunction,
              constraints: Sequence[tuple[PiecewiseMaxFunction, float]],
              cfg: FrameworkConfig,
              starts: Optional[Sequence] = None,
              cut_pool: Optional[list] = None,
              probe: bool = False,
              slater: Optional[np.ndarray] = None) -> SolveReport:
    """Shared minimization core (see module docstring for the method)."""
    n = objective.dim
    constraints = list(constraints)
    for con, _ in constraints:
        if con.dim != n:
            raise InstanceError("constraint dimension mismatch")

    start_pts = [np.asarray(s, dtype=float) for s in (starts or [])]

    def true_val(x):
        return float(_eval_all(objective, x).max())

    def feasible(x, slack=0.0):
        return all(
            float(_eval_all(con, x).max()) <= level + slack
            for con, level in constraints
        )

    # Bounding box: from the constraint balls when present, else from the
    # objective's own quadratic pieces and an incumbent value.
    box = None
    if constraints:
        for con, level in constraints:
            if not np.isfinite(level):
                continue
            bb = _box_from_quadratics(con, level)
            if bb is not None:
                box = bb if box is None else (
                    np.maximum(box[0], bb[0]), np.minimum(box[1], bb[1]))
    if box is None:
        ref_candidates = list(start_pts)
        for p in objective.pieces:
            if p.quad_coeff == 1.0:
                ref_candidates.append(-0.5 * p.linear)
        if slater is not None:
            ref_candidates.append(np.asarray(slater, dtype=float))
        ref_candidates = [r for r in ref_candidates if feasible(r, 1e-9)] \
            or ref_candidates
        if ref_candidates:
            ub0 = min(true_val(r) for r in ref_candidates)
            box = _box_from_quadratics(objective, ub0 + 1e-6)
    if box is None:
        box = (np.full(n, -_BIG_BOX), np.full(n, _BIG_BOX))
    lo = box[0] - 1e-9 * (1.0 + np.abs(box[0]))
    hi = box[1] + 1e-9 * (1.0 + np.abs(box[1]))
    u_max = float(max(np.dot(lo, lo), np.dot(hi, hi), 1.0)) * float(n)

    lp = _LiftedLP(objective, constraints, lo, hi, u_max)
    seeds = list(start_pts)
    if cut_pool:
        seeds.extend(cut_pool)
    if slater is not None:
        seeds.append(np.asarray(slater, dtype=float))
    seeds.append(0.5 * (lo + hi))
    for s in seeds[: max(cfg.restarts, len(start_pts)) + 8]:
        lp.add_cut(s)

    best_x = None
    best_val = np.inf
    lower = -np.inf
    converged = False
    iters = 0
    scale = 1.0 + max(abs(float(p.constant)) for p in objective.pieces)

    def restore(cand):
        """Pull an infeasible point toward the Slater point until feasible.

        Convexity makes bisection on the segment valid; returns None when
        no Slater point is available.
        """
        if feasible(cand, cfg.tol_membership):
            return cand
        if slater is None:
            return None
        sl = np.asarray(slater, dtype=float)
        if not feasible(sl, 0.0):
            return None
        a, bpt = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (a + bpt)
            if feasible(cand + mid * (sl - cand), 0.0):
                bpt = mid
            else:
                a = mid
        return cand + bpt * (sl - cand)

    for it in range(cfg.max_iterations):
        iters = it + 1
        status, x_rel, u_rel, t_rel = lp.solve()
        if status == "infeasible":
            if constraints and best_x is None:
                raise InstanceError("constraint set is infeasible")
            break
        if status != "optimal":
            break
        lower = max(lower, t_rel)
        cand = x_rel
        if constraints:
            cand = restore(cand)
        if cand is not None:
            v = true_val(cand)
            if v < best_val:
                best_val, best_x = v, cand.copy()
        lp.add_cut(x_rel)
        if cut_pool is not None:
            cut_pool.append(x_rel.copy())
        gap_tol = max(cfg.tol_solver, cfg.tol_solver * scale)
        if best_x is not None and best_val - lower <= gap_tol:
            converged = True
            break

    if best_x is None:
        if constraints:
            raise InstanceError("no feasible point found")
        best_x = 0.5 * (lo + hi)
        best_val = true_val(best_x)

    polished = _kkt_polish(objective, constraints, best_x,
                           tol_act=max(1e-7, 10 * (best_val - lower)))
    if polished is not None and feasible(polished, cfg.tol_membership):
        pv = true_val(polished)
        # Accept even a marginally larger value: the polished point is
        # exactly feasible while the incumbent may sit tol-outside.
        if pv < best_val + 10 * max(cfg.tol_solver, 1e-9 * scale):
            best_x, best_val = polished, pv

    # Subgradient certificate: min-norm element of the active-piece hull.
    fvals = _eval_all(objective, best_x)
    act = fvals >= fvals.max() - max(1e-9, 1e-9 * scale)
    G = np.array([2 * p.quad_coeff * best_x + p.linear
                  for p, a in zip(objective.pieces, act) if a])
    if not constraints and G.size:
        s = _min_norm_in_hull(G)
        diam = float(np.linalg.norm(hi - lo))
        lower = max(lower, best_val - float(np.linalg.norm(s)) * diam)
        if best_val - lower <= max(cfg.tol_solver, cfg.tol_solver * scale):
            converged = True

    minimizers = [best_x]
    non_singleton = False
    if probe and np.isfinite(lower):
        t_cap = lower + max(cfg.tol_solver, 1e-9 * scale)
        dirs = np.vstack([np.eye(n), -np.eye(n)])
        for d in dirs:
            p = lp.probe(d, t_cap)
            if p is None:
                continue
            if constraints:
                # The relaxation can overshoot where the model is loose;
                # restored points often keep the optimal value (flat faces).
                p = restore(p)
                if p is None:
                    continue
            if true_val(p) > best_val + max(cfg.tol_solver, 1e-8 * scale):
                continue
            if all(np.linalg.norm(p - q) > 1e-4 for q in minimizers):
                minimizers.append(p)
                non_singleton = True

    active = False
    for con, level in constraints:
        if np.isfinite(level) and \
                abs(float(_eval_all(con, best_x).max()) - level) <= cfg.tol_membership:
            active = True
    return SolveReport(
        minimizer=best_x,
        value=best_val,
        iterations=iters,
        converged=converged,
        active_constraint=active,
        lower_bound=lower,
        non_singleton=non_singleton,
        minimizers=tuple(minimizers),
    )


def minimize_unconstrained(pm: PiecewiseMaxFunction, cfg: FrameworkConfig,
                           starts: Optional[Sequence] = None,
                           cut_pool: Optional[list] = None,
                           probe: bool = False) -> SolveReport:
    """Global minimum of a convex max-of-pieces function."""
    return _minimize(pm, [], cfg, starts=starts, cut_pool=cut_pool, probe=probe)


def minimize_with_level(pm: PiecewiseMaxFunction,
                        constraint: PiecewiseMaxFunction,
                        level: float,
                        cfg: FrameworkConfig,
                        starts: Optional[Sequence] = None,
                        cut_pool: Optional[list] = None,
                        probe: bool = False) -> SolveReport:
    """Minimize pm subject to constraint(x) <= level.

    The constraint set must have nonempty interior; a Slater point is
    located by minimizing the constraint itself, and the returned minimizer
    is always feasible within tol_membership.
    """
    if not np.isfinite(level):
        return minimize_unconstrained(pm, cfg, starts=starts,
                                      cut_pool=cut_pool, probe=probe)
    inner = minimize_unconstrained(constraint, cfg, starts=starts)
    if inner.value > level + cfg.tol_membership:
        raise InstanceError(
            f"constraint level set is empty (min {inner.value:.6g} > {level:.6g})"
        )
    return _minimize(pm, [(constraint, level)], cfg, starts=starts,
                     cut_pool=cut_pool, probe=probe, slater=inner.minimizer)
