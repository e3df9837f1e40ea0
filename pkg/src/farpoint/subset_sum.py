"""Real subset-sum as a farthest-point problem over a disk cover.

Pipeline: encode "is there a nonempty binary x with S.x = 0" as maximizing
the squared distance to a query point over a cover of 2n+2 closed balls
built so that every hypercube corner lies exactly on the cover's boundary
sphere.  The maximum equals a known corner value exactly when a solution
corner exists; the decision procedure branches on where the minimizer of
h - f sits and certifies YES by exact re-summation of a rounded corner,
NO by a certified upper bound strictly below the corner value.

All cover quantities are closed-form; see build_disk_cover.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .convex_solver import lp_max, minimize_unconstrained, minimize_with_level
from .geometry import (
    Ball,
    FrameworkConfig,
    InstanceError,
    PiecewiseMaxFunction,
    Polytope,
    build_h_from_balls,
    h_minus_f_pieces,
    polytope_family,
    single_quadratic,
)
from .maximize import _bisection, default_upper_bound
from .radius_search import InclusionNeverHolds, r_star_inclusion


@dataclass(frozen=True)
class SubsetSumInstance:
    """A multiset of reals; asks for a nonempty subset summing to zero."""

    S: np.ndarray

    def __post_init__(self):
        S = np.asarray(self.S, dtype=float).ravel()
        if S.size == 0:
            raise InstanceError("S must be nonempty")
        if not np.all(np.isfinite(S)):
            raise InstanceError("S must be finite")
        object.__setattr__(self, "S", S)

    @property
    def n(self) -> int:
        return int(self.S.shape[0])

    @property
    def is_integral(self) -> bool:
        return bool(np.all(self.S == np.round(self.S)))


@dataclass(frozen=True)
class DiskCover:
    """The 2n+2 balls covering the search polytope, plus bookkeeping.

    hypercube_disks come interleaved: index 2k pairs the facet x_k = 0,
    index 2k+1 the facet x_k = 1.  rho is the base offset; every disk's
    actual offset is alpha * rho.
    """

    hypercube_disks: tuple
    s_disk: Ball
    h_disk: Ball
    rho: float
    foot_points: tuple  # (P_s, P_h)
    small_radii: tuple  # (r_tilde_s, r_tilde_h)
    alpha: float
    beta: float
    C_query: np.ndarray

    @property
    def all_balls(self) -> tuple:
        return self.hypercube_disks + (self.s_disk, self.h_disk)

    @property
    def dim(self) -> int:
        return self.s_disk.dim


@dataclass(frozen=True)
class DecisionReport:
    """Outcome of decide_subset_sum.

    witness_subset holds 1-based positions into S.  branch is one of
    CertificateBranch, BoundaryBranch, InclusionBranch, or Degenerate for
    the zero-entry shortcuts.  residual is |S.x| at the rounded witness
    candidate (0 when no candidate was produced).
    """

    answer: str  # YES | NO | INCONCLUSIVE
    witness_subset: Optional[tuple]
    branch: str
    residual: float
    diagnostics: str = ""


def build_search_polytope(inst: SubsetSumInstance) -> Polytope:
    """Rows: S.x <= 0; 0 <= x_k <= 1; sum(x) >= 1/2 (excludes the origin)."""
    n = inst.n
    A = np.zeros((2 * n + 2, n))
    b = np.zeros(2 * n + 2)
    A[0] = inst.S
    A[1:n + 1] = np.eye(n)
    b[1:n + 1] = -1.0
    A[n + 1:2 * n + 1] = -np.eye(n)
    A[2 * n + 1] = -1.0
    b[2 * n + 1] = 0.5
    return Polytope(A, b)


def build_disk_cover(inst: SubsetSumInstance, rho: float, beta: float,
                     alpha: float = 1.0) -> DiskCover:
    """Closed-form construction of the 2n+2 disk cover.

    Each disk's boundary sphere meets the circumscribed sphere of the unit
    hypercube exactly along one facet hyperplane (hypercube disks), the
    hyperplane {S.x = 0} (s-disk), or {sum(x) = 1/2} (h-disk); as a result
    all binary corners lie exactly on the boundary of the intersection.
    """
    if rho <= 0 or beta <= 0:
        raise InstanceError("rho and beta must be positive")
    if alpha < 1.0:
        raise InstanceError("alpha must be >= 1")
    S = inst.S
    n = inst.n
    norm = float(np.linalg.norm(S))
    if norm == 0.0:
        raise InstanceError("S must be nonzero for the cover construction")
    S_hat = S / norm
    sigma = float(np.sum(S)) / norm
    q = alpha * rho
    half = 0.5 * np.ones(n)

    r_sq = (0.5 + q) ** 2 + (n - 1) / 4.0
    disks = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        disks.append(Ball(half + q * e, float(np.sqrt(r_sq))))
        disks.append(Ball(half - q * e, float(np.sqrt(r_sq))))

    r_tilde_s_sq = n / 4.0 - sigma ** 2 / 4.0
    if r_tilde_s_sq < -1e-12:
        raise InstanceError(
            "hyperplane foot outside circumscribed ball "
            f"(|sum(S)|/||S|| = {abs(sigma):.6g} > sqrt(n) = {np.sqrt(n):.6g})"
        )
    r_tilde_s_sq = max(r_tilde_s_sq, 0.0)
    q_s = q - sigma / 2.0
    s_disk = Ball(half - q * S_hat, float(np.sqrt(q_s ** 2 + r_tilde_s_sq)))
    P_s = half - (sigma / 2.0) * S_hat

    r_tilde_h_sq = 0.5 - 1.0 / (4.0 * n)
    q_h = q + (n - 1) / (2.0 * np.sqrt(n))
    h_disk = Ball(half + (q / np.sqrt(n)) * np.ones(n),
                  float(np.sqrt(q_h ** 2 + r_tilde_h_sq)))
    P_h = (1.0 / (2.0 * n)) * np.ones(n)

    C_query = half - alpha * (beta / 2.0) * S_hat
    return DiskCover(
        hypercube_disks=tuple(disks),
        s_disk=s_disk,
        h_disk=h_disk,
        rho=float(rho),
        foot_points=(P_s, P_h),
        small_radii=(float(np.sqrt(r_tilde_s_sq)), float(np.sqrt(r_tilde_h_sq))),
        alpha=float(alpha),
        beta=float(beta),
        C_query=C_query,
    )


def corner_exactness_check(cover: DiskCover, inst: SubsetSumInstance) -> float:
    """Max |distance - radius| over all corner/sphere incidences.

    Every corner must sit on the boundary sphere of each hypercube disk
    whose defining facet contains it, and corners on {S.x = 0} must sit on
    the s-sphere as well.  Exponential in n, so n <= 20 and alpha = 1 only.
    """
    if cover.alpha != 1.0:
        raise InstanceError("corner check applies to the unscaled cover only")
    n = inst.n
    if n > 20:
        raise InstanceError("corner check is limited to n <= 20")
    S = inst.S
    s_tol = 1e-9 * max(1.0, float(np.linalg.norm(S)))
    max_err = 0.0
    total = 1 << n
    chunk = 1 << 14
    ks = np.arange(n)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        corners = ((idx[:, None] >> ks) & 1).astype(float)
        for k in range(n):
            for side, bit in ((0, 0.0), (1, 1.0)):
                disk = cover.hypercube_disks[2 * k + side]
                mask = corners[:, k] == bit
                if not np.any(mask):
                    continue
                d = np.linalg.norm(corners[mask] - disk.center, axis=1)
                max_err = max(max_err, float(np.abs(d - disk.radius).max()))
        on_plane = np.abs(corners @ S) <= s_tol
        if np.any(on_plane):
            d = np.linalg.norm(corners[on_plane] - cover.s_disk.center, axis=1)
            max_err = max(max_err, float(np.abs(d - cover.s_disk.radius).max()))
    return max_err


def _rho_bar_conditions(inst: SubsetSumInstance, rho: float) -> bool:
    """Radii >= sqrt(n)/2, C_s.S < 0, C_h.1 > 0, in closed form."""
    n = inst.n
    norm = float(np.linalg.norm(inst.S))
    sigma = float(np.sum(inst.S)) / norm
    quarter_n = n / 4.0
    r_k_sq = (0.5 + rho) ** 2 + (n - 1) / 4.0
    r_s_sq = (rho - sigma / 2.0) ** 2 + max(quarter_n - sigma ** 2 / 4.0, 0.0)
    r_h_sq = (rho + (n - 1) / (2.0 * np.sqrt(n))) ** 2 + 0.5 - 1.0 / (4.0 * n)
    if min(r_k_sq, r_s_sq, r_h_sq) < quarter_n - 1e-15:
        return False
    if norm * (sigma / 2.0 - rho) >= 0.0:  # C_s.S < 0 fails
        return False
    return n / 2.0 + rho * np.sqrt(n) > 0.0


def estimate_rho_bar(inst: SubsetSumInstance) -> float:
    """Smallest offset making the Remark-style cover conditions hold.

    Bisection over the conjunction of the three monotone closed-form
    conditions, returned with a 1.01 safety factor.
    """
    if float(np.linalg.norm(inst.S)) == 0.0:
        raise InstanceError("S must be nonzero")
    lo, hi = 0.0, 1.0
    for _ in range(80):
        if _rho_bar_conditions(inst, hi):
            break
        hi *= 2.0
    else:
        raise InstanceError("cover conditions never satisfied (unexpected)")
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if _rho_bar_conditions(inst, mid):
            hi = mid
        else:
            lo = mid
    return hi * 1.01


def rho_for_delta(inst: SubsetSumInstance, delta: float) -> float:
    """Offset guaranteeing the cover hugs the polytope within delta.

    Uses the spherical-cap gap a^2/(q + sqrt(q^2 + a^2)) <= delta per disk,
    inverted in closed form to q >= (a^2 - delta^2)/(2 delta).
    """
    if delta <= 0:
        raise InstanceError("delta must be positive")
    n = inst.n
    norm = float(np.linalg.norm(inst.S))
    if norm == 0.0:
        raise InstanceError("S must be nonzero")
    sigma = float(np.sum(inst.S)) / norm
    need = [estimate_rho_bar(inst)]

    def q_required(a_sq: float) -> float:
        if a_sq <= delta ** 2:
            return 0.0
        return (a_sq - delta ** 2) / (2.0 * delta)

    # hypercube disks: q = 1/2 + rho, shared-sphere radius sqrt(n-1)/2
    need.append(q_required((n - 1) / 4.0) - 0.5)
    # s-disk: q = rho - sigma/2
    need.append(q_required(max(n / 4.0 - sigma ** 2 / 4.0, 0.0)) + sigma / 2.0)
    # h-disk: q = rho + (n-1)/(2 sqrt(n))
    need.append(q_required(0.5 - 1.0 / (4.0 * n)) - (n - 1) / (2.0 * np.sqrt(n)))
    return max(need)


def hat_R(R: float, alpha: float, beta: float, n: int) -> float:
    """Radius mapping under which the alpha-scaled family coincides."""
    if alpha == 1.0:
        # Both correction terms vanish; return R untouched so the identity
        # hat_R(R, 1, ...) == R holds exactly, not just to rounding.
        return float(R)
    radicand = alpha * R ** 2 + alpha * (alpha - 1.0) * beta ** 2 / 4.0 \
        - (alpha - 1.0) * n / 4.0
    if radicand < 0.0:
        if radicand > -1e-12:
            radicand = 0.0
        else:
            raise InstanceError(
                f"scaled radius undefined: R={R}, alpha={alpha}, "
                f"beta={beta}, n={n} give hat_R^2 = {radicand:.6g} < 0"
            )
    return float(np.sqrt(radicand))


def _cover_rows(inst: SubsetSumInstance, rho: float, beta: float,
                alpha: float, R: float) -> Polytope:
    cover = build_disk_cover(inst, rho, beta, alpha)
    pieces = h_minus_f_pieces(cover.all_balls, cover.C_query)
    return polytope_family(pieces, R)


def scaled_polytope_equivalence(inst: SubsetSumInstance, rho: float,
                                beta: float, alpha: float, R: float) -> float:
    """Max coefficient residual between alpha x (unscaled rows) and scaled rows.

    The scaled cover's polytope family at hat_R(R) is row-by-row a positive
    multiple (alpha) of the unscaled family at R; the residual is zero up
    to rounding.
    """
    base = _cover_rows(inst, rho, beta, 1.0, R)
    scaled = _cover_rows(inst, rho, beta, alpha,
                         hat_R(R, alpha, beta, inst.n))
    res_A = float(np.abs(alpha * base.A - scaled.A).max())
    res_b = float(np.abs(alpha * base.b - scaled.b).max())
    return max(res_A, res_b)


def cover_parameters(inst: SubsetSumInstance, rho: Optional[float] = None,
                     beta: Optional[float] = None) -> tuple[float, float, float]:
    """Resolved (rho, beta, rho_bar) satisfying rho_bar < beta/2 < rho.

    Defaults: rho = 2 max(rho_bar, rho needed for a 1/(8n) margin), beta =
    rho, both bumped by 5% steps until the strict chain holds; an explicit
    beta that cannot be bracketed raises.
    """
    rho_bar = estimate_rho_bar(inst)
    beta_defaulted = beta is None
    if rho is None:
        rho = 2.0 * rho_for_delta(inst, 1.0 / (8.0 * inst.n))
    if beta_defaulted:
        beta = rho
    guard = 0
    while not (rho_bar < beta / 2.0 < rho) and guard < 200:
        guard += 1
        rho *= 1.05
        if beta_defaulted:
            beta = rho
    if not (rho_bar < beta / 2.0 < rho):
        raise InstanceError(
            f"cannot satisfy rho_bar < beta/2 < rho with rho_bar={rho_bar:.6g}, "
            f"beta={beta:.6g}, rho={rho:.6g}")
    return float(rho), float(beta), float(rho_bar)


def round_to_vertex(x) -> tuple[np.ndarray, float]:
    """Nearest binary vertex, ties to 1; residual is the sup-norm gap."""
    x = np.asarray(x, dtype=float).ravel()
    binary = np.where(x >= 0.5, 1.0, 0.0)
    return binary, float(np.abs(x - binary).max())


def _face_corner_candidates(pieces, P: Polytope, C: np.ndarray, R_lo: float,
                            cfg: FrameworkConfig) -> list:
    """Corner candidates from the violated faces of P_{R_lo^2} vs P.

    The touching set can be a flat face (the s-piece is constant along the
    zero-sum hyperplane), so the plain argmax may land far from any corner.
    For each violated row, pin that row's optimal face with an extra
    constraint and push tangentially away from the query point: on the
    face, distance from C grows toward the corner.
    """
    inner = polytope_family(pieces, R_lo)
    out = []
    for idx in range(P.nrows):
        a = P.A[idx]
        res = lp_max(a, inner)
        if res.status != "optimal":
            continue
        if res.optimal_value <= -P.b[idx] + cfg.tol_membership:
            continue
        v = res.argmax
        out.append(v)
        w = (v - C) - a * (float(np.dot(a, v - C)) / float(np.dot(a, a)))
        nw = float(np.linalg.norm(w))
        if nw <= 1e-9:
            continue
        slack = 1e-9 * (1.0 + abs(res.optimal_value))
        pinned = Polytope(np.vstack([inner.A, -a]),
                          np.append(inner.b, res.optimal_value - slack))
        res2 = lp_max(w / nw, pinned)
        if res2.status == "optimal":
            out.append(res2.argmax)
    return out


def _slab_vertex_candidates(inst: SubsetSumInstance, P: Polytope,
                            C: np.ndarray, extra_dirs=()) -> list:
    """Vertices of P pinned to the zero-sum hyperplane, via a few LPs.

    Any basic solution of {0 <= x <= 1, S.x = 0} has at most one fractional
    coordinate, so LP vertices under assorted objectives are one flip away
    from binary; solution corners are among these vertices when they exist.
    Returns both the raw vertices and their single-coordinate flip variants.
    """
    n = inst.n
    slab = Polytope(np.vstack([P.A, -inst.S[None, :]]), np.append(P.b, 0.0))
    objectives = [np.ones(n), C - 0.5]
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        objectives.extend([e, -e])
    objectives.extend(extra_dirs)
    # Sign vectors drive the LP into binary-heavy vertices; the seed is
    # fixed so candidate generation is deterministic for a given instance.
    gen = np.random.default_rng(1729)
    objectives.extend(gen.choice([-1.0, 1.0], size=(4 * n, n)))
    objectives.extend(gen.standard_normal((4 * n, n)))
    out = []
    seen = set()
    for c in objectives:
        res = lp_max(np.asarray(c, dtype=float), slab)
        if res.status != "optimal":
            continue
        v = res.argmax
        frac = np.nonzero(np.abs(v - np.round(v)) > 1e-9)[0]
        variants = [v]
        if frac.size == 1:
            for bit in (0.0, 1.0):
                u = np.round(v)
                u[frac[0]] = bit
                variants.append(u)
        for u in variants:
            key = tuple(np.round(u * 2).astype(int))
            if key not in seen:
                seen.add(key)
                out.append(u)
    return out


def _verify_subset(inst: SubsetSumInstance, binary: np.ndarray,
                   ) -> tuple[bool, float]:
    """Exact (integers) or tolerance (reals) zero-sum verification."""
    if not np.any(binary > 0.5):
        return False, 0.0
    if inst.is_integral:
        total = int(sum(int(round(s)) for s, b in zip(inst.S, binary) if b > 0.5))
        return total == 0, float(abs(total))
    total = float(np.dot(inst.S, binary))
    norm = float(np.linalg.norm(inst.S))
    return abs(total) <= 1e-6 * max(norm, 1.0), abs(total)


def _witness_indices(binary: np.ndarray) -> tuple:
    return tuple(int(i) + 1 for i in np.nonzero(binary > 0.5)[0])


def decide_subset_sum(inst: SubsetSumInstance, cfg: FrameworkConfig,
                      rho: Optional[float] = None,
                      beta: Optional[float] = None,
                      alpha_check: float = 1.5) -> DecisionReport:
    """End-to-end decision: YES / NO / INCONCLUSIVE with certificates.

    Parameter rule: rho = 2 max(rho_bar, rho_delta(1/(8n))), beta = rho,
    bumped until rho_bar < beta/2 < rho holds strictly.  YES requires an
    exactly verified rounded corner; NO requires a certified upper bound
    on the cover maximum strictly below the corner value; everything else
    is INCONCLUSIVE (the reduction is not claimed to cover all instances).
    """
    S = inst.S
    n = inst.n

    zero_entries = np.nonzero(S == 0.0)[0]
    if zero_entries.size:
        idx = int(zero_entries[0]) + 1
        return DecisionReport(
            answer="YES", witness_subset=(idx,), branch="Degenerate",
            residual=0.0, diagnostics=f"entry {idx} is zero")

    rho, beta, rho_bar = cover_parameters(inst, rho, beta)

    try:
        cover = build_disk_cover(inst, rho, beta, 1.0)
    except InstanceError as exc:
        return DecisionReport(
            answer="INCONCLUSIVE", witness_subset=None, branch="Degenerate",
            residual=0.0, diagnostics=f"cover construction failed: {exc}")

    balls = cover.all_balls
    C = cover.C_query
    h = build_h_from_balls(balls)
    f = single_quadratic(C)
    corner_value = float(np.dot(C, C))
    margin = max(1e-6 * (1.0 + corner_value),
                 50.0 * cfg.tol_bisection * (1.0 + corner_value))

    diag = [f"rho={rho:.6g}", f"beta={beta:.6g}", f"rho_bar={rho_bar:.6g}",
            f"corner_value={corner_value:.9g}"]

    # The cover always contains the search polytope (rho > rho_bar), and a
    # solution corner would be a point of it; an empty cover certifies NO.
    interior = minimize_unconstrained(h, cfg)
    if interior.value > cfg.tol_membership:
        return DecisionReport(
            answer="NO", witness_subset=None, branch="Degenerate",
            residual=0.0,
            diagnostics="; ".join(diag + [f"cover empty (min h = "
                                          f"{interior.value:.3e})"]))

    pieces = h_minus_f_pieces(balls, C)
    phi = PiecewiseMaxFunction(tuple(pieces))
    w_rep = minimize_with_level(phi, h, 1.0, cfg, probe=True)
    w = w_rep.minimizer
    h_w = float(h(w))

    diag.append(f"h_w={h_w:.3e}")
    if w_rep.non_singleton:
        diag.append("minimizer_set=non-singleton")

    P = build_search_polytope(inst)
    upper = None
    candidate = None
    if abs(interior.value) <= cfg.tol_membership:
        # Numerically a single-point cover: the only candidate is that point.
        branch = "BoundaryBranch"
        candidate = interior.minimizer
        upper = float(f(candidate)) + 10.0 * cfg.tol_membership
        diag.append("cover=singleton")
    elif h_w > cfg.tol_membership:
        branch = "CertificateBranch"
        rep = _bisection(f, h, interior.minimizer,
                         cfg.k_f * float(f(interior.minimizer)),
                         cfg.k_f * default_upper_bound(balls, C), cfg)
        candidate = rep.minimizer
        upper = rep.upper_bound
        diag.append(f"bisection_value={rep.value:.9g}")
    elif abs(h_w) <= cfg.tol_membership:
        branch = "BoundaryBranch"
        candidate = w
        upper = float(f(w)) + 10.0 * cfg.tol_membership
        diag.append(f"boundary_value={float(f(w)):.9g}")
    else:
        branch = "InclusionBranch"
        try:
            rs = r_star_inclusion(pieces, P, cfg)
        except InclusionNeverHolds as exc:
            return DecisionReport(
                answer="INCONCLUSIVE", witness_subset=None, branch=branch,
                residual=0.0,
                diagnostics="; ".join(diag + [f"inclusion failed: {exc}"]))
        candidate = rs.touching_point
        upper = (rs.r_star + cfg.tol_bisection) ** 2
        diag.append(f"r_star={rs.r_star:.9g}")
        extras = _face_corner_candidates(
            pieces, P, C, max(rs.r_star - 2.0 * cfg.tol_bisection, 0.0), cfg)

    residual = 0.0
    candidates = [candidate] if candidate is not None else []
    if branch == "InclusionBranch":
        candidates.extend(extras)
    elif branch == "BoundaryBranch":
        candidates.extend(w_rep.minimizers)
    extra_dirs = [np.asarray(v, dtype=float) - C for v in candidates]
    candidates.extend(_slab_vertex_candidates(inst, P, C, extra_dirs))
    best = None
    seen_bin = []
    for cand in candidates:
        binary, rnd = round_to_vertex(cand)
        key = tuple(binary.astype(int))
        if key not in (tuple(b.astype(int)) for b in seen_bin):
            seen_bin.append(binary)
        ok, res_val = _verify_subset(inst, binary)
        if best is None or ok:
            best = (ok, res_val, rnd, binary)
        if ok:
            break
    if best is not None and not best[0]:
        # Exact local repair: rounded vertices are usually within a couple of
        # coordinate flips of a verifying corner when one exists.
        n = inst.n
        for binary in seen_bin[:16]:
            if best[0]:
                break
            flips = [(i,) for i in range(n)]
            flips += [(i, j) for i in range(n) for j in range(i + 1, n)]
            for flip in flips:
                u = binary.copy()
                for i in flip:
                    u[i] = 1.0 - u[i]
                ok, res_val = _verify_subset(inst, u)
                if ok:
                    best = (ok, res_val, best[2], u)
                    break
    if best is not None:
        ok, residual, rnd, binary = best
        diag.append(f"round_residual={rnd:.3e}")
        if ok:
            try:
                theta = scaled_polytope_equivalence(
                    inst, rho, beta, alpha_check,
                    float(np.sqrt(max(corner_value, 0.0))))
                diag.append(f"theta_residual={theta:.3e}")
            except InstanceError:
                pass
            return DecisionReport(
                answer="YES", witness_subset=_witness_indices(binary),
                branch=branch, residual=residual,
                diagnostics="; ".join(diag))

    if upper is not None and upper < corner_value - margin:
        diag.append(f"upper_bound={upper:.9g}")
        return DecisionReport(
            answer="NO", witness_subset=None, branch=branch,
            residual=residual, diagnostics="; ".join(diag))

    diag.append(f"upper_bound={upper if upper is not None else float('nan'):.9g}")
    return DecisionReport(
        answer="INCONCLUSIVE", witness_subset=None, branch=branch,
        residual=residual, diagnostics="; ".join(diag))
