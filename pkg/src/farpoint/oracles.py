"""Independent ground-truth checks: exhaustive search and seeded sampling.

Nothing here shares code with the solvers it checks.  Subset-sum answers
come from full enumeration, farthest-point values from boundary sampling
plus closed-form candidate points, disk-family inclusions from membership
tests on random points, and polytope distances from an alternating
projection that returns a certified upper bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import (Ball, InstanceError, PiecewiseMaxFunction, Polytope,
                       _as_vector)
from .subset_sum import SubsetSumInstance

_MEMBERSHIP_TOL = 1e-9


@dataclass(frozen=True)
class CoaxialDiskFamily:
    """Three balls whose boundary spheres share the equator {e.x = 0, |x| = a}.

    Ball i is centered at offsets[i] * axis with radius sqrt(offsets[i]^2 +
    shared_radius^2), so membership of x in ball i reads
    ||x||^2 <= shared_radius^2 + 2 * offsets[i] * (axis . x).
    Requires offsets[0] > offsets[1] > offsets[2], the first two positive,
    and strictly decreasing radii (i.e. |offsets[2]| < offsets[1]).
    """

    offsets: tuple
    shared_radius: float
    axis: np.ndarray

    def __post_init__(self):
        q = tuple(float(v) for v in self.offsets)
        if len(q) != 3 or not all(np.isfinite(q)):
            raise InstanceError("offsets must be three finite reals")
        a = float(self.shared_radius)
        if not np.isfinite(a) or a <= 0:
            raise InstanceError(f"shared_radius must be positive, got {a}")
        e = _as_vector(self.axis, "axis")
        norm = float(np.linalg.norm(e))
        if norm <= 0:
            raise InstanceError("axis must be nonzero")
        object.__setattr__(self, "offsets", q)
        object.__setattr__(self, "shared_radius", a)
        object.__setattr__(self, "axis", e / norm)
        if not (q[0] > q[1] > q[2]):
            raise InstanceError(f"offsets must decrease strictly, got {q}")
        if q[0] <= 0 or q[1] <= 0:
            raise InstanceError("first two offsets must be positive")
        r = self.radii
        if not (r[0] > r[1] > r[2] >= 0):
            raise InstanceError(
                f"radii must decrease strictly, got {tuple(r)} "
                "(third offset too large in magnitude)")

    @property
    def dim(self) -> int:
        return self.axis.shape[0]

    @property
    def radii(self) -> np.ndarray:
        q = np.asarray(self.offsets)
        return np.sqrt(q * q + self.shared_radius**2)

    def membership(self, X: np.ndarray) -> np.ndarray:
        """Boolean matrix (points, 3): X[j] in ball i, with a small slack."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        sq = np.einsum("ij,ij->i", X, X)
        proj = X @ self.axis
        scale = max(1.0, self.shared_radius**2)
        q = np.asarray(self.offsets)
        lhs = sq[:, None] - 2.0 * proj[:, None] * q[None, :]
        return lhs <= self.shared_radius**2 + _MEMBERSHIP_TOL * scale

    def balls(self) -> list[Ball]:
        r = self.radii
        return [Ball(q * self.axis, float(r[i]))
                for i, q in enumerate(self.offsets)]


def brute_force_subset_sum(inst: SubsetSumInstance) -> tuple[str, list]:
    """Exhaustive answer over all nonempty subsets; n capped at 24.

    Integral instances are summed in exact integer arithmetic; otherwise a
    subset counts when |sum| <= 1e-9 ||S||.  Witness index sets are 1-based.
    """
    n = inst.n
    if n > 24:
        raise InstanceError(f"brute force capped at n = 24, got {n}")
    if inst.is_integral:
        vals = np.round(inst.S).astype(np.int64)
        tol = 0
    else:
        vals = inst.S
        tol = 1e-9 * max(1.0, float(np.linalg.norm(inst.S)))
    witnesses = []
    # Meet in the middle: precompute sums of the low half, scan the high half.
    lo_bits = min(n, 14)
    lo_masks = np.arange(1 << lo_bits)
    lo_sums = np.zeros(1 << lo_bits, dtype=vals.dtype)
    for b in range(lo_bits):
        lo_sums[(lo_masks >> b) & 1 == 1] += vals[b]
    for hi_mask in range(1 << (n - lo_bits)):
        hi_sum = sum(vals[lo_bits + b] for b in range(n - lo_bits)
                     if (hi_mask >> b) & 1)
        total = lo_sums + hi_sum
        hits = np.nonzero(np.abs(total) <= tol)[0]
        for lo_mask in hits:
            mask = int(lo_mask) | (hi_mask << lo_bits)
            if mask == 0:
                continue
            witnesses.append(tuple(b + 1 for b in range(n) if (mask >> b) & 1))
    answer = "YES" if witnesses else "NO"
    return answer, witnesses


def _deterministic_candidates(balls: Sequence[Ball], C: np.ndarray) -> list:
    """Closed-form boundary candidates: antipodes, pair feet, 2-D crossings."""
    out = []
    for b in balls:
        d = b.center - C
        nrm = float(np.linalg.norm(d))
        if nrm > 0:
            out.append(b.center + b.radius * d / nrm)
        else:
            e = np.zeros(b.dim)
            e[0] = 1.0
            out.append(b.center + b.radius * e)
    for bi, bj in itertools.combinations(balls, 2):
        u = bj.center - bi.center
        d = float(np.linalg.norm(u))
        if d <= 0:
            continue
        u = u / d
        t = (d * d + bi.radius**2 - bj.radius**2) / (2.0 * d)
        foot = bi.center + t * u
        out.append(foot)
        h2 = bi.radius**2 - t * t
        if h2 > 0 and bi.dim == 2:
            perp = np.array([-u[1], u[0]])
            h = float(np.sqrt(h2))
            out.extend([foot + h * perp, foot - h * perp])
    return out


def sample_farthest(balls: Sequence[Ball], C, samples: int,
                    seed: int = 0) -> tuple[float, np.ndarray]:
    """Sampled max of ||x - C||^2 over the ball intersection.

    Draws points uniformly on each bounding sphere (normalized Gaussians),
    keeps those inside every ball, and augments with closed-form candidates
    (per-ball antipodes, pairwise intersection feet, and in two dimensions
    the pairwise circle crossing points).  Falls back to rejection sampling
    in the bounding box when no sphere sample is feasible.
    """
    if not balls:
        raise InstanceError("at least one ball required")
    C = _as_vector(C, "query point")
    n = balls[0].dim
    centers = np.array([b.center for b in balls])
    radii = np.array([b.radius for b in balls])
    scale = max(1.0, float(np.max(radii)) ** 2)
    tol = _MEMBERSHIP_TOL * scale

    def feasible_mask(X: np.ndarray) -> np.ndarray:
        ok = np.ones(X.shape[0], dtype=bool)
        for c, r in zip(centers, radii):
            d = X - c
            ok &= np.einsum("ij,ij->i", d, d) <= r * r + tol
        return ok

    best_val = -np.inf
    best_x = None

    cand = np.array([x for x in _deterministic_candidates(balls, C)])
    if cand.size:
        ok = feasible_mask(cand)
        if np.any(ok):
            d = cand[ok] - C
            vals = np.einsum("ij,ij->i", d, d)
            k = int(np.argmax(vals))
            best_val, best_x = float(vals[k]), cand[ok][k]

    rng = np.random.default_rng(seed)
    per_ball = max(1, samples // max(1, len(balls)))
    chunk = 200_000
    for c, r in zip(centers, radii):
        remaining = per_ball
        while remaining > 0:
            m = min(chunk, remaining)
            remaining -= m
            G = rng.standard_normal((m, n))
            G /= np.maximum(np.linalg.norm(G, axis=1, keepdims=True), 1e-300)
            X = c + r * G
            ok = feasible_mask(X)
            if np.any(ok):
                d = X[ok] - C
                vals = np.einsum("ij,ij->i", d, d)
                k = int(np.argmax(vals))
                if vals[k] > best_val:
                    best_val, best_x = float(vals[k]), X[ok][k]

    if best_x is None:
        lo = np.min(centers - radii[:, None], axis=0)
        hi = np.max(centers + radii[:, None], axis=0)
        for _ in range(max(1, samples // chunk) + 1):
            X = rng.uniform(lo, hi, size=(chunk, n))
            ok = feasible_mask(X)
            if np.any(ok):
                d = X[ok] - C
                vals = np.einsum("ij,ij->i", d, d)
                k = int(np.argmax(vals))
                if vals[k] > best_val:
                    best_val, best_x = float(vals[k]), X[ok][k]
        if best_x is None:
            raise InstanceError("no feasible sample found; intersection "
                                "appears empty or lower-dimensional")
    return best_val, best_x


def inclusion_sampler(family: CoaxialDiskFamily, samples: int,
                      seed: int = 0) -> int:
    """Counts sampled violations of the five coaxial-disk inclusions.

    With H = {axis . x >= 0} and G its complement, checks
    H&D2 <= H&D1, G&D1 <= G&D2, H&D3 <= D1&D3, D1&D3 <= D2&D3, D2&D3 <= D2
    on uniform box samples covering all three balls; valid families give 0.
    """
    n = family.dim
    r = family.radii
    q = np.asarray(family.offsets)
    extent = float(np.max(np.abs(q) + r))
    rng = np.random.default_rng(seed)
    violations = 0
    done = 0
    while done < samples:
        m = min(200_000, samples - done)
        done += m
        X = rng.uniform(-extent, extent, size=(m, n))
        member = family.membership(X)
        d1, d2, d3 = member[:, 0], member[:, 1], member[:, 2]
        half = X @ family.axis >= 0.0
        checks = [
            (half & d2, d1),
            (~half & d1, d2),
            (half & d3, d1 & d3),
            (d1 & d3, d2 & d3),
            (d2 & d3, d2),
        ]
        for inside, target in checks:
            violations += int(np.count_nonzero(inside & ~target))
    return violations


def grid_min(pm: PiecewiseMaxFunction, box, step: float,
             ) -> tuple[float, np.ndarray]:
    """Exhaustive grid minimum of a piecewise-max function on a box."""
    lo = _as_vector(box[0], "box lower corner")
    hi = _as_vector(box[1], "box upper corner")
    n = lo.shape[0]
    if n > 3:
        raise InstanceError(f"grid search capped at dimension 3, got {n}")
    if np.any(hi < lo) or step <= 0:
        raise InstanceError("box corners must be ordered and step positive")
    axes = [np.arange(lo[i], hi[i] + step / 2, step) for i in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    X = np.stack([m.ravel() for m in mesh], axis=1)
    vals = pm.evaluate_batch(X)
    k = int(np.argmin(vals))
    return float(vals[k]), X[k]


def polytope_distance_bound(P: Polytope, X: np.ndarray, anchor=None,
                            iterations: int = 60) -> np.ndarray:
    """Certified upper bounds on dist(x, P) for each row of X.

    Runs Dykstra's alternating projection over the half-space rows, then
    polishes any still-infeasible iterate by moving it toward a strictly
    feasible anchor until membership holds, so every reported distance is
    realized by an actual point of P.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = X.copy()
    m = P.nrows
    corrections = np.zeros((m, X.shape[0], X.shape[1]))
    norms2 = np.einsum("ij,ij->i", P.A, P.A)
    for _ in range(iterations):
        for i in range(m):
            Z = Y + corrections[i]
            viol = (Z @ P.A[i] + P.b[i]) / max(norms2[i], 1e-300)
            step = np.maximum(viol, 0.0)[:, None] * P.A[i]
            Y = Z - step
            corrections[i] = step
    feas = P.contains_batch(Y, tol=1e-12)
    if not np.all(feas):
        if anchor is None:
            raise InstanceError("infeasible projections need a strictly "
                                "feasible anchor to certify distances")
        a = _as_vector(anchor, "anchor")
        bad = np.nonzero(~feas)[0]
        for j in bad:
            lo_t, hi_t = 0.0, 1.0
            for _ in range(80):
                mid = 0.5 * (lo_t + hi_t)
                pt = Y[j] + mid * (a - Y[j])
                if P.contains(pt, tol=0.0):
                    hi_t = mid
                else:
                    lo_t = mid
            Y[j] = Y[j] + hi_t * (a - Y[j])
    return np.linalg.norm(Y - X, axis=1)
