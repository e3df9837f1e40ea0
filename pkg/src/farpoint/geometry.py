"""Core geometric representations: balls, max-of-quadratic functions, polytopes.

Everything downstream works with three objects built here:

* ``h`` for a list of balls, ``h(x) = max_k ||x - C_k||^2 - r_k^2``, whose
  zero sublevel set is exactly the ball intersection;
* the surrogate ``g(x) = max{R_term - f(x), 0} + h(x)``, expanded into a
  single max of affine and quadratic pieces (exact when k_f = k_h = 1);
* the affine pieces of ``h - f`` and the polytope family
  ``{x | (h - f)(x) <= -R^2}`` they induce.

All types are immutable after construction and all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels


class InstanceError(ValueError):
    """Raised when inputs are structurally invalid (dimensions, emptiness)."""


def _as_vector(x, name: str = "vector") -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise InstanceError(f"{name} must be one-dimensional, got shape {v.shape}")
    return v


@dataclass(frozen=True)
class Ball:
    """Closed ball with the given center and nonnegative radius."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vector(self.center, "center"))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius < 0:
            raise InstanceError(f"radius must be nonnegative, got {self.radius}")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def contains(self, x, tol: float = 0.0) -> bool:
        x = _as_vector(x)
        return float(np.dot(x - self.center, x - self.center)) <= self.radius**2 + tol


@dataclass(frozen=True)
class QuadraticPiece:
    """One piece ``quad_coeff * ||x||^2 + linear . x + constant``.

    quad_coeff is restricted to {0, 1}: every function handled here is a max
    of unit-curvature quadratics and affine pieces (the cross terms cancel
    exactly in the constructions below).
    """

    quad_coeff: float
    linear: np.ndarray
    constant: float

    def __post_init__(self):
        object.__setattr__(self, "quad_coeff", float(self.quad_coeff))
        object.__setattr__(self, "linear", _as_vector(self.linear, "linear"))
        object.__setattr__(self, "constant", float(self.constant))
        if self.quad_coeff not in (0.0, 1.0):
            raise InstanceError(
                f"quad_coeff must be 0 or 1, got {self.quad_coeff}"
            )

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    def __call__(self, x) -> float:
        x = _as_vector(x)
        v = float(np.dot(self.linear, x)) + self.constant
        if self.quad_coeff:
            v += float(np.dot(x, x))
        return v


@dataclass(frozen=True)
class PiecewiseMaxFunction:
    """Pointwise maximum of a nonempty list of quadratic-or-affine pieces."""

    pieces: tuple

    def __post_init__(self):
        ps = tuple(self.pieces)
        if not ps:
            raise InstanceError("PiecewiseMaxFunction needs at least one piece")
        dim = ps[0].dim
        for p in ps:
            if p.dim != dim:
                raise InstanceError(
                    f"piece dimensions disagree: {p.dim} != {dim}"
                )
        object.__setattr__(self, "pieces", ps)

    @property
    def dim(self) -> int:
        return self.pieces[0].dim

    @property
    def is_affine(self) -> bool:
        return all(p.quad_coeff == 0.0 for p in self.pieces)

    def _augmented_rows(self):
        # Treat ||x||^2 as one extra input feature so that a single affine
        # max over [x, ||x||^2] evaluates the whole function.
        L = np.array([np.append(p.linear, p.quad_coeff) for p in self.pieces])
        c = np.array([p.constant for p in self.pieces])
        return np.ascontiguousarray(L), np.ascontiguousarray(c)

    def __call__(self, x) -> float:
        return eval_piecewise(self, x)[0]

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        """Values at each row of X, via the batched kernel."""
        X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=float)))
        if X.shape[1] != self.dim:
            raise InstanceError(
                f"points have dimension {X.shape[1]}, pieces have {self.dim}"
            )
        sq = np.einsum("ij,ij->i", X, X)
        Xa = np.ascontiguousarray(np.column_stack([X, sq]))
        L, c = self._augmented_rows()
        vals, _ = _kernels.batch_affine_max(L, c, Xa)
        return vals


@dataclass(frozen=True)
class Polytope:
    """Inequality system {x | A.x + b <= 0}."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = _as_vector(self.b, "b")
        if A.shape[0] != b.shape[0]:
            raise InstanceError(
                f"A has {A.shape[0]} rows but b has length {b.shape[0]}"
            )
        object.__setattr__(self, "A", np.ascontiguousarray(A))
        object.__setattr__(self, "b", np.ascontiguousarray(b))

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def nrows(self) -> int:
        return self.A.shape[0]

    def contains(self, x, tol: float = 0.0) -> bool:
        x = _as_vector(x)
        return bool(np.all(self.A @ x + self.b <= tol))

    def contains_batch(self, X: np.ndarray, tol: float = 0.0) -> np.ndarray:
        X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=float)))
        vals, _ = _kernels.batch_affine_max(self.A, self.b, X)
        return vals <= tol


@dataclass(frozen=True)
class FrameworkConfig:
    """Scaling constants and tolerances shared by the drivers.

    k_f and k_h scale the objective and constraint terms of the surrogate;
    only k_f = k_h = 1 admits exact quadratic cancellation and is the
    supported regime for g-construction.
    """

    k_f: float = 1.0
    k_h: float = 1.0
    tol_bisection: float = 1e-7
    tol_solver: float = 1e-8
    tol_membership: float = 1e-7
    max_iterations: int = 400
    restarts: int = 6

    def __post_init__(self):
        for name in ("k_f", "k_h", "tol_bisection", "tol_solver", "tol_membership"):
            if getattr(self, name) <= 0:
                raise InstanceError(f"{name} must be strictly positive")
        if self.max_iterations <= 0 or self.restarts <= 0:
            raise InstanceError("max_iterations and restarts must be positive")


def eval_piecewise(pm: PiecewiseMaxFunction, x) -> tuple[float, int]:
    """Value of the max and the first piece index attaining it."""
    x = _as_vector(x)
    if x.shape[0] != pm.dim:
        raise InstanceError(
            f"point has dimension {x.shape[0]}, pieces have {pm.dim}"
        )
    sq = float(np.dot(x, x))
    vals = np.array(
        [p.quad_coeff * sq + float(np.dot(p.linear, x)) + p.constant for p in pm.pieces]
    )
    idx = int(np.argmax(vals))  # argmax returns the first maximal index
    return float(vals[idx]), idx


def subgradient(pm: PiecewiseMaxFunction, x) -> np.ndarray:
    """A subgradient of the convex max: gradient of one active piece."""
    x = _as_vector(x)
    _, idx = eval_piecewise(pm, x)
    p = pm.pieces[idx]
    return 2.0 * p.quad_coeff * x + p.linear


def build_h_from_balls(balls: Sequence[Ball]) -> PiecewiseMaxFunction:
    """h(x) = max_k ||x - C_k||^2 - r_k^2; {h <= 0} is the ball intersection."""
    balls = list(balls)
    if not balls:
        raise InstanceError("need at least one ball")
    dim = balls[0].dim
    pieces = []
    for ball in balls:
        if ball.dim != dim:
            raise InstanceError(f"ball dimensions disagree: {ball.dim} != {dim}")
        c = ball.center
        pieces.append(
            QuadraticPiece(1.0, -2.0 * c, float(np.dot(c, c)) - ball.radius**2)
        )
    return PiecewiseMaxFunction(tuple(pieces))


def single_quadratic(center) -> PiecewiseMaxFunction:
    """f(x) = ||x - center||^2 as a one-piece function."""
    c = _as_vector(center, "center")
    return PiecewiseMaxFunction(
        (QuadraticPiece(1.0, -2.0 * c, float(np.dot(c, c))),)
    )


def build_g(
    f: PiecewiseMaxFunction,
    h: PiecewiseMaxFunction,
    R_term: float,
    cfg: FrameworkConfig,
) -> PiecewiseMaxFunction:
    """Surrogate g(x) = max{R_term - k_f f(x), 0} + k_h h(x), as one max.

    Since max{a, 0} + b = max{a + b, b}, g is the max of (i) each h piece
    combined with R_term - f (affine: the quadratic terms cancel) and (ii)
    the h pieces themselves.  Requires k_f = k_h = 1 for exact cancellation.
    """
    if cfg.k_f != 1.0 or cfg.k_h != 1.0:
        raise InstanceError(
            "g-construction supports only k_f = k_h = 1 "
            f"(got k_f={cfg.k_f}, k_h={cfg.k_h})"
        )
    if len(f.pieces) != 1 or f.pieces[0].quad_coeff not in (0.0, 1.0):
        raise InstanceError("f must be a single piece with unit or no curvature")
    if f.dim != h.dim:
        raise InstanceError(f"f has dimension {f.dim}, h has {h.dim}")
    fp = f.pieces[0]
    pieces = []
    for hp in h.pieces:
        if hp.quad_coeff != 1.0:
            raise InstanceError(
                "h pieces must be quadratic for the combination to stay convex"
            )
        pieces.append(
            QuadraticPiece(
                hp.quad_coeff - fp.quad_coeff,
                hp.linear - fp.linear,
                R_term + hp.constant - fp.constant,
            )
        )
    pieces.extend(h.pieces)
    return PiecewiseMaxFunction(tuple(pieces))


def h_minus_f_pieces(balls: Sequence[Ball], C) -> list[QuadraticPiece]:
    """Affine pieces of h(x) - ||x - C||^2: the quadratic terms cancel."""
    C = _as_vector(C, "C")
    balls = list(balls)
    if not balls:
        raise InstanceError("need at least one ball")
    csq = float(np.dot(C, C))
    pieces = []
    for ball in balls:
        if ball.dim != C.shape[0]:
            raise InstanceError(
                f"ball dimension {ball.dim} does not match C dimension {C.shape[0]}"
            )
        ck = ball.center
        pieces.append(
            QuadraticPiece(
                0.0,
                -2.0 * (ck - C),
                float(np.dot(ck, ck)) - csq - ball.radius**2,
            )
        )
    return pieces


def polytope_family(pieces: Sequence[QuadraticPiece], R: float) -> Polytope:
    """Polytope {x | (h-f)(x) <= -R^2} from the affine pieces of h-f.

    Each piece (0, a, c) contributes the row a.x + c + R^2 <= 0, so
    membership is exactly max_k(a_k.x + c_k) <= -R^2.
    """
    if R < 0:
        raise InstanceError(f"R must be nonnegative, got {R}")
    pieces = list(pieces)
    if not pieces:
        raise InstanceError("need at least one piece")
    for p in pieces:
        if p.quad_coeff != 0.0:
            raise InstanceError("polytope_family requires affine pieces only")
    A = np.array([p.linear for p in pieces])
    b = np.array([p.constant + R * R for p in pieces])
    return Polytope(A, b)
