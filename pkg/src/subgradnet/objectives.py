"""Convex costs, constraint sets with exact projections, and solvers.

Built-in cost: quadratic-plus-l1, f(x) = 0.5|x - q|^2 + sigma |x|_1,
which covers both the pure quadratic (sigma = 0) and the regularized
regression ensembles.  Constraint sets are Euclidean balls and boxes,
both with closed-form projections.

The subgradient representative for |.|_1 at a zero coordinate is 0;
this keeps the oracle deterministic and minimizes the vector norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CapReachedError,
    DimensionMismatchError,
    NoSeparationError,
    NotStrictlyConvexError,
    ValidationError,
)

SIMPLEX_TOL = 1e-12
STAGNATION_WINDOW = 500


def _as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatchError(f"expected a vector, got shape {v.shape}")
    return v


def _frozen_array(obj, name, value):
    a = np.asarray(value, dtype=float).copy()
    a.setflags(write=False)
    object.__setattr__(obj, name, a)
    return a


@dataclass(frozen=True)
class EuclideanBall:
    """Closed ball {x : |x - center| <= radius}."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = _frozen_array(self, "center", self.center)
        if c.ndim != 1 or self.radius <= 0:
            raise ValidationError("ball needs a vector center and positive radius")

    @property
    def dimension(self) -> int:
        return self.center.size

    @property
    def compact(self) -> bool:
        return True

    def project(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d = x - self.center
        norm = np.linalg.norm(d, axis=-1, keepdims=True)
        scale = np.where(norm > self.radius, self.radius / np.where(norm == 0, 1.0, norm), 1.0)
        return self.center + d * scale

    def contains(self, x: np.ndarray, tol: float = 1e-9):
        x = np.asarray(x, dtype=float)
        return np.linalg.norm(x - self.center, axis=-1) <= self.radius + tol

    def farthest_distance(self, q: np.ndarray) -> float:
        return float(np.linalg.norm(self.center - q) + self.radius)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box {x : lower <= x <= upper} (componentwise)."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = _frozen_array(self, "lower", self.lower)
        hi = _frozen_array(self, "upper", self.upper)
        if lo.shape != hi.shape or lo.ndim != 1 or np.any(lo > hi):
            raise ValidationError("box needs lower <= upper of equal shape")

    @property
    def dimension(self) -> int:
        return self.lower.size

    @property
    def compact(self) -> bool:
        return bool(np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper)))

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)

    def contains(self, x: np.ndarray, tol: float = 1e-9):
        x = np.asarray(x, dtype=float)
        ok_lo = np.all(x >= self.lower - tol, axis=-1)
        ok_hi = np.all(x <= self.upper + tol, axis=-1)
        return ok_lo & ok_hi

    def farthest_distance(self, q: np.ndarray) -> float:
        return float(np.linalg.norm(np.maximum(np.abs(self.lower - q), np.abs(self.upper - q))))


def project(constraint, x: np.ndarray) -> np.ndarray:
    """Euclidean projection of x onto the set (closed form per kind)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != constraint.dimension:
        raise DimensionMismatchError(
            f"point dimension {x.shape[-1]} != set dimension {constraint.dimension}"
        )
    return constraint.project(x)


@dataclass(frozen=True)
class QuadL1Cost:
    """f(x) = 0.5 |x - q|^2 + sigma |x|_1 with its subgradient oracle."""

    q: np.ndarray
    sigma: float = 0.0

    def __post_init__(self):
        _frozen_array(self, "q", self.q)
        if self.sigma < 0:
            raise ValidationError("sigma must be nonnegative")

    @property
    def dimension(self) -> int:
        return self.q.size

    def value(self, x: np.ndarray) -> float:
        x = _as_vector(x)
        return float(0.5 * np.sum((x - self.q) ** 2) + self.sigma * np.sum(np.abs(x)))

    def subgrad(self, x: np.ndarray) -> np.ndarray:
        x = _as_vector(x)
        return (x - self.q) + self.sigma * np.sign(x)

    def subgradient_bound(self, constraint) -> float:
        return constraint.farthest_distance(self.q) + self.sigma * np.sqrt(self.dimension)


def subgradient(f, x: np.ndarray) -> np.ndarray:
    """One deterministic element of the subdifferential of f at x."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != f.dimension:
        raise DimensionMismatchError(
            f"point dimension {x.shape[-1]} != cost dimension {f.dimension}"
        )
    return f.subgrad(x)


class ObjectiveEnsemble:
    """The n local costs, their shared constraint set, and the bound L.

    L is computed from the set geometry per cost (never trusted from the
    caller); the sampled-bound property tests re-check it.
    """

    def __init__(self, functions, constraint, strictly_convex: bool = None):
        self.functions = tuple(functions)
        if not self.functions:
            raise ValidationError("ensemble needs at least one cost")
        self.constraint = constraint
        m = constraint.dimension
        for f in self.functions:
            if f.dimension != m:
                raise DimensionMismatchError("cost and set dimensions disagree")
        all_quadl1 = all(isinstance(f, QuadL1Cost) for f in self.functions)
        if strictly_convex is None:
            strictly_convex = all_quadl1
        self.strictly_convex = bool(strictly_convex)
        self.L = float(max(f.subgradient_bound(constraint) for f in self.functions))
        if all_quadl1:
            self._Q = np.array([f.q for f in self.functions])
            self._sigmas = np.array([f.sigma for f in self.functions])
        else:
            self._Q = None
            self._sigmas = None

    @property
    def n(self) -> int:
        return len(self.functions)

    @property
    def dimension(self) -> int:
        return self.constraint.dimension

    def values(self, points: np.ndarray) -> np.ndarray:
        """f_i(points[i]) for a stacked (n, m) array of evaluation points."""
        points = np.asarray(points, dtype=float)
        if self._Q is not None:
            quad = 0.5 * np.sum((points - self._Q) ** 2, axis=1)
            return quad + self._sigmas * np.sum(np.abs(points), axis=1)
        return np.array([f.value(x) for f, x in zip(self.functions, points)])

    def subgrads(self, points: np.ndarray) -> np.ndarray:
        """d_i in the subdifferential of f_i at points[i], stacked (n, m)."""
        points = np.asarray(points, dtype=float)
        if self._Q is not None:
            return (points - self._Q) + self._sigmas[:, None] * np.sign(points)
        return np.array([f.subgrad(x) for f, x in zip(self.functions, points)])


def quadratic_ensemble(q, constraint) -> ObjectiveEnsemble:
    """Ensemble of pure quadratics 0.5 |x - q_i|^2 over the given set."""
    q = np.atleast_2d(np.asarray(q, dtype=float))
    return ObjectiveEnsemble([QuadL1Cost(row) for row in q], constraint)


def lasso_ensemble(q, sigma: float, radius: float) -> ObjectiveEnsemble:
    """Regularized regression ensemble over the origin-centered ball.

    f_i(x) = 0.5 |x - q_i|^2 + sigma |x|_1 on {x : |x| <= radius}.
    """
    q = np.atleast_2d(np.asarray(q, dtype=float))
    if sigma < 0 or radius <= 0:
        raise ValidationError("need sigma >= 0 and radius > 0")
    ball = EuclideanBall(np.zeros(q.shape[1]), float(radius))
    return ObjectiveEnsemble([QuadL1Cost(row, sigma) for row in q], ball)


class WeightedObjective:
    """sum_i weights_i f_i over the ensemble's constraint set.

    For all-QuadL1 ensembles the weighted cost collapses exactly to a
    single QuadL1 around the weighted center, so value and subgradient
    are O(m) regardless of n.
    """

    def __init__(self, ensemble: ObjectiveEnsemble, weights):
        self.ensemble = ensemble
        w = np.asarray(weights, dtype=float).copy()
        if w.shape != (ensemble.n,):
            raise DimensionMismatchError(f"weights shape {w.shape} != ({ensemble.n},)")
        if np.any(w < 0) or abs(float(w.sum()) - 1.0) > SIMPLEX_TOL:
            raise ValidationError("weights must be nonnegative and sum to 1")
        w.setflags(write=False)
        self.weights = w
        if ensemble._Q is not None:
            self._center = w @ ensemble._Q
            self._sigma = float(w @ ensemble._sigmas)
            self._offset = float(0.5 * (w @ np.sum(ensemble._Q**2, axis=1)
                                        - np.sum(self._center**2)))
        else:
            self._center = None

    @property
    def constraint(self):
        return self.ensemble.constraint

    def value(self, x: np.ndarray) -> float:
        x = _as_vector(x)
        if self._center is not None:
            return float(0.5 * np.sum((x - self._center) ** 2) + self._offset
                         + self._sigma * np.sum(np.abs(x)))
        return float(sum(w * f.value(x) for w, f in zip(self.weights, self.ensemble.functions)))

    def subgrad(self, x: np.ndarray) -> np.ndarray:
        x = _as_vector(x)
        if self._center is not None:
            return (x - self._center) + self._sigma * np.sign(x)
        return sum(w * f.subgrad(x) for w, f in zip(self.weights, self.ensemble.functions))


def weighted_objective_value(w: WeightedObjective, x) -> float:
    return w.value(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class SolveResult:
    """Best iterate of the centralized solver plus its stopping evidence."""

    point: np.ndarray
    value: float
    iterations: int
    stagnation: float


def centralized_solve(w: WeightedObjective, tol: float = 1e-11, cap: int = 2 * 10**6) -> SolveResult:
    """Single-agent projected subgradient reference solver.

    Runs x <- P_X(x - (k+1)^{-0.6} d) from the projected weighted center,
    tracking the best objective seen, and stops once the best value
    improves by less than `tol` over a 500-iteration window.  Hitting
    `cap` first raises CapReachedError carrying the best iterate.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    constraint = w.constraint
    if not constraint.compact:
        raise ValidationError("centralized solver requires a compact set")
    start = w._center if w._center is not None else np.zeros(constraint.dimension)
    x = constraint.project(np.asarray(start, dtype=float))
    best_x = x
    best_v = w.value(x)
    window_best = best_v
    for k in range(cap):
        x = constraint.project(x - (k + 1) ** -0.6 * w.subgrad(x))
        v = w.value(x)
        if v < best_v:
            best_v = v
            best_x = x
        if (k + 1) % STAGNATION_WINDOW == 0:
            improvement = window_best - best_v
            if improvement < tol:
                return SolveResult(best_x, best_v, k + 1, improvement)
            window_best = best_v
    raise CapReachedError(
        f"no stagnation below {tol} within {cap} iterations",
        best_point=best_x, best_value=best_v, stagnation=window_best - best_v,
    )


@dataclass(frozen=True)
class WeightSeparation:
    """Uniform and tilted weight vectors whose optima are provably apart."""

    uniform_weights: np.ndarray
    tilted_weights: np.ndarray
    uniform_optimum: np.ndarray
    tilted_optimum: np.ndarray
    gap: float
    tilted_agent: int


def separating_weights(
    ensemble: ObjectiveEnsemble,
    tol: float = 1e-3,
    solve_tol: float = 1e-11,
    solve_cap: int = 2 * 10**6,
) -> WeightSeparation:
    """Find two positive weight vectors with well-separated optima.

    The first vector is uniform.  The second over-weights the agent
    whose individual optimum lies farthest from the uniform optimum,
    doubling that agent's weight (renormalized) until the two weighted
    optima differ by more than 10*tol.  Raises NoSeparationError when
    every individual optimum agrees with the uniform one to tol (the
    shared-minimizer case, where no such pair exists) or when no finite
    tilting reaches the 10*tol margin.
    """
    if not ensemble.strictly_convex:
        raise NotStrictlyConvexError("weight separation needs singleton optima")
    n = ensemble.n
    uniform = np.full(n, 1.0 / n)
    x_uniform = centralized_solve(
        WeightedObjective(ensemble, uniform), tol=solve_tol, cap=solve_cap
    ).point

    disagreement = np.empty(n)
    for i in range(n):
        indicator = np.zeros(n)
        indicator[i] = 1.0
        x_i = centralized_solve(
            WeightedObjective(ensemble, indicator), tol=solve_tol, cap=solve_cap
        ).point
        disagreement[i] = np.linalg.norm(x_i - x_uniform)
    i0 = int(np.argmax(disagreement))
    if disagreement[i0] <= tol:
        raise NoSeparationError(
            f"all individual optima match the uniform optimum to {tol}"
        )

    scale = 2.0
    while scale <= 2.0**24:
        tilted = np.ones(n)
        tilted[i0] = scale
        tilted /= tilted.sum()
        x_tilted = centralized_solve(
            WeightedObjective(ensemble, tilted), tol=solve_tol, cap=solve_cap
        ).point
        gap = float(np.linalg.norm(x_tilted - x_uniform))
        if gap > 10.0 * tol:
            return WeightSeparation(uniform, tilted, x_uniform, x_tilted, gap, i0)
        scale *= 2.0
    raise NoSeparationError(
        f"no tilting of agent {i0} separated the optima beyond {10 * tol}"
    )
