"""The distributed projected subgradient iteration and the run engine.

One step, for each agent i:

    v_i = sum_j a_ij x_j          (average over in-neighbors)
    d_i in subdifferential of f_i at v_i
    x_i+ = P_X(v_i - alpha d_i)

The subgradient is evaluated at the mixed point v_i, not at x_i; this
ordering is load-bearing.  Agent states are stacked in an (n, m) array,
row i being agent i's estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagnostics import consensus_gap, network_average
from .errors import (
    BoundViolation,
    DimensionMismatchError,
    InequalityViolation,
    SimulationError,
)
from .graphs import StochasticMatrix
from .objectives import ObjectiveEnsemble

ITERATE_SLACK = 1e-9
DISTURBANCE_SLACK = 1e-12
DEFAULT_STRIDE = 100


@dataclass(frozen=True)
class PowerLawStepsize:
    """alpha_k = (k+1)^(-exponent); non-increasing by construction.

    The decay rule (divergent sum, summable squares) holds exactly for
    exponents in (0.5, 1].
    """

    exponent: float

    def __post_init__(self):
        if self.exponent <= 0:
            raise ValueError("exponent must be positive")

    def value(self, k: int) -> float:
        return float(k + 1) ** -self.exponent

    @property
    def satisfies_decay_rule(self) -> bool:
        return 0.5 < self.exponent <= 1.0

    @property
    def non_increasing(self) -> bool:
        return True


@dataclass(frozen=True)
class ConstantStepsize:
    """Test-only constant stepsize; rejected by the theorem scenarios."""

    c: float

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("stepsize must be positive")

    def value(self, k: int) -> float:
        return self.c

    @property
    def satisfies_decay_rule(self) -> bool:
        return False

    @property
    def non_increasing(self) -> bool:
        return True


def stepsize_value(s, k: int) -> float:
    if k < 0:
        raise ValueError("step index must be nonnegative")
    return s.value(k)


def uniform_initial_states(n: int, m: int, seed: int, low: float, high: float) -> np.ndarray:
    """Seeded entrywise-uniform initial states, shape (n, m)."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    return rng.uniform(low, high, size=(n, m))


def step(states, a: StochasticMatrix, ensemble: ObjectiveEnsemble, alpha: float) -> np.ndarray:
    """One synchronous iteration of all agents from a common snapshot."""
    x = np.asarray(states, dtype=float)
    if x.ndim != 2 or x.shape != (a.n, ensemble.dimension):
        raise DimensionMismatchError(
            f"states shape {x.shape} != ({a.n}, {ensemble.dimension})"
        )
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    v = a.entries @ x
    d = ensemble.subgrads(v)
    return ensemble.constraint.project(v - alpha * d)


@dataclass
class RunConfig:
    """Everything one run needs; `initial` is the (n, m) start state.

    audit_fraction > 0 makes the run re-verify the per-step iterate
    inequality and the disturbance bound on (deterministically chosen)
    that fraction of steps, aborting on a violation.
    """

    ensemble: ObjectiveEnsemble
    schedule: object
    stepsize: object
    initial: np.ndarray
    horizon: int
    stride: int = DEFAULT_STRIDE
    audit_fraction: float = 0.0

    def __post_init__(self):
        self.initial = np.asarray(self.initial, dtype=float)
        n = self.schedule.n
        m = self.ensemble.dimension
        if self.initial.shape != (n, m):
            raise DimensionMismatchError(
                f"initial states shape {self.initial.shape} != ({n}, {m})"
            )
        if self.horizon < 0 or self.stride < 1:
            raise ValueError("need horizon >= 0 and stride >= 1")
        if not 0.0 <= self.audit_fraction <= 1.0:
            raise ValueError("audit_fraction must lie in [0, 1]")


@dataclass
class RunTrace:
    """Per-recorded-step snapshots of one run.

    Rows cover k = 0, stride, 2*stride, ..., plus the final step; the
    graph id is the library index used for the step leaving k (-1 on
    the final row, where no step follows).  h is the max pairwise state
    distance and y the network average, both recomputable from states.
    """

    ks: np.ndarray
    alphas: np.ndarray
    graph_ids: np.ndarray
    states: np.ndarray
    gaps: np.ndarray
    averages: np.ndarray

    @property
    def length(self) -> int:
        return self.ks.size

    @property
    def final_states(self) -> np.ndarray:
        return self.states[-1]

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def m(self) -> int:
        return self.states.shape[2]


class _TraceRecorder:
    def __init__(self):
        self.rows = []

    def add(self, k, alpha, gid, states):
        self.rows.append((k, alpha, gid, states.copy(),
                          consensus_gap(states), network_average(states)))

    def build(self) -> RunTrace:
        ks, alphas, gids, states, gaps, avgs = zip(*self.rows)
        return RunTrace(
            ks=np.array(ks, dtype=int),
            alphas=np.array(alphas, dtype=float),
            graph_ids=np.array(gids, dtype=int),
            states=np.array(states, dtype=float),
            gaps=np.array(gaps, dtype=float),
            averages=np.array(avgs, dtype=float),
        )


def _audited_step(k: int, fraction: float) -> bool:
    # deterministic pseudo-sample of steps (Knuth multiplicative hash)
    return ((k * 2654435761) & 0xFFFFFFFF) < fraction * 2**32


def run(config: RunConfig) -> RunTrace:
    """Drive the iteration for `horizon` steps, recording every stride-th.

    State-coupled schedules are fed the current states each step.  If a
    schedule or ensemble error aborts the run, the partial trace built
    so far is attached to the raised error as `partial_trace`.
    """
    schedule = config.schedule
    stepsize = config.stepsize
    ensemble = config.ensemble
    recorder = _TraceRecorder()
    x = config.initial.copy()
    audit = config.audit_fraction
    audit_anchor = ensemble.constraint.project(np.zeros(ensemble.dimension))
    try:
        for k in range(config.horizon):
            gid = schedule.select(k, x)
            alpha = stepsize.value(k)
            if k % config.stride == 0:
                recorder.add(k, alpha, gid, x)
            mat = schedule.library[gid]
            x_next = step(x, mat, ensemble, alpha)
            if audit and _audited_step(k, audit):
                verify_iterate_inequality(x, x_next, mat, ensemble, alpha, audit_anchor)
                disturbance_bound_check(x, x_next, mat, alpha, ensemble.L)
            x = x_next
    except SimulationError as exc:
        exc.partial_trace = recorder.build() if recorder.rows else None
        raise
    recorder.add(config.horizon, stepsize.value(config.horizon), -1, x)
    return recorder.build()


def verify_iterate_inequality(before, after, a: StochasticMatrix,
                              ensemble: ObjectiveEnsemble, alpha: float, z) -> np.ndarray:
    """Check the per-step iterate inequality at reference point z.

    For each agent i, with v_i the mixed point and L the ensemble bound:

        |x_i(k+1) - z|^2 <= sum_j a_ij |x_j(k) - z|^2 + alpha^2 L^2
                            - 2 alpha (f_i(v_i) - f_i(z))

    up to slack 1e-9.  Returns the per-agent slack (rhs - lhs); raises
    InequalityViolation naming the worst agent when any slack is below
    -1e-9.  `after` must be the step image of `before`.
    """
    x0 = np.asarray(before, dtype=float)
    x1 = np.asarray(after, dtype=float)
    z = np.asarray(z, dtype=float)
    v = a.entries @ x0
    fv = ensemble.values(v)
    fz = ensemble.values(np.broadcast_to(z, x0.shape))
    lhs = np.sum((x1 - z) ** 2, axis=1)
    mixed = a.entries @ np.sum((x0 - z) ** 2, axis=1)
    rhs = mixed + alpha**2 * ensemble.L**2 - 2.0 * alpha * (fv - fz)
    slack = rhs - lhs
    if np.min(slack) < -ITERATE_SLACK:
        worst = int(np.argmin(slack))
        raise InequalityViolation(
            f"iterate inequality failed for agent {worst} by {-slack[worst]:.3g}",
            agent=worst, slack=float(slack[worst]),
        )
    return slack


def disturbance_bound_check(before, after, a: StochasticMatrix,
                            alpha: float, L: float) -> np.ndarray:
    """Check |x_i(k+1) - v_i(k)| <= alpha L + 1e-12 for every agent.

    Returns the per-agent margin (bound - actual); raises BoundViolation
    when any margin is negative, which flags an ensemble whose declared
    L undershoots the true subgradient bound.
    """
    x0 = np.asarray(before, dtype=float)
    x1 = np.asarray(after, dtype=float)
    v = a.entries @ x0
    omega = np.linalg.norm(x1 - v, axis=1)
    margin = alpha * L + DISTURBANCE_SLACK - omega
    if np.min(margin) < 0:
        worst = int(np.argmin(margin))
        raise BoundViolation(
            f"disturbance bound failed for agent {worst} by {-margin[worst]:.3g}",
            agent=worst, excess=float(-margin[worst]),
        )
    return margin
