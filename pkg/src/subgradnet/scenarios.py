"""Built-in named scenarios exercising the convergence dichotomies.

Every scenario is fully determined by constants in this module (plus an
optional initial-state seed override), so repeated runs are bit-exact.
Each returns a ScenarioResult bundling the trace, the convergence
verdict, per-reference optimality reports, and the switch record when
the schedule is state-coupled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diagnostics import classify_convergence, optimality_verdict
from .dynamics import PowerLawStepsize, RunConfig, run, uniform_initial_states
from .errors import ConfigError
from .graphs import (
    StochasticMatrix,
    construct_matrix_with_perron,
    cyclic_perron_family,
    perron_vector,
    validate_weight_matrix,
)
from .objectives import (
    WeightedObjective,
    centralized_solve,
    lasso_ensemble,
    quadratic_ensemble,
    separating_weights,
    EuclideanBall,
)
from .schedules import (
    adversarial_order_schedule,
    fixed_schedule,
    free_switching_schedule,
    periodic_schedule,
    quasi_periodic_schedule,
)

REFERENCE_SOLVE_TOL = 1e-11
REFERENCE_SOLVE_CAP = 2 * 10**6


# --- frozen scenario data ----------------------------------------------------

# 5-agent quadratic centers, kept small so the alpha-driven consensus
# wobble at horizon 2e5 stays well below the 1e-3 acceptance tolerance
Q5_SMALL = np.array([
    [0.25, -0.15], [-0.20, 0.10], [0.10, 0.30], [-0.05, -0.25], [0.20, 0.05],
])
Q5_TIGHT = np.array([
    [0.20, -0.12], [-0.16, 0.08], [0.08, 0.20], [-0.04, -0.20], [0.16, 0.04],
])

# weight-unbalanced but well-mixing: column sums differ strongly from 1
A_UNBALANCED = np.array([
    [0.44, 0.14, 0.14, 0.14, 0.14],
    [0.30, 0.40, 0.10, 0.10, 0.10],
    [0.30, 0.10, 0.40, 0.10, 0.10],
    [0.30, 0.10, 0.10, 0.40, 0.10],
    [0.30, 0.10, 0.10, 0.10, 0.40],
])

# a triple with strongly order-dependent cyclic stationary weights:
# the period-averaged weights differ visibly both from the Perron vector
# of the written product (refuted shortcut) and across block orders
A_TRIPLE = (
    np.array([
        [0.55, 0.35, 0.05, 0.00, 0.05],
        [0.05, 0.60, 0.30, 0.00, 0.05],
        [0.00, 0.05, 0.60, 0.35, 0.00],
        [0.05, 0.00, 0.05, 0.55, 0.35],
        [0.35, 0.05, 0.00, 0.05, 0.55],
    ]),
    np.array([
        [0.30, 0.00, 0.10, 0.60, 0.00],
        [0.60, 0.30, 0.00, 0.10, 0.00],
        [0.10, 0.55, 0.25, 0.00, 0.10],
        [0.00, 0.10, 0.60, 0.30, 0.00],
        [0.00, 0.00, 0.10, 0.60, 0.30],
    ]),
    np.array([
        [0.40, 0.10, 0.00, 0.00, 0.50],
        [0.00, 0.45, 0.05, 0.00, 0.50],
        [0.50, 0.00, 0.40, 0.10, 0.00],
        [0.00, 0.50, 0.00, 0.45, 0.05],
        [0.05, 0.00, 0.50, 0.00, 0.45],
    ]),
)

# centers for the switching-order scenarios; first coordinate is aligned
# with the order-dependence direction of A_TRIPLE so the two block-order
# optima sit clearly apart
Q5_ORDERED = np.array([
    [-0.56, -0.30], [-1.75, 0.20], [1.14, 0.45], [1.01, -0.45], [0.61, 0.10],
])

SHARED_TARGET = np.array([0.80, -0.50, 0.30, -0.25])


def _complete_uniform(n: int) -> StochasticMatrix:
    return validate_weight_matrix(np.full((n, n), 1.0 / n), 1.0 / n)


def _dense_random(n: int, seed: int, floor: float = 0.05) -> StochasticMatrix:
    rng = np.random.Generator(np.random.Philox(key=seed))
    raw = rng.uniform(floor, 1.0, size=(n, n))
    a = raw / raw.sum(axis=1, keepdims=True)
    return validate_weight_matrix(a, float(a.min()))


def _half_chain_graphs(n: int = 20):
    """Two graphs that are only jointly strongly connected, plus a mixer."""
    a1 = np.eye(n)
    for i in range(1, n // 2 + 1):
        a1[i, i] = 0.5
        a1[i, i - 1] = 0.5
    a2 = np.eye(n)
    for i in range(n // 2 + 1, n):
        a2[i, i] = 0.5
        a2[i, i - 1] = 0.5
    a2[0, 0] = 0.5
    a2[0, n - 1] = 0.5
    a3 = np.eye(n) * 0.4
    for i in range(n):
        a3[i, (i + 13) % n] = 0.3
        a3[i, (i + 7) % n] = 0.3
    return (
        validate_weight_matrix(a1, 0.5),
        validate_weight_matrix(a2, 0.5),
        validate_weight_matrix(a3, 0.3),
    )


# --- result plumbing ---------------------------------------------------------

@dataclass
class ReferencePlan:
    """A named weighting whose optimum the final states are tested against."""

    label: str
    weights: np.ndarray
    tol: float
    role: str = "primary"  # "primary" must pass; "foil" is the refuted shortcut


@dataclass
class ScenarioParts:
    ensemble: object
    schedule: object
    initial: np.ndarray
    horizon: int
    stride: int
    window: int
    tol: float
    references: list = field(default_factory=list)
    discrimination_ratio: float = None
    expected: str = None
    config_echo: dict = field(default_factory=dict)
    stepsize: object = None


@dataclass
class ScenarioResult:
    name: str
    summary: str
    trace: object
    verdict: object
    references: list          # (ReferencePlan, optimum point, OptimalityReport)
    record: object            # AdversarialRecord or None
    library: tuple
    notes: list
    expected: str
    config_echo: dict

    @property
    def matches_expectation(self) -> bool:
        return self.expected is None or self.verdict.kind == self.expected


@dataclass(frozen=True)
class Scenario:
    name: str
    summary: str
    builder: object


def _solve_reference(ensemble, weights) -> np.ndarray:
    return centralized_solve(
        WeightedObjective(ensemble, weights),
        tol=REFERENCE_SOLVE_TOL, cap=REFERENCE_SOLVE_CAP,
    ).point


AUDIT_FRACTION = 0.01  # spot-check rate for per-step inequalities


def run_scenario(scenario: Scenario, seed: int = None) -> ScenarioResult:
    """Build and execute one scenario; seed overrides the initial states."""
    parts = scenario.builder(seed)
    stepsize = parts.stepsize or PowerLawStepsize(0.6)
    config = RunConfig(parts.ensemble, parts.schedule, stepsize,
                       parts.initial, parts.horizon, parts.stride,
                       audit_fraction=AUDIT_FRACTION)
    trace = run(config)

    record = getattr(parts.schedule, "record", None)
    notes = []
    if record is not None:
        # oscillation threshold from the construction gap; window sized so
        # each of the three inspection thirds spans several dwells
        osc = record.gap / 3.0 - 1e-6
        window = trace.length // 3
        verdict = classify_convergence(trace, window=window, tol=parts.tol,
                                       osc_threshold=osc)
        notes.append(
            f"dwell switching: {len(record.switch_times)} switches, "
            f"gap {record.gap:.6g}, witness threshold {osc:.6g}"
        )
    else:
        verdict = classify_convergence(trace, window=parts.window, tol=parts.tol)

    solved = []
    for plan in parts.references:
        point = _solve_reference(parts.ensemble, plan.weights)
        solved.append((plan, point, optimality_verdict(trace, point, plan.tol)))

    primary = next((s for s in solved if s[0].role == "primary"), None)
    for plan, point, report in solved:
        if plan.role != "foil" or primary is None:
            continue
        separation = float(np.linalg.norm(point - primary[1]))
        if separation > 10.0 * primary[0].tol:
            ratio = report.distance / max(primary[2].distance, 1e-300)
            notes.append(
                f"references '{primary[0].label}' and '{plan.label}' are "
                f"separated by {separation:.6g}; distance ratio {ratio:.3g}x"
            )
        else:
            notes.append(
                f"references '{primary[0].label}' and '{plan.label}' coincide "
                f"(gap {separation:.6g}); discrimination skipped"
            )

    return ScenarioResult(
        name=scenario.name, summary=scenario.summary, trace=trace,
        verdict=verdict, references=solved, record=record,
        library=tuple(parts.schedule.library), notes=notes,
        expected=parts.expected, config_echo=parts.config_echo,
    )


# --- the builders ------------------------------------------------------------

def _echo(**kwargs) -> dict:
    return {k: v for k, v in kwargs.items() if v is not None}


def _build_prop1_doubly(seed=None):
    ens = quadratic_ensemble(Q5_SMALL, EuclideanBall(np.zeros(2), 1.0))
    a = _complete_uniform(5)
    init_seed = 101 if seed is None else seed
    return ScenarioParts(
        ensemble=ens, schedule=fixed_schedule(a),
        initial=uniform_initial_states(5, 2, init_seed, 0.0, 0.1),
        horizon=200_000, stride=100, window=600, tol=1e-3,
        references=[ReferencePlan("uniform", np.full(5, 0.2), 1e-3)],
        expected="converged",
        config_echo=_echo(scenario="prop1-doubly", n=5, m=2, graph="complete-uniform",
                          stepsize="(k+1)^-0.6", horizon=200_000, stride=100,
                          init_seed=init_seed),
    )


def _build_lemma3_fixed_general(seed=None):
    ens = quadratic_ensemble(Q5_TIGHT, EuclideanBall(np.zeros(2), 1.0))
    a = validate_weight_matrix(A_UNBALANCED, 0.10)
    mu = perron_vector(a).weights
    init_seed = 102 if seed is None else seed
    return ScenarioParts(
        ensemble=ens, schedule=fixed_schedule(a),
        initial=uniform_initial_states(5, 2, init_seed, 0.0, 0.1),
        horizon=200_000, stride=100, window=600, tol=1e-3,
        references=[
            ReferencePlan("stationary-weighted", mu, 1e-3),
            ReferencePlan("uniform", np.full(5, 0.2), 1e-3, role="foil"),
        ],
        discrimination_ratio=10.0,
        expected="converged",
        config_echo=_echo(scenario="lemma3-fixed-general", n=5, m=2,
                          graph="weight-unbalanced fixed", horizon=200_000,
                          stride=100, init_seed=init_seed),
    )


def _thm1_ingredients():
    rng = np.random.Generator(np.random.Philox(key=66))
    q = rng.uniform(-2.0, 2.0, size=(20, 4))
    ens = lasso_ensemble(q, 0.1, 1.0)
    a1 = _complete_uniform(20)
    a2 = construct_matrix_with_perron(np.array([0.5] + [0.5 / 19] * 19))
    return ens, a1, a2


def _build_thm1_adversarial(seed=None):
    ens, a1, a2 = _thm1_ingredients()
    sched = adversarial_order_schedule([a1, a2], (0,), (1,), ens)
    init_seed = 103 if seed is None else seed
    return ScenarioParts(
        ensemble=ens, schedule=sched,
        initial=uniform_initial_states(20, 4, init_seed, 0.0, 0.1),
        horizon=120_000, stride=50, window=600, tol=1e-3,
        expected="oscillating",
        config_echo=_echo(scenario="thm1-adversarial", n=20, m=4, sigma=0.1,
                          q_seed=66, graphs="uniform vs head-tilted",
                          horizon=120_000, stride=50, init_seed=init_seed),
    )


def _build_thm2_shared_min(seed=None):
    ens = lasso_ensemble(np.tile(SHARED_TARGET, (20, 1)), 0.1, 1.0)
    library = [_dense_random(20, 770 + i) for i in range(4)]
    sched = free_switching_schedule(library, seed=9)
    init_seed = 104 if seed is None else seed
    shared = np.zeros(20)
    shared[0] = 1.0
    return ScenarioParts(
        ensemble=ens, schedule=sched,
        initial=uniform_initial_states(20, 4, init_seed, 0.0, 0.1),
        horizon=200_000, stride=100, window=600, tol=1e-3,
        references=[ReferencePlan("shared-minimizer", shared, 1e-3)],
        expected="converged",
        config_echo=_echo(scenario="thm2-shared-min", n=20, m=4, sigma=0.1,
                          graphs="4 seeded dense, free switching", switch_seed=9,
                          horizon=200_000, stride=100, init_seed=init_seed),
    )


def _build_thm2_necessity(seed=None):
    rng = np.random.Generator(np.random.Philox(key=88))
    q = rng.uniform(-1.5, 1.5, size=(5, 2))
    ens = lasso_ensemble(q, 0.1, 2.0)
    sep = separating_weights(ens, tol=1e-3)
    a1 = construct_matrix_with_perron(sep.uniform_weights)
    a2 = construct_matrix_with_perron(sep.tilted_weights)
    sched = adversarial_order_schedule([a1, a2], (0,), (1,), ens)
    init_seed = 105 if seed is None else seed
    return ScenarioParts(
        ensemble=ens, schedule=sched,
        initial=uniform_initial_states(5, 2, init_seed, 0.0, 0.1),
        horizon=120_000, stride=50, window=600, tol=1e-3,
        expected="oscillating",
        config_echo=_echo(scenario="thm2-necessity", n=5, m=2, sigma=0.1,
                          q_seed=88, separation_gap=sep.gap,
                          tilted_agent=sep.tilted_agent, horizon=120_000,
                          stride=50, init_seed=init_seed),
    )


def _triple_library():
    return tuple(validate_weight_matrix(a, 0.05) for a in A_TRIPLE)


def _ordered_ensemble():
    return quadratic_ensemble(Q5_ORDERED, EuclideanBall(np.zeros(2), 2.0))


def _build_thm3_periodic(seed=None):
    lib = _triple_library()
    ens = _ordered_ensemble()
    family = cyclic_perron_family(lib)
    # the refuted shortcut: stationary weights of the single written
    # product A1 A2 A3, i.e. the backward product of the reversed list
    refuted = cyclic_perron_family(list(reversed(lib))).vectors[0].weights
    init_seed = 106 if seed is None else seed
    return ScenarioParts(
        ensemble=ens, schedule=periodic_schedule(list(lib)),
        initial=uniform_initial_states(5, 2, init_seed, -1.0, 1.0),
        horizon=200_000, stride=100, window=600, tol=1e-2,
        references=[
            ReferencePlan("period-averaged", family.mean_weights(), 1e-2),
            ReferencePlan("product-shortcut", refuted, 1e-2, role="foil"),
        ],
        discrimination_ratio=5.0,
        expected="converged",
        config_echo=_echo(scenario="thm3-periodic", n=5, m=2, p=3,
                          horizon=200_000, stride=100, init_seed=init_seed),
    )


def _build_thm4_quasi_p2(seed=None):
    lib = _triple_library()[:2]
    ens = _ordered_ensemble()
    family = cyclic_perron_family(list(lib))
    init_seed = 107 if seed is None else seed
    return ScenarioParts(
        ensemble=ens, schedule=quasi_periodic_schedule(list(lib), seed=13),
        initial=uniform_initial_states(5, 2, init_seed, -1.0, 1.0),
        horizon=300_000, stride=100, window=600, tol=1e-2,
        references=[ReferencePlan("period-averaged", family.mean_weights(), 1e-2)],
        expected="converged",
        config_echo=_echo(scenario="thm4-quasi-p2", n=5, m=2, p=2, order_seed=13,
                          horizon=300_000, stride=100, init_seed=init_seed),
    )


def _build_thm4_quasi_p3(seed=None):
    lib = _triple_library()
    ens = _ordered_ensemble()
    sched = adversarial_order_schedule(list(lib), (0, 1, 2), (0, 2, 1), ens)
    init_seed = 108 if seed is None else seed
    return ScenarioParts(
        ensemble=ens, schedule=sched,
        initial=uniform_initial_states(5, 2, init_seed, -1.0, 1.0),
        horizon=150_000, stride=50, window=600, tol=1e-3,
        expected="oscillating",
        config_echo=_echo(scenario="thm4-quasi-p3", n=5, m=2, p=3,
                          orders="(0,1,2) vs (0,2,1)", horizon=150_000,
                          stride=50, init_seed=init_seed),
    )


def _build_cor1_frequency(seed=None):
    lib = _triple_library()[:2]
    ens = _ordered_ensemble()
    sched = adversarial_order_schedule(list(lib), (0, 0, 1), (0, 1, 1), ens)
    init_seed = 109 if seed is None else seed
    return ScenarioParts(
        ensemble=ens, schedule=sched,
        initial=uniform_initial_states(5, 2, init_seed, -1.0, 1.0),
        horizon=150_000, stride=50, window=600, tol=1e-3,
        expected="oscillating",
        config_echo=_echo(scenario="cor1-frequency", n=5, m=2, p=2, block_length=3,
                          compositions="(0,0,1) vs (0,1,1)", horizon=150_000,
                          stride=50, init_seed=init_seed),
    )


def _build_paper_lasso(seed=None):
    rng = np.random.Generator(np.random.Philox(key=20))
    q = rng.uniform(-2.0, 2.0, size=(20, 4))
    ens = lasso_ensemble(q, 0.1, 1.0)
    lib = _half_chain_graphs(20)
    family = cyclic_perron_family(list(lib))
    init_seed = 110 if seed is None else seed
    return ScenarioParts(
        ensemble=ens, schedule=periodic_schedule(list(lib)),
        initial=uniform_initial_states(20, 4, init_seed, 0.0, 0.1),
        horizon=400_000, stride=100, window=400, tol=1e-2,
        references=[ReferencePlan("period-averaged", family.mean_weights(), 1e-2)],
        expected="converged",
        config_echo=_echo(scenario="paper-lasso", n=20, m=4, sigma=0.1, q_seed=20,
                          graphs="two half-chains (jointly connected) + mixer",
                          horizon=400_000, stride=100, init_seed=init_seed),
    )


SCENARIOS = {
    s.name: s
    for s in (
        Scenario("prop1-doubly",
                 "doubly stochastic fixed graph: converges to the uniform-weighted optimum",
                 _build_prop1_doubly),
        Scenario("lemma3-fixed-general",
                 "fixed weight-unbalanced graph: converges to the stationary-weighted optimum",
                 _build_lemma3_fixed_general),
        Scenario("thm1-adversarial",
                 "state-coupled switching between two weightings: sustained oscillation",
                 _build_thm1_adversarial),
        Scenario("thm2-shared-min",
                 "shared local minimizer: free switching still converges to it",
                 _build_thm2_shared_min),
        Scenario("thm2-necessity",
                 "no shared minimizer: tilted weights yield an oscillating sequence",
                 _build_thm2_necessity),
        Scenario("thm3-periodic",
                 "periodic switching: converges to the period-averaged weighting, "
                 "not the product-matrix shortcut",
                 _build_thm3_periodic),
        Scenario("thm4-quasi-p2",
                 "two graphs, block orders shuffled per block: still converges",
                 _build_thm4_quasi_p2),
        Scenario("thm4-quasi-p3",
                 "three graphs, adversarially alternated block orders: oscillates",
                 _build_thm4_quasi_p3),
        Scenario("cor1-frequency",
                 "frequency-varying blocks over two graphs: oscillates",
                 _build_cor1_frequency),
        Scenario("paper-lasso",
                 "20-agent regularized regression over jointly connected half-chains",
                 _build_paper_lasso),
    )
}


def get_scenario(name: str) -> Scenario:
    if name not in SCENARIOS:
        known = ", ".join(sorted(SCENARIOS))
        raise ConfigError(f"unknown scenario {name!r}; valid names: {known}")
    return SCENARIOS[name]
