"""Distributed projected subgradient simulator over switching digraphs."""

from .diagnostics import (
    ConvergenceVerdict,
    OptimalityReport,
    classify_convergence,
    consensus_gap,
    network_average,
    optimality_verdict,
)
from .dynamics import (
    ConstantStepsize,
    PowerLawStepsize,
    RunConfig,
    RunTrace,
    disturbance_bound_check,
    run,
    step,
    stepsize_value,
    uniform_initial_states,
    verify_iterate_inequality,
)
from .graphs import (
    Digraph,
    PerronFamily,
    PerronVector,
    StochasticMatrix,
    TransitionProduct,
    construct_matrix_with_perron,
    contraction_coefficient,
    cyclic_perron_family,
    is_strongly_connected,
    is_ujsc,
    joint_graph,
    perron_vector,
    read_matrix_file,
    transition_product,
    validate_weight_matrix,
    write_matrix_file,
)
from .objectives import (
    Box,
    EuclideanBall,
    ObjectiveEnsemble,
    QuadL1Cost,
    SolveResult,
    WeightedObjective,
    centralized_solve,
    lasso_ensemble,
    project,
    quadratic_ensemble,
    separating_weights,
    subgradient,
    weighted_objective_value,
)
from .reporting import (
    emit_outputs,
    read_trace_csv,
    render_charts,
    render_report,
    trace_integrity_errors,
    write_trace_csv,
)
from .scenarios import (
    SCENARIOS,
    Scenario,
    ScenarioResult,
    get_scenario,
    run_scenario,
)
from .schedules import (
    AdversarialRecord,
    AdversarialSchedule,
    FixedSchedule,
    FreeSwitchingSchedule,
    FrequencySchedule,
    GraphSchedule,
    PeriodicSchedule,
    QuasiPeriodicSchedule,
    adversarial_order_schedule,
    adversarial_schedule,
    fixed_schedule,
    free_switching_schedule,
    frequency_schedule,
    periodic_schedule,
    quasi_periodic_schedule,
)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
