"""Exception types shared across the package.

All domain errors derive from :class:`SimulationError` so callers (and
the CLI) can distinguish modelling problems from genuine I/O failures.
"""


class SimulationError(Exception):
    """Base class for all domain-level errors."""


# --- weight-matrix validation -------------------------------------------

class ValidationError(SimulationError):
    """A weight matrix violates the row-stochastic weight rule.

    Carries ``violations``, a list of (kind, row, col, value) tuples
    covering every violated clause, using 0-based indices.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class RowSumError(ValidationError):
    """A row does not sum to 1 within tolerance."""


class NegativeEntryError(ValidationError):
    """An entry is negative."""


class SmallWeightError(ValidationError):
    """A nonzero entry lies strictly below the weight floor eta."""


class MissingSelfLoopError(ValidationError):
    """A diagonal entry lies below eta (self-loop absent or too weak)."""


class MatrixFormatError(SimulationError):
    """A matrix text file is malformed; carries line (and column) info."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


# --- graph / matrix operations ------------------------------------------

class EmptyIntervalError(SimulationError):
    """Joint graph requested over an empty list of graphs."""


class DimensionMismatchError(SimulationError):
    """Operands do not share the required dimensions."""


class NotStronglyConnectedError(SimulationError):
    """An operation requires a strongly connected (joint) graph."""


class NonConvergenceError(SimulationError):
    """An iterative solver failed to reach tolerance within its cap."""


class NonPositiveWeightError(SimulationError):
    """A stationary weight vector has a nonpositive entry."""


# --- schedules ------------------------------------------------------------

class EmptyLibraryError(SimulationError):
    """A schedule was built from an empty graph library."""


class BadPermutationError(SimulationError):
    """A quasi-periodic block override is not a permutation of the library."""


class BadCompositionError(SimulationError):
    """A frequency-varying block composition is malformed."""


class BlockLengthError(SimulationError):
    """Frequency-varying schedules need block length strictly above p."""


class StateCoupledScheduleError(SimulationError):
    """A state-free query was made against a state-coupled schedule."""


class ConcurrentQueryError(SimulationError):
    """A state-coupled schedule was driven out of order (single-consumer)."""


class CoincidentOptimaError(SimulationError):
    """The two phase optima coincide; the dwell construction degenerates."""


class DwellTimeoutError(SimulationError):
    """A dwell phase exceeded its per-phase iteration cap."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


# --- objectives -----------------------------------------------------------

class NotStrictlyConvexError(SimulationError):
    """An operation requires a strictly convex ensemble (singleton optima)."""


class CapReachedError(SimulationError):
    """The centralized solver hit its iteration cap before stagnating.

    Carries the best iterate found, its objective value and the last
    window improvement so callers can still use the result knowingly.
    """

    def __init__(self, message, best_point=None, best_value=None, stagnation=None):
        super().__init__(message)
        self.best_point = best_point
        self.best_value = best_value
        self.stagnation = stagnation


class NoSeparationError(SimulationError):
    """No weight tilting separates the weighted optima (shared minimizer)."""


# --- dynamics / diagnostics ----------------------------------------------

class InequalityViolation(SimulationError):
    """The per-step iterate inequality failed for some agent."""

    def __init__(self, message, agent=None, slack=None):
        super().__init__(message)
        self.agent = agent
        self.slack = slack


class BoundViolation(SimulationError):
    """The per-step disturbance bound failed for some agent."""

    def __init__(self, message, agent=None, excess=None):
        super().__init__(message)
        self.agent = agent
        self.excess = excess


class TraceTooShortError(SimulationError):
    """A trace is too short for the requested analysis window."""


class ConfigError(SimulationError):
    """A scenario configuration is malformed or references missing inputs."""
