"""Row-stochastic weight matrices and the directed graphs they induce.

Provides validation against the weight rule (row sums 1, weight floor
eta, self-loops), strong-connectivity tests, joint graphs over windows,
left-eigenvector (Perron) computation, backward transition products,
the row-overlap contraction coefficient, and the cyclic Perron family
of a periodically applied matrix list.

Nodes are indexed 0..n-1.  An edge (j, i) means node j can send to
node i, matching entry (i, j) of the weight matrix being positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyIntervalError,
    MatrixFormatError,
    MissingSelfLoopError,
    NegativeEntryError,
    NonConvergenceError,
    NonPositiveWeightError,
    NotStronglyConnectedError,
    RowSumError,
    SmallWeightError,
    StateCoupledScheduleError,
    ValidationError,
)

# Fixed tolerances: structural invariants and cross-oracle comparisons.
# Deliberately constants, not parameters, so test results are reproducible.
STRUCT_TOL = 1e-12
CROSS_TOL = 1e-10

PERRON_STEP_TOL = 1e-14
PERRON_MAX_ITER = 10**6


def _as_matrix(entries) -> np.ndarray:
    a = np.asarray(entries, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class StochasticMatrix:
    """An n-by-n row-stochastic weight matrix with weight floor eta.

    Construction validates the full weight rule: rows sum to 1 within
    1e-12, entries are 0 or >= eta, and every diagonal entry is >= eta
    (self-loops present).  Entries are stored dense and read-only.
    """

    entries: np.ndarray
    eta: float

    def __post_init__(self):
        a = _as_matrix(self.entries).copy()
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        if not (0.0 < self.eta < 1.0):
            raise ValidationError(f"eta must lie in (0, 1), got {self.eta}")
        violations = _weight_rule_violations(a, self.eta)
        if violations:
            raise _validation_error(violations)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def digraph(self) -> "Digraph":
        rows, cols = np.nonzero(self.entries)
        return Digraph(self.n, frozenset(zip(cols.tolist(), rows.tolist())))


def _weight_rule_violations(a: np.ndarray, eta: float):
    """Collect every violated weight-rule clause with 0-based indices."""
    out = []
    n = a.shape[0]
    for i in range(n):
        row_sum = float(a[i].sum())
        if abs(row_sum - 1.0) > STRUCT_TOL:
            out.append(("row_sum", i, None, row_sum))
        for j in range(n):
            v = float(a[i, j])
            if v < 0.0:
                out.append(("negative", i, j, v))
            elif 0.0 < v < eta and i != j:
                out.append(("small_weight", i, j, v))
        if a[i, i] < eta:
            out.append(("missing_self_loop", i, i, float(a[i, i])))
    return out


_VIOLATION_CLASSES = {
    "row_sum": RowSumError,
    "negative": NegativeEntryError,
    "small_weight": SmallWeightError,
    "missing_self_loop": MissingSelfLoopError,
}


def _validation_error(violations) -> ValidationError:
    kinds = {v[0] for v in violations}
    cls = _VIOLATION_CLASSES[violations[0][0]] if len(kinds) == 1 else ValidationError
    parts = []
    for kind, i, j, value in violations:
        where = f"row {i}" if j is None else f"row {i}, col {j}"
        parts.append(f"{kind} at {where} (value {value:.6g})")
    return cls("weight rule violated: " + "; ".join(parts), violations)


def validate_weight_matrix(entries, eta: float) -> StochasticMatrix:
    """Validate raw entries against the weight rule and wrap them.

    Raises RowSumError / NegativeEntryError / SmallWeightError /
    MissingSelfLoopError (or the ValidationError base when clauses of
    several kinds fail at once); the error lists every violation.
    """
    return StochasticMatrix(entries, eta)


@dataclass(frozen=True)
class Digraph:
    """A directed graph on nodes 0..n-1; edge (j, i) sends j -> i."""

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset((int(j), int(i)) for j, i in self.edges))
        for j, i in self.edges:
            if not (0 <= j < self.n and 0 <= i < self.n):
                raise DimensionMismatchError(f"edge ({j}, {i}) out of range for n={self.n}")

    def successors(self):
        succ = [[] for _ in range(self.n)]
        for j, i in self.edges:
            succ[j].append(i)
        return succ


def strongly_connected_components(g: Digraph):
    """Tarjan's algorithm, iterative; returns components as lists of nodes."""
    succ = g.successors()
    index = [-1] * g.n
    lowlink = [0] * g.n
    on_stack = [False] * g.n
    stack = []
    components = []
    counter = 0

    for root in range(g.n):
        if index[root] != -1:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] == -1:
                    index[w] = lowlink[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                components.append(comp)
    return components


def is_strongly_connected(g: Digraph) -> bool:
    return len(strongly_connected_components(g)) == 1


def joint_graph(gs) -> Digraph:
    """Union of the edge sets; all graphs must share the node count."""
    gs = list(gs)
    if not gs:
        raise EmptyIntervalError("joint graph over an empty interval")
    n = gs[0].n
    for g in gs:
        if g.n != n:
            raise DimensionMismatchError("joint graph over graphs of different sizes")
    return Digraph(n, frozenset().union(*(g.edges for g in gs)))


def is_ujsc(schedule, window: int, horizon: int) -> bool:
    """Whether every length-`window` slice of the schedule has a strongly
    connected joint graph over [0, horizon).

    Only defined for state-free schedules; a state-coupled schedule has
    no fixed graph sequence to inspect.
    """
    if getattr(schedule, "state_dependent", False):
        raise StateCoupledScheduleError("is_ujsc needs a state-free schedule")
    if window < 1 or horizon < 1:
        raise ValueError("window and horizon must be positive")
    graphs = {}

    def graph_at(k):
        idx = schedule.index_at(k)
        if idx not in graphs:
            graphs[idx] = schedule.library[idx].digraph()
        return graphs[idx]

    for k in range(0, horizon - window + 1):
        union = joint_graph([graph_at(k + t) for t in range(window)])
        if not is_strongly_connected(union):
            return False
    return True


@dataclass(frozen=True)
class PerronVector:
    """Positive stochastic left eigenvector, entries summing to 1."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if w.ndim != 1 or w.size < 1:
            raise DimensionMismatchError("weights must be a nonempty vector")
        if np.any(w <= 0.0):
            raise NonPositiveWeightError("weights must be strictly positive")
        if abs(float(w.sum()) - 1.0) > STRUCT_TOL:
            raise ValidationError(f"weights must sum to 1, got {w.sum()!r}")

    @property
    def n(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class PerronFamily:
    """Perron vectors of the p cyclic products, plus their entrywise sum."""

    vectors: tuple
    sum_weights: np.ndarray

    @property
    def p(self) -> int:
        return len(self.vectors)

    def mean_weights(self) -> np.ndarray:
        return self.sum_weights / self.p


@dataclass(frozen=True)
class TransitionProduct:
    """Backward product of weight matrices over a step span (s, k)."""

    matrix: np.ndarray
    span: tuple

    def __post_init__(self):
        m = _as_matrix(self.matrix).copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        sums = m.sum(axis=1)
        if np.max(np.abs(sums - 1.0)) > STRUCT_TOL:
            raise ValidationError("transition product is not row-stochastic")


def stationary_residual(entries: np.ndarray, weights: np.ndarray) -> float:
    """l1 norm of w'A - w'."""
    return float(np.abs(entries.T @ weights - weights).sum())


def perron_vector(a: StochasticMatrix) -> PerronVector:
    """Perron vector via power iteration on the left action.

    Iterates w <- A'w from the uniform vector, l1-normalizing each step,
    until successive iterates differ by less than 1e-14 in l1 norm.
    Requires the digraph of `a` to be strongly connected; the self-loop
    rule makes the matrix aperiodic, so the iteration converges.
    """
    if not is_strongly_connected(a.digraph()):
        raise NotStronglyConnectedError("matrix graph is not strongly connected")
    return PerronVector(_power_iterate(a.entries))


def _power_iterate(entries: np.ndarray) -> np.ndarray:
    n = entries.shape[0]
    at = entries.T.copy()
    w = np.full(n, 1.0 / n)
    for _ in range(PERRON_MAX_ITER):
        w_next = at @ w
        w_next /= w_next.sum()
        if float(np.abs(w_next - w).sum()) < PERRON_STEP_TOL:
            return w_next
        w = w_next
    raise NonConvergenceError(
        f"power iteration did not reach {PERRON_STEP_TOL} within {PERRON_MAX_ITER} steps"
    )


def construct_matrix_with_perron(mu) -> StochasticMatrix:
    """Build a strongly connected stochastic matrix with stationary vector mu.

    Metropolis-Hastings over the complete graph with uniform proposal:
    off-diagonals a_ij = (1/n) min(1, mu_j / mu_i), diagonal absorbs the
    remainder.  Detailed balance gives mu'A = mu'; all off-diagonals are
    positive, so the graph is strongly connected, and the diagonal stays
    >= 1/n.  Reports eta as the smallest entry of the result.
    """
    w = mu.weights if isinstance(mu, PerronVector) else np.asarray(mu, dtype=float)
    if w.ndim != 1 or w.size < 1:
        raise DimensionMismatchError("mu must be a nonempty vector")
    if np.any(w <= 0.0):
        raise NonPositiveWeightError("mu must be strictly positive")
    if abs(float(w.sum()) - 1.0) > 1e-9:
        raise ValidationError(f"mu must sum to 1, got {w.sum()!r}")
    n = w.size
    if n == 1:
        return StochasticMatrix(np.array([[1.0]]), 0.5)
    ratio = np.minimum(1.0, w[None, :] / w[:, None]) / n
    np.fill_diagonal(ratio, 0.0)
    a = ratio
    np.fill_diagonal(a, 1.0 - a.sum(axis=1))
    eta = float(a[a > 0.0].min())
    out = StochasticMatrix(a, eta)
    if stationary_residual(out.entries, w) > STRUCT_TOL * n:
        raise NonConvergenceError("constructed matrix misses the stationary vector")
    return out


def transition_product(mats, start: int = 0) -> TransitionProduct:
    """Backward product A(k) ... A(s) of an ordered matrix list.

    The first list element is A(s), the last is A(k); later matrices
    multiply on the left.
    """
    mats = list(mats)
    if not mats:
        raise EmptyIntervalError("transition product of an empty list")
    n = mats[0].n
    for m in mats:
        if m.n != n:
            raise DimensionMismatchError("transition product over mixed sizes")
    product = reduce(lambda acc, m: m.entries @ acc, mats[1:], mats[0].entries)
    return TransitionProduct(product, (start, start + len(mats) - 1))


def contraction_coefficient(p) -> float:
    """Row-overlap contraction coefficient tau(P) in [0, 1].

    tau(P) = 1 - min over node pairs (i, j) of sum_s min(p_is, p_js);
    it bounds the shrinkage of the entry spread under averaging.
    """
    m = p.entries if isinstance(p, StochasticMatrix) else _as_matrix(p)
    n = m.shape[0]
    if n == 1:
        return 0.0
    overlap = np.minimum(m[:, None, :], m[None, :, :]).sum(axis=2)
    pairs = overlap[np.triu_indices(n, k=1)]
    return float(min(max(1.0 - pairs.min(), 0.0), 1.0))


def cyclic_perron_family(mats) -> PerronFamily:
    """Perron vectors of the p cyclic rotations of the backward product.

    For the chronological list (A_1, ..., A_p), member l is the Perron
    vector of the backward product of the list rotated to start at a
    phase l-1 steps earlier; the sum of the members does not depend on
    which phase the rotation starts from.  Requires the joint graph of
    the list to be strongly connected, which (self-loops) makes each
    cyclic product strongly connected as well.
    """
    mats = list(mats)
    if not mats:
        raise EmptyIntervalError("cyclic family of an empty list")
    union = joint_graph([m.digraph() for m in mats])
    if not is_strongly_connected(union):
        raise NotStronglyConnectedError("joint graph of the list is not strongly connected")
    p = len(mats)
    vectors = []
    for l in range(p):
        rotated = mats[-l:] + mats[:-l] if l else mats
        product = transition_product(rotated).matrix
        vectors.append(PerronVector(_power_iterate(product)))
    total = np.sum([v.weights for v in vectors], axis=0)
    return PerronFamily(tuple(vectors), total)


# --- plain-text matrix format ----------------------------------------------
#
#   first line:  "n eta"
#   then n lines of n decimal entries separated by single spaces


def parse_matrix_text(text: str) -> StochasticMatrix:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise MatrixFormatError("empty matrix file", line=1)
    head = lines[0].split()
    if len(head) != 2:
        raise MatrixFormatError(f"header must be 'n eta', got {lines[0]!r}", line=1)
    try:
        n = int(head[0])
        eta = float(head[1])
    except ValueError as exc:
        raise MatrixFormatError(f"bad header values: {exc}", line=1) from exc
    if n < 1:
        raise MatrixFormatError(f"node count must be positive, got {n}", line=1)
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != n:
        raise MatrixFormatError(f"expected {n} matrix rows, found {len(body)}", line=len(lines))
    entries = np.empty((n, n))
    for i, ln in enumerate(body):
        parts = ln.split()
        if len(parts) != n:
            raise MatrixFormatError(
                f"row has {len(parts)} entries, expected {n}", line=i + 2
            )
        for j, tok in enumerate(parts):
            try:
                entries[i, j] = float(tok)
            except ValueError as exc:
                raise MatrixFormatError(
                    f"bad entry {tok!r}", line=i + 2, column=j + 1
                ) from exc
    return StochasticMatrix(entries, eta)


def read_matrix_file(path) -> StochasticMatrix:
    with open(path, "r", encoding="ascii") as fh:
        return parse_matrix_text(fh.read())


def format_matrix_text(a: StochasticMatrix) -> str:
    rows = [f"{a.n} {a.eta!r}"]
    rows.extend(" ".join(repr(v) for v in row) for row in a.entries.tolist())
    return "\n".join(rows) + "\n"


def write_matrix_file(path, a: StochasticMatrix) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_matrix_text(a))
