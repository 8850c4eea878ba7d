"""Graph-sequence generators for the run engine.

State-free kinds (fixed, periodic, quasi-periodic, frequency-varying,
free switching) map a step index to a library matrix and are pure; the
dwell-switching kind is state-coupled and must be driven by exactly one
run loop, which feeds it the current agent states every step.

Seeded draws use numpy's counter-based Philox generator, jumped per
fixed-size block chunk, so any block's draw is a pure function of
(seed, block index) and schedules admit random access.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadCompositionError,
    BadPermutationError,
    BlockLengthError,
    CoincidentOptimaError,
    ConcurrentQueryError,
    DimensionMismatchError,
    DwellTimeoutError,
    EmptyLibraryError,
    NotStrictlyConvexError,
    StateCoupledScheduleError,
)
from .graphs import StochasticMatrix, perron_vector, cyclic_perron_family
from .objectives import ObjectiveEnsemble, WeightedObjective, centralized_solve

COINCIDENT_GAP = 1e-9
DEFAULT_DWELL_CAP = 10**6


def _check_library(library):
    library = tuple(library)
    if not library:
        raise EmptyLibraryError("schedule needs at least one matrix")
    n = library[0].n
    for m in library:
        if m.n != n:
            raise DimensionMismatchError("library matrices must share n")
    return library


_CHUNK = 256


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed).jumped(block))


class _ChunkedDraws:
    """Per-block draws, generated _CHUNK blocks at a time from one jumped
    generator so any block is a pure function of (seed, block index)."""

    def __init__(self, seed: int, draw):
        self.seed = int(seed)
        self.draw = draw  # rng -> one block's draw
        self.cache = (-1, None)

    def at(self, block: int):
        chunk = block // _CHUNK
        cached, draws = self.cache
        if cached != chunk:
            rng = _block_rng(self.seed, chunk)
            draws = [self.draw(rng) for _ in range(_CHUNK)]
            self.cache = (chunk, draws)
        return draws[block % _CHUNK]


class GraphSchedule:
    """Base class: maps step index k to a matrix from a fixed library."""

    kind = "abstract"
    state_dependent = False

    def __init__(self, library):
        self.library = _check_library(library)

    @property
    def n(self) -> int:
        return self.library[0].n

    def index_at(self, k: int) -> int:
        raise NotImplementedError

    def matrix_at(self, k: int) -> StochasticMatrix:
        return self.library[self.index_at(k)]

    def select(self, k: int, states) -> int:
        """Library index for step k; `states` is ignored by state-free kinds."""
        return self.index_at(k)


class FixedSchedule(GraphSchedule):
    kind = "fixed"

    def index_at(self, k: int) -> int:
        return 0


class PeriodicSchedule(GraphSchedule):
    """Cycles through the library in order with period p = len(library)."""

    kind = "periodic"

    def index_at(self, k: int) -> int:
        return k % len(self.library)


class QuasiPeriodicSchedule(GraphSchedule):
    """Each length-p block is a permutation of the library.

    Block orders come from `overrides` (cycled) when given, otherwise
    they are drawn per block from the seeded generator.
    """

    kind = "quasi_periodic"

    def __init__(self, library, seed: int = 0, overrides=None):
        super().__init__(library)
        p = len(self.library)
        if p < 2:
            raise EmptyLibraryError("quasi-periodic schedules need p >= 2")
        self.seed = int(seed)
        self.overrides = None
        if overrides is not None:
            checked = []
            for perm in overrides:
                perm = tuple(int(v) for v in perm)
                if sorted(perm) != list(range(p)):
                    raise BadPermutationError(
                        f"override {perm} is not a permutation of 0..{p - 1}"
                    )
                checked.append(perm)
            if not checked:
                raise BadPermutationError("overrides must contain at least one permutation")
            self.overrides = tuple(checked)
        self._draws = _ChunkedDraws(
            self.seed, lambda rng: tuple(rng.permutation(p).tolist())
        )

    def block_order(self, t: int):
        if self.overrides is not None:
            return self.overrides[t % len(self.overrides)]
        return self._draws.at(t)

    def index_at(self, k: int) -> int:
        p = len(self.library)
        return self.block_order(k // p)[k % p]


class FrequencySchedule(GraphSchedule):
    """Length-D blocks over the library; members may repeat or be absent."""

    kind = "frequency"

    def __init__(self, library, block_length: int, seed: int = 0, compositions=None):
        super().__init__(library)
        p = len(self.library)
        if p < 2:
            raise EmptyLibraryError("frequency-varying schedules need p >= 2")
        if block_length <= p:
            raise BlockLengthError(f"block length {block_length} must exceed p={p}")
        self.block_length = int(block_length)
        self.seed = int(seed)
        self.compositions = None
        if compositions is not None:
            checked = []
            for comp in compositions:
                comp = tuple(int(v) for v in comp)
                if len(comp) != self.block_length:
                    raise BadCompositionError(
                        f"composition {comp} must have length {self.block_length}"
                    )
                if any(not 0 <= v < p for v in comp):
                    raise BadCompositionError(f"composition {comp} indexes outside library")
                checked.append(comp)
            if not checked:
                raise BadCompositionError("compositions must contain at least one block")
            self.compositions = tuple(checked)
        self._draws = _ChunkedDraws(
            self.seed,
            lambda rng: tuple(
                int(v) for v in rng.integers(0, p, size=self.block_length)
            ),
        )

    def block_composition(self, t: int):
        if self.compositions is not None:
            return self.compositions[t % len(self.compositions)]
        return self._draws.at(t)

    def index_at(self, k: int) -> int:
        return self.block_composition(k // self.block_length)[k % self.block_length]


class FreeSwitchingSchedule(GraphSchedule):
    """Draws a library member independently at every step (seeded)."""

    kind = "free"

    def __init__(self, library, seed: int = 0):
        super().__init__(library)
        self.seed = int(seed)
        p = len(self.library)
        self._draws = _ChunkedDraws(self.seed, lambda rng: int(rng.integers(0, p)))

    def index_at(self, k: int) -> int:
        return self._draws.at(k)


@dataclass
class DwellPhase:
    """One leg of a dwell-switching schedule.

    `order` indexes the library and is applied cyclically; `target` is
    the singleton optimum of the weighted problem this leg converges to.
    """

    name: str
    order: tuple
    target: np.ndarray
    weights: np.ndarray


@dataclass
class AdversarialRecord:
    """Switch log of a dwell-switching run.

    switch_times[i] is the step at which dwell i ended (all agents were
    within `gap`/3 of the active target); dwell_lengths[i] its length;
    targets[i] the phase index that was active and phase_targets the two
    optima being alternated between.  switch_states snapshots the full
    agent state at each switch so oscillation witnesses can be recomputed
    exactly, and end_distances[i] records how close the worst agent was
    to the active target when the dwell ended.
    """

    gap: float
    epsilon: float
    phase_targets: tuple = None
    switch_times: list = field(default_factory=list)
    dwell_lengths: list = field(default_factory=list)
    targets: list = field(default_factory=list)
    switch_states: list = field(default_factory=list)
    end_distances: list = field(default_factory=list)

    def switch_pairs(self):
        """Stacked-state displacement norms between consecutive switches.

        Pair j covers switches (2j, 2j+1): the end of a dwell on phase A
        and the end of the following dwell on phase B.
        """
        out = []
        for j in range(0, len(self.switch_states) - 1, 2):
            a = self.switch_states[j]
            b = self.switch_states[j + 1]
            out.append(float(np.linalg.norm(a - b)))
        return out


class AdversarialSchedule(GraphSchedule):
    """State-coupled dwell switching between two phases.

    Holds the current phase until every agent is within eps = gap/3 of
    that phase's target optimum (checked at block boundaries), then
    swaps phases and logs the switch.  Single-consumer: `select` must be
    called with strictly consecutive k by exactly one run loop.
    """

    kind = "adversarial"
    state_dependent = True

    def __init__(self, library, phases, gap: float, dwell_cap: int = DEFAULT_DWELL_CAP):
        super().__init__(library)
        if len(phases) != 2:
            raise ValueError("dwell switching needs exactly two phases")
        self.phases = tuple(phases)
        self.gap = float(gap)
        self.epsilon = self.gap / 3.0
        self.dwell_cap = int(dwell_cap)
        self.record = AdversarialRecord(
            gap=self.gap, epsilon=self.epsilon,
            phase_targets=(phases[0].target.copy(), phases[1].target.copy()),
        )
        self._phase = 0
        self._pos = 0
        self._dwell = 0
        self._next_k = 0

    def index_at(self, k: int) -> int:
        raise StateCoupledScheduleError("adversarial schedules have no state-free index")

    def select(self, k: int, states) -> int:
        if k != self._next_k:
            raise ConcurrentQueryError(
                f"schedule driven out of order: expected k={self._next_k}, got k={k}"
            )
        self._next_k = k + 1
        phase = self.phases[self._phase]
        if self._pos == 0 and self._dwell > 0 and self._within_target(states, phase):
            self._log_switch(k, states)
            self._phase = 1 - self._phase
            self._dwell = 0
            phase = self.phases[self._phase]
        if self._dwell >= self.dwell_cap:
            raise DwellTimeoutError(
                f"phase {phase.name!r} exceeded {self.dwell_cap} steps without "
                f"reaching gap/3 = {self.epsilon:.6g}",
                record=self.record,
            )
        idx = phase.order[self._pos]
        self._pos = (self._pos + 1) % len(phase.order)
        self._dwell += 1
        return idx

    def _within_target(self, states, phase) -> bool:
        dists = np.linalg.norm(np.asarray(states) - phase.target[None, :], axis=1)
        return bool(np.all(dists < self.epsilon))

    def _log_switch(self, k: int, states) -> None:
        rec = self.record
        target = self.phases[self._phase].target
        dists = np.linalg.norm(np.asarray(states) - target[None, :], axis=1)
        rec.switch_times.append(k)
        rec.dwell_lengths.append(self._dwell)
        rec.targets.append(self._phase)
        rec.switch_states.append(np.array(states, dtype=float))
        rec.end_distances.append(float(dists.max()))


def fixed_schedule(a: StochasticMatrix) -> FixedSchedule:
    return FixedSchedule([a])


def periodic_schedule(library) -> PeriodicSchedule:
    return PeriodicSchedule(library)


def quasi_periodic_schedule(library, seed: int = 0, overrides=None) -> QuasiPeriodicSchedule:
    return QuasiPeriodicSchedule(library, seed=seed, overrides=overrides)


def frequency_schedule(library, block_length: int, seed: int = 0, compositions=None):
    return FrequencySchedule(library, block_length, seed=seed, compositions=compositions)


def free_switching_schedule(library, seed: int = 0) -> FreeSwitchingSchedule:
    return FreeSwitchingSchedule(library, seed=seed)


def _phase_for_order(name, library, order, ensemble, solve_tol, solve_cap) -> DwellPhase:
    order = tuple(int(v) for v in order)
    mats = [library[i] for i in order]
    if len(mats) == 1:
        weights = perron_vector(mats[0]).weights
    else:
        weights = cyclic_perron_family(mats).mean_weights()
    target = centralized_solve(
        WeightedObjective(ensemble, weights), tol=solve_tol, cap=solve_cap
    ).point
    return DwellPhase(name=name, order=order, target=target, weights=weights)


def adversarial_order_schedule(
    library,
    order_a,
    order_b,
    ensemble: ObjectiveEnsemble,
    dwell_cap: int = DEFAULT_DWELL_CAP,
    solve_tol: float = 1e-11,
    solve_cap: int = 2 * 10**6,
) -> AdversarialSchedule:
    """Dwell switching between two periodic block orders over one library.

    Each phase repeats its order; its target is the optimum of the
    cost weighted by the mean of the order's cyclic Perron family.
    Degenerates (CoincidentOptimaError) when the two targets coincide.
    """
    library = _check_library(library)
    if not ensemble.strictly_convex:
        raise NotStrictlyConvexError("dwell switching needs singleton optima")
    phase_a = _phase_for_order("A", library, order_a, ensemble, solve_tol, solve_cap)
    phase_b = _phase_for_order("B", library, order_b, ensemble, solve_tol, solve_cap)
    gap = float(np.linalg.norm(phase_a.target - phase_b.target))
    if gap <= COINCIDENT_GAP:
        raise CoincidentOptimaError(
            f"phase optima coincide (gap {gap:.3g}); no oscillation is constructible"
        )
    return AdversarialSchedule(library, (phase_a, phase_b), gap, dwell_cap=dwell_cap)


def adversarial_schedule(
    a1: StochasticMatrix,
    a2: StochasticMatrix,
    ensemble: ObjectiveEnsemble,
    dwell_cap: int = DEFAULT_DWELL_CAP,
    solve_tol: float = 1e-11,
    solve_cap: int = 2 * 10**6,
) -> AdversarialSchedule:
    """State-coupled switching between two fixed graphs.

    Starts on `a1`, holds it until every agent is within gap/3 of the
    stationary-weighted optimum of `a1`, swaps to `a2`, and repeats.
    The returned schedule carries the switch log in `.record`.
    """
    return adversarial_order_schedule(
        [a1, a2], (0,), (1,), ensemble,
        dwell_cap=dwell_cap, solve_tol=solve_tol, solve_cap=solve_cap,
    )
