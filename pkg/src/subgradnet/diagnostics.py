"""Trace analysis: consensus gap, averages, and convergence verdicts.

"Not convergent" is operationalized as sustained oscillation of the
network average: its per-coordinate range must exceed a threshold in
three disjoint trailing windows.  Verdicts are three-valued; undecided
is an honest outcome and is never coerced to either side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TraceTooShortError

DEFAULT_WINDOW = 5000
DEFAULT_OSC_THRESHOLD = 1e-2


def consensus_gap(states) -> float:
    """Max pairwise Euclidean distance between agent states."""
    x = np.asarray(states, dtype=float)
    if x.shape[0] == 1:
        return 0.0
    diffs = x[:, None, :] - x[None, :, :]
    return float(np.sqrt((diffs**2).sum(axis=2)).max())


def _diameter(points: np.ndarray) -> float:
    """Max pairwise distance of a point cloud, chunked to bound memory."""
    r = points.shape[0]
    best = 0.0
    chunk = 256
    for lo in range(0, r, chunk):
        diffs = points[lo : lo + chunk, None, :] - points[None, :, :]
        best = max(best, float(np.sqrt((diffs**2).sum(axis=2)).max()))
    return best


def network_average(states) -> np.ndarray:
    """Mean of the agent states."""
    return np.asarray(states, dtype=float).mean(axis=0)


@dataclass(frozen=True)
class ConvergenceVerdict:
    """Outcome of trace classification with the evidence that produced it.

    kind is 'converged', 'oscillating' or 'undecided'.  For converged
    verdicts `limit_point` is the final network average and `final_gap`
    the final consensus gap; for oscillating verdicts `amplitude` is the
    largest per-coordinate range of the average and `witness_windows`
    the recorded-index ranges in which the threshold was exceeded.
    """

    kind: str
    window: int
    tol: float
    osc_threshold: float
    limit_point: np.ndarray = None
    final_gap: float = None
    amplitude: float = None
    witness_windows: tuple = ()

    @property
    def converged(self) -> bool:
        return self.kind == "converged"

    @property
    def oscillating(self) -> bool:
        return self.kind == "oscillating"


def classify_convergence(trace, window: int = DEFAULT_WINDOW, tol: float = 1e-3,
                         osc_threshold: float = DEFAULT_OSC_THRESHOLD) -> ConvergenceVerdict:
    """Three-valued verdict over the trailing 3*window recorded steps.

    Converged: over the last window both the spread of the network
    average (per-coordinate range) and the max consensus gap fall below
    tol.  Oscillating: in each of the three disjoint trailing windows
    the network average sweeps an amplitude above osc_threshold, where
    amplitude is the diameter of the average's point set within the
    window (equal to its range for one coordinate, and never below the
    widest per-coordinate range).  Anything else: undecided.
    """
    if window < 1:
        raise ValueError("window must be positive")
    y = np.asarray(trace.averages, dtype=float)
    h = np.asarray(trace.gaps, dtype=float)
    if y.shape[0] < 3 * window:
        raise TraceTooShortError(
            f"trace has {y.shape[0]} recorded steps, need at least {3 * window}"
        )
    last = y[-window:]
    movement = float((last.max(axis=0) - last.min(axis=0)).max())
    final_gap = float(h[-window:].max())
    if movement < tol and final_gap < tol:
        return ConvergenceVerdict(
            kind="converged", window=window, tol=tol, osc_threshold=osc_threshold,
            limit_point=y[-1].copy(), final_gap=float(h[-1]),
        )

    total = y.shape[0]
    witnesses = []
    amplitudes = []
    for w in range(3):
        hi = total - w * window
        lo = hi - window
        amp = _diameter(y[lo:hi])
        amplitudes.append(amp)
        if amp > osc_threshold:
            witnesses.append((lo, hi))
    if len(witnesses) == 3:
        return ConvergenceVerdict(
            kind="oscillating", window=window, tol=tol, osc_threshold=osc_threshold,
            amplitude=max(amplitudes), witness_windows=tuple(reversed(witnesses)),
        )
    return ConvergenceVerdict(
        kind="undecided", window=window, tol=tol, osc_threshold=osc_threshold,
        amplitude=max(amplitudes), final_gap=float(h[-1]),
    )


@dataclass(frozen=True)
class OptimalityReport:
    """Distance of the final states to a reference optimum."""

    distance: float
    tol: float
    passed: bool
    reference: np.ndarray


def optimality_verdict(trace, reference, tol: float) -> OptimalityReport:
    """Max over agents of |x_i(final) - reference| against tol."""
    ref = np.asarray(reference, dtype=float)
    dist = float(np.linalg.norm(trace.final_states - ref[None, :], axis=1).max())
    return OptimalityReport(distance=dist, tol=float(tol), passed=bool(dist < tol),
                            reference=ref)
