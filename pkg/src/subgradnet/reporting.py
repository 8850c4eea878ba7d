"""Trace serialization, run reports, and figure rendering.

The CSV schema is fixed: header ``k,alpha,graph_id,h,y_1..y_m,x_1_1..x_n_m``
with full-precision decimal values (shortest round-trip form), '.' radix,
',' separators and LF line endings, so identical runs produce identical
bytes.  Figures are rendered with matplotlib to SVG files next to the
CSV; they are presentation-only and carry no acceptance weight.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .diagnostics import consensus_gap, network_average
from .dynamics import RunTrace
from .errors import MatrixFormatError
from .graphs import write_matrix_file


def csv_header(n: int, m: int) -> str:
    cols = ["k", "alpha", "graph_id", "h"]
    cols += [f"y_{j + 1}" for j in range(m)]
    cols += [f"x_{i + 1}_{j + 1}" for i in range(n) for j in range(m)]
    return ",".join(cols)


def format_trace_csv(trace: RunTrace) -> str:
    lines = [csv_header(trace.n, trace.m)]
    for r in range(trace.length):
        row = [str(int(trace.ks[r])), repr(float(trace.alphas[r])),
               str(int(trace.graph_ids[r])), repr(float(trace.gaps[r]))]
        row += [repr(float(v)) for v in trace.averages[r]]
        row += [repr(float(v)) for v in trace.states[r].ravel()]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_trace_csv(trace: RunTrace, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_trace_csv(trace))


def read_trace_csv(path) -> RunTrace:
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln]
    if not lines:
        raise MatrixFormatError("empty trace file", line=1)
    header = lines[0].split(",")
    try:
        m = sum(1 for c in header if c.startswith("y_"))
        n = sum(1 for c in header if c.startswith("x_")) // m
    except ZeroDivisionError:
        raise MatrixFormatError(f"unrecognized trace header {lines[0]!r}", line=1)
    rows = [ln.split(",") for ln in lines[1:]]
    expected = 4 + m + n * m
    for i, row in enumerate(rows):
        if len(row) != expected:
            raise MatrixFormatError(
                f"trace row has {len(row)} fields, expected {expected}", line=i + 2
            )
    data = np.array([[float(v) for v in row] for row in rows])
    return RunTrace(
        ks=data[:, 0].astype(int),
        alphas=data[:, 1],
        graph_ids=data[:, 2].astype(int),
        gaps=data[:, 3],
        averages=data[:, 4 : 4 + m],
        states=data[:, 4 + m :].reshape(len(rows), n, m),
    )


def trace_integrity_errors(trace: RunTrace, ensemble=None) -> list:
    """Consistency checks a reader can re-run against the CSV contents."""
    problems = []
    for r in range(trace.length):
        if abs(consensus_gap(trace.states[r]) - trace.gaps[r]) > 1e-12:
            problems.append(f"row {r}: stored h differs from recomputed value")
        if np.abs(network_average(trace.states[r]) - trace.averages[r]).max() > 1e-12:
            problems.append(f"row {r}: stored average differs from recomputed value")
    if ensemble is not None:
        for r in range(trace.length):
            if not np.all(ensemble.constraint.contains(trace.states[r])):
                problems.append(f"row {r}: a recorded state leaves the constraint set")
    return problems


def _fmt_vector(v) -> str:
    return "[" + ", ".join(f"{float(x):.12f}" for x in np.asarray(v)) + "]"


def render_report(result) -> str:
    """Human-readable run report for a ScenarioResult-shaped object."""
    trace = result.trace
    out = []
    out.append(f"scenario: {result.name}")
    out.append(f"summary: {result.summary}")
    out.append("config: " + json.dumps(result.config_echo, sort_keys=True, default=str))
    out.append("")
    v = result.verdict
    out.append(f"verdict: {v.kind}" + ("" if result.expected is None else
                                        f" (expected {result.expected})"))
    out.append(f"  window={v.window} recorded steps, tol={v.tol!r}, "
               f"osc_threshold={v.osc_threshold!r}")
    if v.kind == "converged":
        out.append(f"  limit point: {_fmt_vector(v.limit_point)}")
        out.append(f"  final consensus gap: {v.final_gap!r}")
    elif v.kind == "oscillating":
        out.append(f"  amplitude: {v.amplitude!r}")
        out.append(f"  witness windows (recorded-step ranges): {list(v.witness_windows)}")
    out.append(f"final recorded step: k={int(trace.ks[-1])}, h={float(trace.gaps[-1])!r}")
    out.append(f"final network average: {_fmt_vector(trace.averages[-1])}")
    if result.references:
        out.append("")
        out.append("reference optima:")
        for plan, point, report in result.references:
            status = "pass" if report.passed else "fail"
            out.append(f"  {plan.label} ({plan.role}): distance {report.distance!r} "
                       f"vs tol {plan.tol!r} -> {status}")
            out.append(f"    weights: {_fmt_vector(plan.weights)}")
            out.append(f"    optimum: {_fmt_vector(point)}")
    if result.record is not None:
        rec = result.record
        out.append("")
        out.append(f"switch record: gap={rec.gap!r}, eps={rec.epsilon!r}")
        out.append("  idx  time       dwell      phase  pair_displacement")
        pairs = rec.switch_pairs()
        for i, (t, s, ph) in enumerate(zip(rec.switch_times, rec.dwell_lengths, rec.targets)):
            disp = f"{pairs[i // 2]!r}" if i % 2 == 1 and i // 2 < len(pairs) else ""
            out.append(f"  {i:<4d} {t:<10d} {s:<10d} {ph:<6d} {disp}")
    if result.notes:
        out.append("")
        out.extend(f"note: {note}" for note in result.notes)
    return "\n".join(out) + "\n"


def render_charts(trace: RunTrace, outdir) -> list:
    """Consensus-gap and network-average line charts as SVG files."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(outdir, exist_ok=True)
    paths = []

    fig, ax = plt.subplots(figsize=(7, 4))
    positive = trace.gaps > 0
    if positive.any():
        ax.semilogy(trace.ks[positive], trace.gaps[positive], lw=1.0)
    else:
        ax.plot(trace.ks, trace.gaps, lw=1.0)
    ax.set_xlabel("step k")
    ax.set_ylabel("consensus gap h(k)")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    gap_path = os.path.join(outdir, "consensus_gap.svg")
    fig.savefig(gap_path)
    plt.close(fig)
    paths.append(gap_path)

    fig, ax = plt.subplots(figsize=(7, 4))
    for j in range(trace.m):
        ax.plot(trace.ks, trace.averages[:, j], lw=1.0, label=f"y_{j + 1}")
    ax.set_xlabel("step k")
    ax.set_ylabel("network average y(k)")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    avg_path = os.path.join(outdir, "network_average.svg")
    fig.savefig(avg_path)
    plt.close(fig)
    paths.append(avg_path)
    return paths


def emit_outputs(result, outdir, charts: bool = False) -> dict:
    """Write trace CSV, report, library matrices, and optional charts."""
    os.makedirs(outdir, exist_ok=True)
    written = {}
    trace_path = os.path.join(outdir, "trace.csv")
    write_trace_csv(result.trace, trace_path)
    written["trace"] = trace_path

    matrices_dir = os.path.join(outdir, "matrices")
    os.makedirs(matrices_dir, exist_ok=True)
    for i, mat in enumerate(result.library):
        mpath = os.path.join(matrices_dir, f"graph_{i}.txt")
        write_matrix_file(mpath, mat)
        written[f"matrix_{i}"] = mpath

    report_path = os.path.join(outdir, "report.txt")
    with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_report(result))
    written["report"] = report_path

    if charts:
        for p in render_charts(result.trace, os.path.join(outdir, "charts")):
            written[os.path.basename(p)] = p
    return written
