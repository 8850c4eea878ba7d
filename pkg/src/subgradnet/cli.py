"""Command-line front end: validate, perron, run, scenarios.

Exit codes: 0 success, 1 domain/validation error, 2 I/O error.
"""

from __future__ import annotations

import os
import sys

import click
import numpy as np

from .config import load_config_file, scenario_from_config
from .errors import SimulationError
from .graphs import cyclic_perron_family, perron_vector, read_matrix_file
from .reporting import emit_outputs, write_trace_csv
from .scenarios import SCENARIOS, get_scenario, run_scenario

EXIT_DOMAIN = 1
EXIT_IO = 2


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main():
    """Distributed projected subgradient simulator over switching digraphs."""


@main.command()
@click.argument("matrix_file", type=click.Path())
def validate(matrix_file):
    """Check a matrix file against the weight rule."""
    try:
        a = read_matrix_file(matrix_file)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read {matrix_file}: {exc}")
    except SimulationError as exc:
        _fail(EXIT_DOMAIN, str(exc))
    click.echo(f"OK n={a.n} eta={a.eta!r}")


@main.command()
@click.argument("matrix_files", nargs=-1, required=True, type=click.Path())
@click.option("--cyclic", is_flag=True,
              help="Treat the files as one periodic library and print the "
                   "stationary family of its cyclic products.")
def perron(matrix_files, cyclic):
    """Print stationary weight vectors (12 decimal places)."""
    try:
        mats = [read_matrix_file(p) for p in matrix_files]
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    except SimulationError as exc:
        _fail(EXIT_DOMAIN, str(exc))
    fmt = lambda v: " ".join(f"{x:.12f}" for x in v)
    try:
        if not cyclic:
            for path, a in zip(matrix_files, mats):
                click.echo(f"{path}: {fmt(perron_vector(a).weights)}")
            return
        family = cyclic_perron_family(mats)
        p = family.p
        for l, vec in enumerate(family.vectors):
            click.echo(f"mu^{l + 1}: {fmt(vec.weights)}")
        click.echo(f"sum:  {fmt(family.sum_weights)}")
        # chain identities: mu^{l+1}' = mu^l' B with B the matrix the
        # rotation moved to the end of the cycle
        for l in range(p):
            pushed = mats[p - 1 - l].entries.T @ family.vectors[l].weights
            nxt = family.vectors[(l + 1) % p].weights
            residual = float(np.abs(nxt - pushed).sum())
            click.echo(f"chain residual mu^{(l + 1) % p + 1} vs mu^{l + 1}: {residual:.3e}")
    except SimulationError as exc:
        _fail(EXIT_DOMAIN, str(exc))


@main.command(name="run")
@click.argument("scenario_names", nargs=-1)
@click.option("--config", "config_path", type=click.Path(),
              help="Run from a JSON scenario config instead of a built-in name.")
@click.option("--out", "out_dir", default="out", show_default=True,
              help="Output directory (per-scenario subdirectories when several run).")
@click.option("--charts", is_flag=True, help="Also render SVG charts.")
@click.option("--seed", type=int, default=None,
              help="Override the initial-state seed.")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Run independent scenarios in parallel processes.")
def run_cmd(scenario_names, config_path, out_dir, charts, seed, jobs):
    """Execute built-in scenarios or a config file; write trace + report."""
    if config_path and scenario_names:
        _fail(EXIT_DOMAIN, "give either scenario names or --config, not both")
    if not config_path and not scenario_names:
        _fail(EXIT_DOMAIN, "nothing to run; pass scenario names or --config PATH")

    if config_path:
        try:
            cfg = load_config_file(config_path)
            scenario = scenario_from_config(cfg, base_dir=os.path.dirname(
                os.path.abspath(config_path)))
        except OSError as exc:
            _fail(EXIT_IO, str(exc))
        except SimulationError as exc:
            _fail(EXIT_DOMAIN, str(exc))
        _run_one(scenario.name, out_dir, charts, seed, scenario=scenario)
        return

    try:
        for name in scenario_names:
            get_scenario(name)
    except SimulationError as exc:
        _fail(EXIT_DOMAIN, str(exc))

    if len(scenario_names) == 1:
        _run_one(scenario_names[0], out_dir, charts, seed)
        return

    targets = [(name, os.path.join(out_dir, name)) for name in scenario_names]
    if jobs > 1:
        import concurrent.futures as cf

        with cf.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_one_quiet, name, sub, charts, seed)
                       for name, sub in targets]
            failures = [f.result() for f in futures if f.result()]
        for message in failures:
            click.echo(f"error: {message}", err=True)
        if failures:
            sys.exit(EXIT_DOMAIN)
        for name, sub in targets:
            click.echo(f"{name}: done -> {sub}")
    else:
        for name, sub in targets:
            _run_one(name, sub, charts, seed)


def _run_one_quiet(name, out_dir, charts, seed):
    try:
        result = run_scenario(get_scenario(name), seed=seed)
        emit_outputs(result, out_dir, charts=charts)
        return None
    except Exception as exc:  # crosses a process boundary
        return f"{name}: {exc}"


def _run_one(name, out_dir, charts, seed, scenario=None):
    scenario = scenario or get_scenario(name)
    try:
        result = run_scenario(scenario, seed=seed)
    except SimulationError as exc:
        partial = getattr(exc, "partial_trace", None)
        if partial is not None:
            os.makedirs(out_dir, exist_ok=True)
            partial_path = os.path.join(out_dir, "partial_trace.csv")
            write_trace_csv(partial, partial_path)
            click.echo(f"partial trace preserved at {partial_path}", err=True)
        _fail(EXIT_DOMAIN, str(exc))
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    try:
        written = emit_outputs(result, out_dir, charts=charts)
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    click.echo(f"{result.name}: verdict {result.verdict.kind}"
               + ("" if result.expected is None
                  else f" (expected {result.expected})"))
    for plan, _, report in result.references:
        status = "pass" if report.passed else "fail"
        click.echo(f"  {plan.label}: distance {report.distance:.6g} "
                   f"(tol {plan.tol:g}) {status}")
    for note in result.notes:
        click.echo(f"  note: {note}")
    click.echo(f"outputs: {written['trace']}, {written['report']}")
    if not result.matches_expectation:
        _fail(EXIT_DOMAIN, f"verdict {result.verdict.kind} does not match the "
                           f"scenario's expected outcome {result.expected}")


@main.command()
def scenarios():
    """List the built-in scenarios."""
    width = max(len(name) for name in SCENARIOS)
    for name in sorted(SCENARIOS):
        click.echo(f"{name:<{width}}  {SCENARIOS[name].summary}")


if __name__ == "__main__":
    main()
