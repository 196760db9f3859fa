"""Batch front end: parse -> (rewrite) -> (partition) -> schedule -> simulate.

Exit codes: 0 success, 1 validation error, 2 scheduling failure, 3 I/O error.
Errors go to stderr as one JSON object.
"""

from __future__ import annotations

import json
import sys

import click

from .budgeting import adaptive_schedule
from .graph import Graph, GraphError, load_graph
from .memsim import arena_assign, belady_traffic
from .oracle import brute_force_optimal
from .partition import (
    DEFAULT_MIN_PARTITION_SIZE,
    CombinedResult,
    SchedulerConfig,
    conquer_and_combine,
    partition,
)
from . import report
from .refexec import equivalence_check
from .rewrite import rewrite_all
from .scheduler import (
    NoSolution,
    Solution,
    Timeout,
    evaluate_schedule,
    kahn_schedule,
    schedule_dp,
)

EXIT_VALIDATION = 1
EXIT_SCHEDULING = 2
EXIT_IO = 3


def _fail(code: int, error: str, detail=None):
    sys.stderr.write(json.dumps({"error": error, "detail": detail}) + "\n")
    sys.exit(code)


def _load(path: str) -> Graph:
    try:
        return load_graph(path)
    except OSError as e:
        _fail(EXIT_IO, "cannot read input", str(e))
    except GraphError as e:
        _fail(EXIT_VALIDATION, "invalid graph", str(e))


def _emit(text: str, output: str | None) -> None:
    if output is None:
        click.echo(text, nl=False)
    else:
        try:
            with open(output, "w") as f:
                f.write(text)
        except OSError as e:
            _fail(EXIT_IO, "cannot write output", str(e))


@click.group()
def main():
    """Memory-aware scheduling for irregularly wired dataflow graphs."""


@main.command()
@click.option("--input", "input_", required=True, type=click.Path())
def validate(input_):
    """Parse and validate a graph document."""
    g = _load(input_)
    click.echo(
        report.dumps({"name": g.name, "nodes": len(g.nodes), "edges": len(g.edges)}),
        nl=False,
    )


def _run_pipeline(
    g: Graph,
    algorithm: str,
    adaptive: bool,
    budget_bytes: int | None,
    step_timeout_ms: int | None,
    rewrite: bool,
    do_partition: bool,
    min_partition_size: int,
):
    """Returns (graph, schedule document) after the full pipeline."""
    rewrites = None
    if rewrite:
        g, rewrites = rewrite_all(g)

    limit = step_timeout_ms / 1000.0 if step_timeout_ms is not None else None
    budget_state = None
    partition_sizes = partition_peaks = None

    if algorithm == "kahn":
        order = kahn_schedule(g)
        peak, trace = evaluate_schedule(order, g)
    elif algorithm == "brute":
        try:
            order, peak = brute_force_optimal(g)
        except ValueError as e:
            _fail(EXIT_SCHEDULING, "oracle refused", str(e))
        peak, trace = evaluate_schedule(order, g)
    elif do_partition:
        p = partition(g, min_size=min_partition_size)
        config = SchedulerConfig(
            budget=budget_bytes, step_time_limit=limit, adaptive=adaptive
        )
        if adaptive and limit is None:
            _fail(EXIT_VALIDATION, "adaptive mode requires --step-timeout-ms")
        result = conquer_and_combine(g, p, config)
        if not isinstance(result, CombinedResult):
            _fail(EXIT_SCHEDULING, "scheduling failed", type(result).__name__)
        order = result.order
        peak, trace = evaluate_schedule(order, g)
        partition_sizes = result.partition_sizes
        partition_peaks = result.partition_peaks
    elif adaptive:
        if limit is None:
            _fail(EXIT_VALIDATION, "adaptive mode requires --step-timeout-ms")
        order, peak, budget_state = adaptive_schedule(g, limit)
        peak, trace = evaluate_schedule(order, g)
    else:
        outcome = schedule_dp(g, budget=budget_bytes, step_time_limit=limit)
        if isinstance(outcome, NoSolution):
            _fail(EXIT_SCHEDULING, "no solution within budget", outcome.budget)
        if isinstance(outcome, Timeout):
            _fail(EXIT_SCHEDULING, "step timeout", outcome.step)
        order, peak, trace = outcome.order, outcome.peak_bytes, outcome.trace

    doc = report.schedule_document(
        order,
        peak,
        algorithm,
        trace,
        budget_bytes=budget_bytes,
        budget_state=budget_state,
        rewrites=rewrites,
        partition_sizes=partition_sizes,
        partition_peaks=partition_peaks,
    )
    return g, doc


_common = [
    click.option("--input", "input_", required=True, type=click.Path()),
    click.option("--output", type=click.Path(), default=None),
    click.option(
        "--algorithm",
        type=click.Choice(["dp", "kahn", "brute"]),
        default="dp",
        show_default=True,
    ),
    click.option("--adaptive", is_flag=True),
    click.option("--budget-bytes", type=int, default=None),
    click.option("--step-timeout-ms", type=int, default=None),
    click.option("--rewrite", is_flag=True),
    click.option("--partition", "do_partition", is_flag=True),
    click.option(
        "--min-partition-size",
        type=int,
        default=DEFAULT_MIN_PARTITION_SIZE,
        show_default=True,
    ),
    click.option("--seed", type=int, default=0, show_default=True),
    click.option(
        "--format",
        "fmt",
        type=click.Choice(["json", "csv"]),
        default="json",
        show_default=True,
    ),
]


def _with_common(f):
    for opt in reversed(_common):
        f = opt(f)
    return f


@main.command()
@_with_common
def schedule(
    input_,
    output,
    algorithm,
    adaptive,
    budget_bytes,
    step_timeout_ms,
    rewrite,
    do_partition,
    min_partition_size,
    seed,
    fmt,
):
    """Schedule a graph and emit order, peak bytes, and footprint trace."""
    g = _load(input_)
    _, doc = _run_pipeline(
        g,
        algorithm,
        adaptive,
        budget_bytes,
        step_timeout_ms,
        rewrite,
        do_partition,
        min_partition_size,
    )
    _emit(report.dumps(doc), output)


@main.command()
@_with_common
def trace(
    input_,
    output,
    algorithm,
    adaptive,
    budget_bytes,
    step_timeout_ms,
    rewrite,
    do_partition,
    min_partition_size,
    seed,
    fmt,
):
    """Emit only the footprint trace (json or csv)."""
    g = _load(input_)
    _, doc = _run_pipeline(
        g,
        algorithm,
        adaptive,
        budget_bytes,
        step_timeout_ms,
        rewrite,
        do_partition,
        min_partition_size,
    )
    if fmt == "csv":
        from .scheduler import TraceRow

        rows = [TraceRow(**r) for r in doc["trace"]]
        _emit(report.trace_csv(rows), output)
    else:
        _emit(report.dumps({"trace": doc["trace"]}), output)


@main.command()
@_with_common
def arena(
    input_,
    output,
    algorithm,
    adaptive,
    budget_bytes,
    step_timeout_ms,
    rewrite,
    do_partition,
    min_partition_size,
    seed,
    fmt,
):
    """Assign linear-arena offsets for the scheduled graph."""
    g = _load(input_)
    g, doc = _run_pipeline(
        g,
        algorithm,
        adaptive,
        budget_bytes,
        step_timeout_ms,
        rewrite,
        do_partition,
        min_partition_size,
    )
    assignment = arena_assign(doc["order"], g)
    _emit(report.dumps(report.arena_document(assignment)), output)


@main.command()
@_with_common
@click.option("--capacity-bytes", type=int, default=None)
@click.option("--sweep", default=None, help="lo:hi:step capacity sweep (CSV out)")
def offchip(
    input_,
    output,
    algorithm,
    adaptive,
    budget_bytes,
    step_timeout_ms,
    rewrite,
    do_partition,
    min_partition_size,
    seed,
    fmt,
    capacity_bytes,
    sweep,
):
    """Clairvoyant off-chip traffic for a capacity (or a capacity sweep)."""
    if capacity_bytes is None and sweep is None:
        _fail(EXIT_VALIDATION, "need --capacity-bytes or --sweep")
    g = _load(input_)
    g, doc = _run_pipeline(
        g,
        algorithm,
        adaptive,
        budget_bytes,
        step_timeout_ms,
        rewrite,
        do_partition,
        min_partition_size,
    )
    try:
        if sweep is not None:
            lo, hi, step = (int(x) for x in sweep.split(":"))
            rows = [
                belady_traffic(doc["order"], g, c) for c in range(lo, hi + 1, step)
            ]
            _emit(report.sweep_csv(rows), output)
        else:
            t = belady_traffic(doc["order"], g, capacity_bytes)
            _emit(report.dumps(report.traffic_document(t)), output)
    except GraphError as e:
        _fail(EXIT_VALIDATION, "traffic simulation failed", str(e))


@main.command("verify-rewrite")
@click.option("--input", "input_", required=True, type=click.Path())
@click.option("--output", type=click.Path(), default=None)
@click.option("--trials", type=int, default=10, show_default=True)
@click.option("--tolerance", type=float, default=1e-4, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def verify_rewrite(input_, output, trials, tolerance, seed):
    """Rewrite the graph and check arithmetic equivalence on random inputs."""
    g = _load(input_)
    g2, rewrites = rewrite_all(g)
    diff = equivalence_check(g, g2, trials=trials, seed=seed)
    doc = {
        "max_abs_diff": diff,
        "tolerance": tolerance,
        "passed": diff <= tolerance,
        "rewrites": len(rewrites),
    }
    _emit(report.dumps(doc), output)
    if diff > tolerance:
        sys.exit(EXIT_SCHEDULING)


@main.command("oracle", hidden=True)
@click.option("--input", "input_", required=True, type=click.Path())
@click.option("--output", type=click.Path(), default=None)
def oracle_cmd(input_, output):
    """Brute-force optimum for small graphs (dev tool)."""
    g = _load(input_)
    try:
        order, peak = brute_force_optimal(g)
    except ValueError as e:
        _fail(EXIT_SCHEDULING, "oracle refused", str(e))
    _emit(report.dumps({"order": order, "peak_bytes": peak}), output)


if __name__ == "__main__":
    main()
