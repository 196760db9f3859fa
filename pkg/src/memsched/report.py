"""Serialization of schedules, traces, and simulator reports."""

from __future__ import annotations

import csv
import io
import json

from .budgeting import BudgetState
from .memsim import ArenaAssignment, TrafficReport
from .rewrite import RewriteMatch
from .scheduler import TraceRow

TRACE_COLUMNS = ["step", "node", "live_after_alloc", "live_after_free", "peak_so_far"]


def schedule_document(
    order: list[int],
    peak_bytes: int,
    algorithm: str,
    trace: list[TraceRow],
    budget_bytes: int | None = None,
    budget_state: BudgetState | None = None,
    rewrites: list[RewriteMatch] | None = None,
    partition_sizes: list[int] | None = None,
    partition_peaks: list[int] | None = None,
) -> dict:
    doc = {
        "order": list(order),
        "peak_bytes": peak_bytes,
        "algorithm": algorithm,
        "trace": [
            {
                "step": r.step,
                "node": r.node,
                "live_after_alloc": r.live_after_alloc,
                "live_after_free": r.live_after_free,
                "peak_so_far": r.peak_so_far,
            }
            for r in trace
        ],
    }
    if budget_bytes is not None:
        doc["budget_bytes"] = budget_bytes
    if budget_state is not None:
        doc["budget_search"] = {
            "tau_max": budget_state.tau_max,
            "iterations": budget_state.iterations,
            "final_tau": budget_state.tau_new,
            "fallback": budget_state.fallback,
        }
    if rewrites is not None:
        doc["rewrites"] = [
            {"kind": m.kind, "concat": m.concat_id, "branches": len(m.branch_inputs)}
            for m in rewrites
        ]
    if partition_sizes is not None:
        doc["partitions"] = [
            {"nodes": n, "peak_bytes": p}
            for n, p in zip(partition_sizes, partition_peaks or [])
        ]
    return doc


def trace_csv(trace: list[TraceRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for r in trace:
        w.writerow(
            [r.step, r.node, r.live_after_alloc, r.live_after_free, r.peak_so_far]
        )
    return buf.getvalue()


def arena_document(a: ArenaAssignment) -> dict:
    return {
        "arena_size": a.arena_size,
        "tensors": [
            {"tensor": str(key), "offset": off, "size": size}
            for key, (off, size) in sorted(a.offsets.items(), key=lambda kv: str(kv[0]))
        ],
    }


def traffic_document(t: TrafficReport) -> dict:
    return {
        "capacity": t.capacity,
        "bytes_written_offchip": t.bytes_written_offchip,
        "bytes_read_offchip": t.bytes_read_offchip,
        "spill_events": t.spill_events,
    }


def sweep_csv(rows: list[TrafficReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["capacity", "bytes_read", "bytes_written"])
    for r in rows:
        w.writerow([r.capacity, r.bytes_read_offchip, r.bytes_written_offchip])
    return buf.getvalue()


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
