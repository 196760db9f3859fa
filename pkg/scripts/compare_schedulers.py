#!/usr/bin/env python3
"""Compare peak memory across schedulers on the fixtures and a random corpus.

Usage:
    python3 scripts/compare_schedulers.py [--corpus 100] [--seed-base 0]
"""

from __future__ import annotations

import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from memsched.generate import random_dag  # noqa: E402
from memsched.graph import load_graph  # noqa: E402
from memsched.partition import conquer_and_combine, partition  # noqa: E402
from memsched.rewrite import rewrite_all  # noqa: E402
from memsched.scheduler import evaluate_schedule, kahn_schedule, schedule_dp  # noqa: E402

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def row(name, g):
    t0 = time.perf_counter()
    dp = schedule_dp(g)
    dp_ms = 1000 * (time.perf_counter() - t0)
    kahn_peak, _ = evaluate_schedule(kahn_schedule(g), g)
    g2, rewrites = rewrite_all(g)
    r = conquer_and_combine(g2, partition(g2))
    print(
        f"{name:24s} {len(g.nodes):5d} {kahn_peak:10d} {dp.peak_bytes:10d} "
        f"{r.peak_bytes:12d} {len(rewrites):3d} {dp_ms:8.1f}"
    )
    return kahn_peak, dp.peak_bytes


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--corpus", type=int, default=100)
    ap.add_argument("--seed-base", type=int, default=0)
    args = ap.parse_args()

    print(
        f"{'graph':24s} {'nodes':>5s} {'kahn':>10s} {'dp':>10s} "
        f"{'rw+part':>12s} {'rw':>3s} {'dp_ms':>8s}"
    )
    for fn in sorted(os.listdir(FIXTURES)):
        g = load_graph(os.path.join(FIXTURES, fn))
        row(g.name, g)

    wins = total = 0
    saved = []
    for seed in range(args.seed_base, args.seed_base + args.corpus):
        g = random_dag(seed)
        dp = schedule_dp(g)
        kahn_peak, _ = evaluate_schedule(kahn_schedule(g), g)
        total += 1
        if dp.peak_bytes < kahn_peak:
            wins += 1
            saved.append(1 - dp.peak_bytes / kahn_peak)
    avg = 100 * sum(saved) / len(saved) if saved else 0.0
    print(
        f"\nrandom corpus ({total} DAGs): DP beat Kahn on {wins} "
        f"({100 * wins / total:.0f}%), avg saving when strict {avg:.1f}%"
    )


if __name__ == "__main__":
    main()
