"""Batch N-1 evaluation: sweep outages, score detection and localization.

Each case simulates one single-line outage under seeded noise, runs the
detector, then scores both localization methods against the true branch.
Partial PMU coverage is drawn per case from the case seed, so the whole
sweep is reproducible from the argument list alone.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .detect import OutageDetector
from .exceptions import IslandingOutageError
from .geo import geo_error
from .grid import NetworkModel, lodf
from .locate import OutageLocator
from .simulate import FreqTemplate, NoiseConfig, ScenarioConfig, simulate_scenario

EVALUATION_COLUMNS = [
    "case",
    "outaged_branch",
    "voltage_class",
    "monitored",
    "detected",
    "event_time_error_s",
    "identified_correctly",
    "error_miles",
    "baseline_error_miles",
]


@dataclass(frozen=True)
class EvaluationRow:
    case: str
    outaged_branch: int
    voltage_class: str
    monitored: bool
    detected: bool
    event_time_error_s: float | None
    identified_correctly: bool
    error_miles: float | None
    baseline_error_miles: float | None


def non_islanding_branches(net: NetworkModel) -> list[int]:
    """Ids of in-service branches whose removal keeps the network connected."""
    keep = []
    for branch in net.in_service_branches():
        try:
            lodf(net, branch.id)
        except IslandingOutageError:
            continue
        keep.append(branch.id)
    return keep


def _with_coverage(
    net: NetworkModel,
    outaged_branch: int,
    coverage: float,
    exclude_tripped: bool,
    seed: int,
) -> NetworkModel:
    """Return a copy of ``net`` with a seeded subset of branches monitored.

    The subset size is ``round(coverage * n_branches)``; when the tripped
    line is excluded it never carries a PMU, modelling an unobserved
    outage. ``coverage >= 1`` with nothing excluded keeps ``net`` as is.
    """
    branch_ids = [b.id for b in net.in_service_branches()]
    if coverage >= 1.0 and not exclude_tripped:
        return net
    candidates = [b for b in branch_ids if not (exclude_tripped and b == outaged_branch)]
    k = min(int(round(coverage * len(branch_ids))), len(candidates))
    rng = np.random.default_rng([seed, outaged_branch])
    chosen = set(rng.choice(candidates, size=k, replace=False).tolist()) if k else set()
    branches = tuple(
        dataclasses.replace(b, monitored=b.id in chosen) for b in net.branches
    )
    return dataclasses.replace(net, branches=branches)


def run_evaluation(
    net: NetworkModel,
    seeds: Sequence[int] = (0,),
    coverage: float = 1.0,
    exclude_tripped: bool = False,
    noise: NoiseConfig | None = None,
    freq_signature: FreqTemplate | None = None,
    event_time_s: float = 10.0,
    duration_s: float = 30.0,
    reporting_rate_hz: float = 25.0,
    detector: OutageDetector | None = None,
    locator: OutageLocator | None = None,
    voltage_class: str = "-",
) -> list[EvaluationRow]:
    """Simulate and score every non-islanding outage under every seed.

    Rows come back ordered by (branch id, seed) regardless of how they were
    computed, one row per case.
    """
    if not 0.0 <= coverage <= 1.0:
        raise ValueError("coverage must be within [0, 1]")
    noise = noise if noise is not None else NoiseConfig()
    signature = freq_signature if freq_signature is not None else FreqTemplate()
    detector = detector if detector is not None else OutageDetector()
    locator = locator if locator is not None else OutageLocator()

    rows = []
    for branch_id in non_islanding_branches(net):
        actual_terminals = net.branch_terminals(branch_id)
        for seed in seeds:
            variant = _with_coverage(net, branch_id, coverage, exclude_tripped, seed)
            config = ScenarioConfig(
                network=variant,
                outaged_branch=branch_id,
                event_time_s=event_time_s,
                duration_s=duration_s,
                reporting_rate_hz=reporting_rate_hz,
                noise=dataclasses.replace(noise, rng_seed=seed),
                freq_signature=signature,
            )
            dataset = simulate_scenario(config)
            events = detector.detect(dataset)
            monitored = variant.branch(branch_id).monitored

            if not events:
                rows.append(
                    EvaluationRow(
                        case=f"L{branch_id}-s{seed}",
                        outaged_branch=branch_id,
                        voltage_class=voltage_class,
                        monitored=monitored,
                        detected=False,
                        event_time_error_s=None,
                        identified_correctly=False,
                        error_miles=None,
                        baseline_error_miles=None,
                    )
                )
                continue

            event = events[0]
            located = locator.locate(dataset, event, variant)
            baseline = locator.baseline_locate_freq(dataset, event)
            rows.append(
                EvaluationRow(
                    case=f"L{branch_id}-s{seed}",
                    outaged_branch=branch_id,
                    voltage_class=voltage_class,
                    monitored=monitored,
                    detected=True,
                    event_time_error_s=abs(event.event_time_ms - config.event_time_ms)
                    / 1000.0,
                    identified_correctly=located.estimated_branch == branch_id,
                    error_miles=geo_error(located.estimated_terminals, actual_terminals),
                    baseline_error_miles=geo_error(
                        baseline.estimated_terminals, actual_terminals
                    ),
                )
            )
    return rows


def _group_stats(rows: Sequence[EvaluationRow]) -> dict:
    detected = [r for r in rows if r.detected]
    time_errors = [r.event_time_error_s for r in detected]
    errors = [r.error_miles for r in detected]
    baseline = [r.baseline_error_miles for r in detected]
    n = len(rows)
    return {
        "cases": n,
        "detection_rate": len(detected) / n if n else 0.0,
        "identification_rate": sum(r.identified_correctly for r in rows) / n if n else 0.0,
        "max_event_time_error_s": max(time_errors) if time_errors else None,
        "mean_event_time_error_s": float(np.mean(time_errors)) if time_errors else None,
        "max_error_miles": max(errors) if errors else None,
        "mean_error_miles": float(np.mean(errors)) if errors else None,
        "max_baseline_error_miles": max(baseline) if baseline else None,
        "mean_baseline_error_miles": float(np.mean(baseline)) if baseline else None,
    }


def summarize_evaluation(rows: Sequence[EvaluationRow]) -> dict:
    """Aggregate rows overall and split by whether the tripped line had a PMU."""
    summary = {"overall": _group_stats(rows)}
    monitored = [r for r in rows if r.monitored]
    unmonitored = [r for r in rows if not r.monitored]
    if monitored and unmonitored:
        summary["monitored"] = _group_stats(monitored)
        summary["unmonitored"] = _group_stats(unmonitored)
    return summary


def write_evaluation_csv(rows: Iterable[EvaluationRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EVALUATION_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.case,
                    row.outaged_branch,
                    row.voltage_class,
                    row.monitored,
                    row.detected,
                    "" if row.event_time_error_s is None else repr(row.event_time_error_s),
                    row.identified_correctly,
                    "" if row.error_miles is None else repr(row.error_miles),
                    "" if row.baseline_error_miles is None else repr(row.baseline_error_miles),
                ]
            )
