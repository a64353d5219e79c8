"""Command-line front end.

Subcommands: simulate, detect, locate, factors, evaluate, export-map.
Exit codes: 0 success, 2 usage, 3 data or schema problem, 4 model problem
(islanding or singular system). Network arguments accept a JSON file path
or the name of a shipped fixture (``outage-sentinel factors --network k4``).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Mapping

from .detect import OutageDetector
from .evaluate import run_evaluation, summarize_evaluation, write_evaluation_csv
from .exceptions import (
    DatasetSchemaError,
    DisconnectedGraphError,
    IslandingOutageError,
    SentinelError,
    SingularSystemError,
)
from .grid import NetworkModel, lodf, ptdf
from .locate import OutageLocator
from .simulate import (
    NoiseConfig,
    load_scenario,
    read_dataset_csv,
    resolve_network,
    simulate_scenario,
    write_dataset_csv,
)


def _parse_branch_ref(text: str) -> int:
    """Branch ids may be written bare (``12``) or labeled (``L12``)."""
    raw = text.strip()
    if raw and raw[0] in "Ll":
        raw = raw[1:]
    try:
        return int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a branch id") from None


def _parse_seeds(text: str) -> list[int]:
    """Comma-separated seed list; ``a:b`` tokens expand to range(a, b)."""
    seeds: list[int] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if ":" in token:
            lo, hi = token.split(":", 1)
            seeds.extend(range(int(lo), int(hi)))
        else:
            seeds.append(int(token))
    if not seeds:
        raise argparse.ArgumentTypeError(f"no seeds in {text!r}")
    return seeds


def _add_detector_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("detector parameters")
    group.add_argument("--median-window", type=int, default=7)
    group.add_argument("--mean-window", type=int, default=31)
    group.add_argument("--detection-window", type=int, default=20)
    group.add_argument("--first-threshold-hz", type=float, default=0.0045)
    group.add_argument("--second-threshold-hz", type=float, default=0.0025)
    group.add_argument("--cluster-window-s", type=float, default=1.0)
    group.add_argument("--min-channels", type=int, default=1)


def _detector_from(args: argparse.Namespace) -> OutageDetector:
    return OutageDetector(
        median_window=args.median_window,
        mean_window=args.mean_window,
        detection_window=args.detection_window,
        first_threshold_hz=args.first_threshold_hz,
        second_threshold_hz=args.second_threshold_hz,
        cluster_window_s=args.cluster_window_s,
        min_channels=args.min_channels,
    )


def _add_locator_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("locator parameters")
    group.add_argument("--pre-length", type=int, default=50)
    group.add_argument("--pre-gap", type=int, default=10)
    group.add_argument("--post-gap", type=int, default=25)
    group.add_argument("--post-length", type=int, default=50)
    group.add_argument("--median-window", type=int, default=7)
    group.add_argument("--min-change-mw", type=float, default=1e-6)


def _locator_from(args: argparse.Namespace) -> OutageLocator:
    return OutageLocator(
        pre_length=args.pre_length,
        pre_gap=args.pre_gap,
        post_gap=args.post_gap,
        post_length=args.post_length,
        median_window=args.median_window,
        min_change_mw=args.min_change_mw,
    )


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Subcommand bodies


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = load_scenario(args.config)
    if args.seed is not None:
        config = dataclasses.replace(
            config, noise=dataclasses.replace(config.noise, rng_seed=args.seed)
        )
    dataset = simulate_scenario(config)
    write_dataset_csv(dataset, args.out)
    print(f"wrote {args.out}: {len(dataset.channels)} channels x {dataset.n_samples} samples")
    return 0


def _cmd_detect(args: argparse.Namespace) -> int:
    dataset = read_dataset_csv(args.data)
    detector = _detector_from(args)
    events = detector.detect(dataset)
    _emit(_dump_json(detector.events_to_json(events)), args.out)
    return 0


def _load_event_time_ms(args: argparse.Namespace, dataset) -> int:
    if args.event_time_ms is not None:
        return args.event_time_ms
    if args.events:
        doc = json.loads(Path(args.events).read_text())
        if not isinstance(doc, list) or not doc:
            raise DatasetSchemaError(f"{args.events}: no events to locate against")
        first = doc[0]
        if not isinstance(first, Mapping) or "event_time_ms" not in first:
            raise DatasetSchemaError(f"{args.events}: events lack event_time_ms")
        return int(first["event_time_ms"])
    events = OutageDetector().detect(dataset)
    if not events:
        raise DatasetSchemaError(f"{args.data}: no event detected and none supplied")
    return events[0].event_time_ms


def _cmd_locate(args: argparse.Namespace) -> int:
    network = resolve_network(args.network)
    dataset = read_dataset_csv(args.data, network=network)
    event_time_ms = _load_event_time_ms(args, dataset)
    locator = _locator_from(args)
    reports = {}
    if args.method in ("power", "both"):
        reports["power_change"] = locator.locate(dataset, event_time_ms, network).to_report()
    if args.method in ("baseline", "both"):
        reports["max_freq_baseline"] = locator.baseline_locate_freq(
            dataset, event_time_ms
        ).to_report()
    _emit(_dump_json(reports), args.out)
    return 0


def _cmd_factors(args: argparse.Namespace) -> int:
    network = resolve_network(args.network)
    if args.outage is not None:
        factors = lodf(network, args.outage)
        header = "branch_id,lodf"
    else:
        from_bus, to_bus = args.transaction
        factors = ptdf(network, from_bus, to_bus)
        header = "branch_id,ptdf"
    lines = [header]
    for branch_id in sorted(factors.values):
        lines.append(f"{branch_id},{factors.values[branch_id]!r}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    network = resolve_network(args.network)
    noise = NoiseConfig(
        gaussian_sigma_hz=args.sigma_hz,
        gaussian_sigma_mw=args.sigma_mw,
        spike_probability=args.spike_probability,
        spike_amplitude_hz=args.spike_amplitude_hz,
    )
    rows = run_evaluation(
        network,
        seeds=args.seeds,
        coverage=args.coverage,
        exclude_tripped=args.exclude_tripped,
        noise=noise,
        event_time_s=args.event_time_s,
        duration_s=args.duration_s,
    )
    if args.out:
        write_evaluation_csv(rows, args.out)
    sys.stdout.write(_dump_json(summarize_evaluation(rows)))
    return 0


def _require(doc: Mapping, key: str, where: str):
    if key not in doc:
        raise DatasetSchemaError(f"{where}: missing {key!r}")
    return doc[key]


def _cmd_export_map(args: argparse.Namespace) -> int:
    raw = json.loads(Path(args.localization).read_text())
    if isinstance(raw, Mapping) and "power_change" in raw:
        report = raw["power_change"]
    elif isinstance(raw, Mapping) and raw.get("method") == "power_change":
        report = raw
    else:
        raise DatasetSchemaError(f"{args.localization}: no power_change report found")
    network = resolve_network(args.network)

    features = []
    ranked = _require(report, "ranked", args.localization)
    if ranked:
        for rank, entry in enumerate(ranked, start=1):
            branch_id = int(_require(entry, "branch_id", args.localization))
            (lat1, lon1), (lat2, lon2) = network.branch_terminals(branch_id)
            features.append(
                {
                    "type": "Feature",
                    "geometry": {
                        "type": "LineString",
                        "coordinates": [[lon1, lat1], [lon2, lat2]],
                    },
                    "properties": {
                        "branch_id": branch_id,
                        "delta_p_mw": _require(entry, "delta_p_mw", args.localization),
                        "rank": rank,
                    },
                }
            )
        estimated = int(_require(report, "estimated_branch", args.localization))
        (lat1, lon1), (lat2, lon2) = network.branch_terminals(estimated)
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "Point",
                    "coordinates": [(lon1 + lon2) / 2.0, (lat1 + lat2) / 2.0],
                },
                "properties": {
                    "marker": "event",
                    "estimated_branch": estimated,
                    "event_time_ms": _require(report, "event_time_ms", args.localization),
                    "low_confidence": report.get("low_confidence", False),
                },
            }
        )
    _emit(_dump_json({"type": "FeatureCollection", "features": features}), args.out)
    return 0


# ---------------------------------------------------------------------------
# Parser assembly


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="outage-sentinel",
        description="Detect and localize transmission line outages from PMU streams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario config and write a dataset CSV")
    p.add_argument("--config", required=True, help="scenario JSON path")
    p.add_argument("--out", required=True, help="output dataset CSV path")
    p.add_argument("--seed", type=int, default=None, help="override the noise seed")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("detect", help="scan a dataset CSV for outage events")
    p.add_argument("data", help="dataset CSV path")
    p.add_argument("--out", default=None, help="write events JSON here instead of stdout")
    _add_detector_flags(p)
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("locate", help="rank branches by power change around an event")
    p.add_argument("data", help="dataset CSV path")
    p.add_argument("--network", required=True, help="network JSON path or fixture name")
    p.add_argument("--events", default=None, help="events JSON from the detect command")
    p.add_argument("--event-time-ms", type=int, default=None, help="explicit event time")
    p.add_argument(
        "--method",
        choices=("power", "baseline", "both"),
        default="both",
        help="which localization method(s) to report",
    )
    p.add_argument("--out", default=None)
    _add_locator_flags(p)
    p.set_defaults(func=_cmd_locate)

    p = sub.add_parser("factors", help="print PTDF or LODF tables as CSV")
    p.add_argument("--network", required=True, help="network JSON path or fixture name")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--outage", type=_parse_branch_ref, default=None, metavar="BRANCH")
    mode.add_argument(
        "--transaction", type=int, nargs=2, default=None, metavar=("FROM", "TO")
    )
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_factors)

    p = sub.add_parser("evaluate", help="score every non-islanding outage under seeds")
    p.add_argument("--network", required=True, help="network JSON path or fixture name")
    p.add_argument("--coverage", type=float, default=1.0, help="fraction of lines with PMUs")
    p.add_argument(
        "--exclude-tripped",
        action="store_true",
        help="never place a PMU on the line being tripped",
    )
    p.add_argument("--seeds", type=_parse_seeds, default=[0], help="e.g. 0,1,2 or 0:100")
    p.add_argument("--event-time-s", type=float, default=10.0)
    p.add_argument("--duration-s", type=float, default=30.0)
    p.add_argument("--sigma-hz", type=float, default=NoiseConfig.gaussian_sigma_hz)
    p.add_argument("--sigma-mw", type=float, default=NoiseConfig.gaussian_sigma_mw)
    p.add_argument("--spike-probability", type=float, default=NoiseConfig.spike_probability)
    p.add_argument(
        "--spike-amplitude-hz", type=float, default=NoiseConfig.spike_amplitude_hz
    )
    p.add_argument("--out", default=None, help="write per-case rows CSV here")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("export-map", help="convert a localization report to GeoJSON")
    p.add_argument("localization", help="localization JSON from the locate command")
    p.add_argument("--network", required=True, help="network JSON path or fixture name")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_export_map)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (IslandingOutageError, SingularSystemError, DisconnectedGraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except SentinelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
