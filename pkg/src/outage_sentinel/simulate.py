"""Synthetic PMU scenario generator driven by the DC network model.

A scenario trips one branch of a network and emits one PMU channel per
monitored branch, placed at the branch's from-terminal. Every channel shares
the same system-wide frequency excursion; active power moves from the
pre-outage flow to the post-outage flow through a first-order transition.
All randomness is drawn from a single seed, so a scenario is reproducible
bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from functools import lru_cache
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy.optimize import minimize_scalar

from .exceptions import (
    DatasetSchemaError,
    DisconnectedGraphError,
    EmptyDatasetError,
    IslandingOutageError,
    NoMonitoredBranchError,
    UnknownBranchError,
)
from .grid import NetworkModel, apply_outage, dc_power_flow, network_from_dict

NOMINAL_FREQ_HZ = 60.0
# Active power settles to the post-outage flow exactly after this many time
# constants, so post-window medians see the final value with no residual.
POWER_TRANSITION_TAU_S = 0.2
POWER_SNAP_MULTIPLE = 5.0
DEFAULT_START_TIME_MS = 1_609_459_200_000  # 2021-01-01T00:00:00Z

CSV_HEADER = "timestamp_ms,channel_id,branch_id,frequency_hz,active_power_mw"


@dataclass(frozen=True)
class FreqTemplate:
    """Shape of the system frequency excursion after a line trip.

    The primary swing is a double exponential scaled so its maximum equals
    ``peak_deviation_hz``. A trip also produces an opposite rebound swing:
    ``rebound_fraction`` of the primary lobe, delayed by ``rebound_lag_s``,
    is subtracted and the combined waveform is rescaled back to the peak.
    Set ``rebound_fraction`` to 0 for a one-sided excursion.
    """

    peak_deviation_hz: float = 0.01
    rise_tau_s: float = 0.08
    decay_tau_s: float = 0.4
    rebound_fraction: float = 1.0
    rebound_lag_s: float = 0.35

    def __post_init__(self):
        if self.peak_deviation_hz < 0.0:
            raise ValueError("peak_deviation_hz must be nonnegative")
        if not (0.0 < self.rise_tau_s < self.decay_tau_s):
            raise ValueError("time constants must satisfy 0 < rise_tau_s < decay_tau_s")
        if not (0.0 <= self.rebound_fraction <= 1.0):
            raise ValueError("rebound_fraction must be within [0, 1]")
        if self.rebound_fraction > 0.0 and self.rebound_lag_s <= 0.0:
            raise ValueError("rebound_lag_s must be positive when a rebound is used")


def template_peak_time(tpl: FreqTemplate) -> float:
    """Closed-form argmax of the one-sided double exponential."""
    d, r = tpl.decay_tau_s, tpl.rise_tau_s
    return math.log(d / r) * (d * r) / (d - r)


def frequency_template(tpl: FreqTemplate, t) -> np.ndarray:
    """One-sided excursion ``A * (exp(-t/decay) - exp(-t/rise))``.

    ``A`` is chosen so the maximum equals ``peak_deviation_hz``; the value is
    0 for ``t < 0`` and decays back toward 0 as ``t`` grows.
    """
    t_arr = np.asarray(t, dtype=float)
    if tpl.peak_deviation_hz == 0.0:
        return np.zeros_like(t_arr)
    ts = template_peak_time(tpl)
    amp = tpl.peak_deviation_hz / (
        math.exp(-ts / tpl.decay_tau_s) - math.exp(-ts / tpl.rise_tau_s)
    )
    tt = np.maximum(t_arr, 0.0)
    shape = np.exp(-tt / tpl.decay_tau_s) - np.exp(-tt / tpl.rise_tau_s)
    return np.where(t_arr < 0.0, 0.0, amp * shape)


@lru_cache(maxsize=64)
def _excursion_norm(peak: float, rise: float, decay: float, rho: float, lag: float) -> float:
    """Max absolute value of the swing-plus-rebound waveform before rescaling."""
    tpl = FreqTemplate(peak, rise, decay, rho, lag)

    def value(t: float) -> float:
        return float(
            frequency_template(tpl, t) - rho * frequency_template(tpl, t - lag)
        )

    horizon = lag + 15.0 * decay
    grid = np.linspace(0.0, horizon, 20001)
    samples = frequency_template(tpl, grid) - rho * frequency_template(tpl, grid - lag)
    k = int(np.argmax(np.abs(samples)))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(
        lambda t: -abs(value(t)), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-12},
    )
    return max(abs(samples[k]), -float(res.fun))


def frequency_excursion(tpl: FreqTemplate, t) -> np.ndarray:
    """Full excursion waveform: primary swing minus delayed rebound.

    The result is rescaled so its maximum absolute value equals
    ``peak_deviation_hz`` exactly; with ``rebound_fraction == 0`` it reduces
    to :func:`frequency_template`.
    """
    if tpl.rebound_fraction == 0.0 or tpl.peak_deviation_hz == 0.0:
        return frequency_template(tpl, t)
    raw = frequency_template(tpl, t) - tpl.rebound_fraction * frequency_template(
        tpl, np.asarray(t, dtype=float) - tpl.rebound_lag_s
    )
    norm = _excursion_norm(
        tpl.peak_deviation_hz,
        tpl.rise_tau_s,
        tpl.decay_tau_s,
        tpl.rebound_fraction,
        tpl.rebound_lag_s,
    )
    return raw * (tpl.peak_deviation_hz / norm)


@dataclass(frozen=True)
class NoiseConfig:
    """Measurement noise: Gaussian jitter plus occasional frequency spikes."""

    gaussian_sigma_hz: float = 0.001
    gaussian_sigma_mw: float = 0.2
    spike_probability: float = 0.005
    spike_amplitude_hz: float = 0.02
    rng_seed: int = 0

    def __post_init__(self):
        if self.gaussian_sigma_hz < 0 or self.gaussian_sigma_mw < 0:
            raise ValueError("noise sigmas must be nonnegative")
        if not (0.0 <= self.spike_probability <= 1.0):
            raise ValueError("spike_probability must be within [0, 1]")
        if self.spike_amplitude_hz < 0:
            raise ValueError("spike_amplitude_hz must be nonnegative")


def inject_noise(
    series,
    noise: NoiseConfig,
    kind: str = "frequency",
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Add Gaussian noise, and for frequency series also dropout spikes.

    With probability ``spike_probability`` a frequency sample is replaced by
    the clean value plus or minus ``spike_amplitude_hz`` (sign equiprobable).
    Passing the same seed reproduces the output exactly.
    """
    if kind not in ("frequency", "power"):
        raise ValueError(f"kind must be 'frequency' or 'power', got {kind!r}")
    if rng is None:
        rng = np.random.default_rng(noise.rng_seed)
    clean = np.asarray(series, dtype=float)
    sigma = noise.gaussian_sigma_hz if kind == "frequency" else noise.gaussian_sigma_mw
    out = clean + rng.normal(0.0, sigma, clean.size)
    if kind == "frequency":
        u = rng.random(clean.size)
        signs = rng.integers(0, 2, clean.size) * 2 - 1
        mask = u < noise.spike_probability
        out[mask] = clean[mask] + noise.spike_amplitude_hz * signs[mask]
    return out


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulated outage on a network, or a quiet stream if no branch."""

    network: NetworkModel
    outaged_branch: int | None
    event_time_s: float = 10.0
    duration_s: float = 60.0
    reporting_rate_hz: float = 25.0
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    freq_signature: FreqTemplate = field(default_factory=FreqTemplate)
    start_time_ms: int = DEFAULT_START_TIME_MS

    def __post_init__(self):
        if self.duration_s <= 0 or self.reporting_rate_hz <= 0:
            raise ValueError("duration_s and reporting_rate_hz must be positive")
        if self.outaged_branch is not None and not (
            0.0 < self.event_time_s < self.duration_s
        ):
            raise ValueError("event_time_s must fall inside the stream")

    @property
    def event_time_ms(self) -> int:
        return self.start_time_ms + round(self.event_time_s * 1000.0)


@dataclass
class Channel:
    """One PMU stream, placed at the from-terminal of its branch."""

    channel_id: str
    branch_id: int
    bus_id: int | None
    lat: float
    lon: float
    freq_hz: np.ndarray
    power_mw: np.ndarray


@dataclass
class PmuDataset:
    """Synchronized multichannel PMU recording."""

    reporting_rate_hz: float
    timestamps_ms: np.ndarray
    channels: dict[str, Channel]

    def __post_init__(self):
        ts = np.asarray(self.timestamps_ms, dtype=np.int64)
        if ts.size and np.any(np.diff(ts) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        self.timestamps_ms = ts
        for ch in self.channels.values():
            if ch.freq_hz.size != ts.size or ch.power_mw.size != ts.size:
                raise DatasetSchemaError(
                    f"channel {ch.channel_id} length differs from the timestamp vector"
                )

    @property
    def n_samples(self) -> int:
        return int(self.timestamps_ms.size)

    def sorted_channels(self) -> list[Channel]:
        return [self.channels[k] for k in sorted(self.channels)]


def channel_id_for_branch(branch_id: int) -> str:
    return f"pmu-{branch_id:03d}"


def simulate_scenario(config: ScenarioConfig) -> PmuDataset:
    """Run one scenario and return the recorded dataset.

    Noise-free channel values reproduce the DC solution exactly: samples
    before the event equal the pre-outage flow, and samples at or after the
    transition snap (``POWER_SNAP_MULTIPLE`` time constants past the event)
    equal the post-outage flow.
    """
    net = config.network
    monitored = net.monitored_branches()
    if not monitored:
        raise NoMonitoredBranchError("scenario requires at least one monitored branch")

    pre_flows = dc_power_flow(net)
    if config.outaged_branch is not None:
        branch = net.branch(config.outaged_branch)
        if not branch.in_service:
            raise UnknownBranchError(f"branch {config.outaged_branch} is out of service")
        try:
            post_net = apply_outage(net, config.outaged_branch)
        except DisconnectedGraphError as exc:
            raise IslandingOutageError(str(exc)) from exc
        post_flows = dc_power_flow(post_net)
        post_flows[config.outaged_branch] = 0.0
    else:
        post_flows = dict(pre_flows)

    n = round(config.duration_s * config.reporting_rate_hz)
    idx = np.arange(n)
    timestamps = config.start_time_ms + np.rint(idx * 1000.0 / config.reporting_rate_hz).astype(
        np.int64
    )
    rel_t = (timestamps - config.event_time_ms) / 1000.0

    if config.outaged_branch is not None:
        excursion = frequency_excursion(config.freq_signature, rel_t)
    else:
        excursion = np.zeros(n)
    clean_freq = NOMINAL_FREQ_HZ + excursion

    snap_s = POWER_SNAP_MULTIPLE * POWER_TRANSITION_TAU_S
    decay = np.exp(-np.minimum(np.maximum(rel_t, 0.0), snap_s) / POWER_TRANSITION_TAU_S)

    seeds = np.random.SeedSequence(config.noise.rng_seed).spawn(len(monitored))
    channels: dict[str, Channel] = {}
    for branch, seed in zip(sorted(monitored, key=lambda b: b.id), seeds):
        rng = np.random.default_rng(seed)
        pre = pre_flows[branch.id]
        post = post_flows[branch.id]
        clean_power = np.where(
            rel_t < 0.0, pre, np.where(rel_t >= snap_s, post, post + (pre - post) * decay)
        )
        freq = inject_noise(clean_freq, config.noise, kind="frequency", rng=rng)
        power = inject_noise(clean_power, config.noise, kind="power", rng=rng)
        from_bus = net.bus(branch.from_bus)
        cid = channel_id_for_branch(branch.id)
        channels[cid] = Channel(cid, branch.id, from_bus.id, from_bus.lat, from_bus.lon, freq, power)

    return PmuDataset(config.reporting_rate_hz, timestamps, channels)


# ---------------------------------------------------------------------------
# Dataset CSV format


def write_dataset_csv(dataset: PmuDataset, path: str | Path) -> None:
    """Rows sorted by timestamp then channel id; floats keep full precision."""
    ordered = dataset.sorted_channels()
    lines = [CSV_HEADER]
    for i, ts in enumerate(dataset.timestamps_ms):
        for ch in ordered:
            lines.append(
                f"{int(ts)},{ch.channel_id},{ch.branch_id},"
                f"{float(ch.freq_hz[i])!r},{float(ch.power_mw[i])!r}"
            )
    Path(path).write_text("\n".join(lines) + "\n")


def read_dataset_csv(path: str | Path, network: NetworkModel | None = None) -> PmuDataset:
    """Parse a dataset CSV; a network fills in PMU terminal coordinates."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or lines[0].strip() != CSV_HEADER:
        raise DatasetSchemaError(f"expected header {CSV_HEADER!r}")

    per_channel: dict[str, dict] = {}
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise DatasetSchemaError(f"line {ln}: expected 5 columns, got {len(parts)}")
        try:
            ts = int(parts[0])
            branch_id = int(parts[2])
            freq = float(parts[3])
            power = float(parts[4])
        except ValueError as exc:
            raise DatasetSchemaError(f"line {ln}: {exc}") from exc
        rec = per_channel.setdefault(
            parts[1], {"branch_id": branch_id, "ts": [], "freq": [], "power": []}
        )
        if rec["branch_id"] != branch_id:
            raise DatasetSchemaError(f"channel {parts[1]} maps to multiple branch ids")
        rec["ts"].append(ts)
        rec["freq"].append(freq)
        rec["power"].append(power)

    if not per_channel:
        raise EmptyDatasetError(f"{path} contains no data rows")

    ts_ref = None
    channels: dict[str, Channel] = {}
    for cid in sorted(per_channel):
        rec = per_channel[cid]
        ts = np.array(rec["ts"], dtype=np.int64)
        if ts_ref is None:
            ts_ref = ts
        elif ts.size != ts_ref.size or np.any(ts != ts_ref):
            raise DatasetSchemaError(f"channel {cid} timestamps differ from other channels")
        bus_id, lat, lon = None, math.nan, math.nan
        if network is not None:
            branch = network.branch(rec["branch_id"])
            bus = network.bus(branch.from_bus)
            bus_id, lat, lon = bus.id, bus.lat, bus.lon
        channels[cid] = Channel(
            cid, rec["branch_id"], bus_id, lat, lon,
            np.array(rec["freq"]), np.array(rec["power"]),
        )

    if ts_ref.size:
        spacing = float(np.median(np.diff(ts_ref))) if ts_ref.size > 1 else 40.0
        rate = 1000.0 / spacing
    else:
        raise EmptyDatasetError(f"{path} contains no samples")
    return PmuDataset(rate, ts_ref, channels)


# ---------------------------------------------------------------------------
# Scenario config files


def _dataclass_from_dict(cls, doc: Mapping, what: str):
    allowed = {f.name for f in fields(cls)}
    unknown = set(doc) - allowed
    if unknown:
        raise DatasetSchemaError(f"unknown {what} fields: {sorted(unknown)}")
    return cls(**doc)


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Read a scenario config JSON; fields mirror :class:`ScenarioConfig`.

    ``network`` may be an inline network object, the name of a shipped
    fixture, or a path to a network file resolved against the config's
    directory.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetSchemaError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict) or "network" not in doc:
        raise DatasetSchemaError(f"{path}: scenario config must be an object with a network")

    doc = dict(doc)
    net_ref = doc.pop("network")
    network = resolve_network(net_ref, base_dir=path.parent)

    noise = _dataclass_from_dict(NoiseConfig, doc.pop("noise", {}), "noise")
    signature = _dataclass_from_dict(
        FreqTemplate, doc.pop("freq_signature", {}), "freq_signature"
    )
    if "outaged_branch" not in doc:
        raise DatasetSchemaError(f"{path}: scenario config must name an outaged_branch")
    outaged = doc.pop("outaged_branch")

    allowed = {"event_time_s", "duration_s", "reporting_rate_hz", "start_time_ms"}
    unknown = set(doc) - allowed
    if unknown:
        raise DatasetSchemaError(f"{path}: unknown scenario fields: {sorted(unknown)}")
    return ScenarioConfig(
        network=network,
        outaged_branch=None if outaged is None else int(outaged),
        noise=noise,
        freq_signature=signature,
        **doc,
    )


def resolve_network(ref, base_dir: str | Path | None = None) -> NetworkModel:
    """Accept an inline network dict, a fixture name, or a file path."""
    from . import networks

    if isinstance(ref, Mapping):
        return network_from_dict(ref)
    if isinstance(ref, NetworkModel):
        return ref
    name = str(ref)
    if name in networks.FIXTURES:
        return networks.FIXTURES[name]()
    candidates = [Path(name)]
    if base_dir is not None:
        candidates.append(Path(base_dir) / name)
    for cand in candidates:
        if cand.is_file():
            return network_from_dict(json.loads(cand.read_text()))
    raise DatasetSchemaError(
        f"network {name!r} is neither a shipped fixture ({sorted(networks.FIXTURES)}) nor a file"
    )
