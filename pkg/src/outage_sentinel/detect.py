"""Outage detection from de-trended PMU frequency streams.

Per channel, the frequency series is cleaned with a moving median, its trend
is taken with a moving mean, and the detector works on the difference. A
trigger needs a first excursion past ``first_threshold_hz`` confirmed by an
opposite-sign swing past ``second_threshold_hz`` within ``detection_window``
samples; the two-sided test rejects slow drifts and one-off glitches that
survive the median. Channel triggers are then clustered across the fleet and
each cluster's earliest GPS timestamp becomes the event time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import EmptyDatasetError, WindowOutOfRangeError
from .filters import detrend, moving_mean, moving_median
from .simulate import PmuDataset


@dataclass(frozen=True)
class ChannelTrigger:
    """A confirmed threshold crossing on one channel."""

    channel_id: str | None
    index: int
    time_ms: int
    first_peak_hz: float
    second_peak_hz: float
    peak_hz: float


@dataclass(frozen=True)
class ChannelPeak:
    channel_id: str
    peak_hz: float


@dataclass(frozen=True)
class DetectionEvent:
    """A fleet-level detection; ``channels`` lists the triggering PMUs."""

    event_time_ms: int
    channels: tuple[ChannelPeak, ...]
    first_peak_hz: float
    second_peak_hz: float


class OutageDetector(BaseEstimator):
    """Dual-threshold frequency-event detector.

    Parameters
    ----------
    median_window, mean_window:
        Odd sample counts for the spike filter and the trend filter.
    detection_window:
        How many samples after a first crossing may confirm it.
    first_threshold_hz, second_threshold_hz:
        De-trended deviation thresholds; the first must exceed the second.
    cluster_window_s, min_channels:
        Cross-channel clustering span and the least number of distinct
        channels required to report an event.
    second_peak_mode:
        ``"opposite"`` demands a rebound of opposite sign (default);
        ``"same"`` accepts a same-sign confirmation, for sensitivity studies.
    """

    def __init__(
        self,
        median_window: int = 7,
        mean_window: int = 31,
        detection_window: int = 20,
        first_threshold_hz: float = 0.0045,
        second_threshold_hz: float = 0.0025,
        cluster_window_s: float = 1.0,
        min_channels: int = 1,
        second_peak_mode: str = "opposite",
    ):
        self.median_window = median_window
        self.mean_window = mean_window
        self.detection_window = detection_window
        self.first_threshold_hz = first_threshold_hz
        self.second_threshold_hz = second_threshold_hz
        self.cluster_window_s = cluster_window_s
        self.min_channels = min_channels
        self.second_peak_mode = second_peak_mode

    def _validate(self) -> None:
        if not (self.first_threshold_hz > self.second_threshold_hz > 0.0):
            raise ValueError("thresholds must satisfy first > second > 0")
        if int(self.detection_window) != self.detection_window or self.detection_window < 2:
            raise ValueError("detection_window must be an integer of at least 2 samples")
        if int(self.min_channels) != self.min_channels or self.min_channels < 1:
            raise ValueError("min_channels must be a positive integer")
        if self.cluster_window_s < 0:
            raise ValueError("cluster_window_s must be nonnegative")
        if self.second_peak_mode not in ("opposite", "same"):
            raise ValueError("second_peak_mode must be 'opposite' or 'same'")

    def fit(self, X=None, y=None) -> "OutageDetector":
        """Stateless; only validates parameters."""
        self._validate()
        return self

    def deviation(self, freq_series) -> np.ndarray:
        """De-trended deviation: median-filtered series minus its mean trend."""
        filtered = moving_median(freq_series, self.median_window)
        trend = moving_mean(filtered, self.mean_window)
        return detrend(filtered, trend)

    def detect_channel(
        self,
        freq_series,
        timestamps_ms,
        channel_id: str | None = None,
    ) -> list[ChannelTrigger]:
        """Confirmed triggers on one channel, earliest first.

        Crossings within ``detection_window`` samples of a confirmed trigger
        are merged into it, keeping the earliest timestamp. Samples whose
        trend window is truncated by a stream edge are never trigger
        candidates: a shrunken median passes isolated spikes through, so the
        first and last ``mean_window // 2`` samples only serve as context.
        """
        self._validate()
        freq = np.asarray(freq_series, dtype=float)
        ts = np.asarray(timestamps_ms, dtype=np.int64)
        if freq.ndim != 1 or freq.size != ts.size:
            raise WindowOutOfRangeError("frequency and timestamp vectors must align")
        if freq.size <= self.mean_window:
            raise WindowOutOfRangeError(
                f"series of {freq.size} samples is shorter than the trend window"
            )

        dev = self.deviation(freq)
        window = int(self.detection_window)
        margin = int(self.mean_window) // 2
        triggers: list[ChannelTrigger] = []
        blocked_until = -1
        for i in np.flatnonzero(np.abs(dev) >= self.first_threshold_hz):
            if i <= blocked_until or i < margin or i >= dev.size - margin:
                continue
            ahead = dev[i + 1 : i + 1 + window]
            if self.second_peak_mode == "opposite":
                confirm = ahead[np.sign(ahead) == -np.sign(dev[i])]
            else:
                confirm = ahead[np.sign(ahead) == np.sign(dev[i])]
            confirm = confirm[np.abs(confirm) >= self.second_threshold_hz]
            if confirm.size == 0:
                continue
            second = confirm[np.argmax(np.abs(confirm))]
            lookahead = dev[i : i + 1 + window]
            peak = lookahead[np.argmax(np.abs(lookahead))]
            triggers.append(
                ChannelTrigger(
                    channel_id=channel_id,
                    index=int(i),
                    time_ms=int(ts[i]),
                    first_peak_hz=float(dev[i]),
                    second_peak_hz=float(second),
                    peak_hz=float(peak),
                )
            )
            blocked_until = i + window
        return triggers

    def detect(self, dataset: PmuDataset) -> list[DetectionEvent]:
        """Cluster channel triggers into fleet-level events, oldest first."""
        self._validate()
        if not dataset.channels:
            raise EmptyDatasetError("dataset has no channels")

        triggers: list[ChannelTrigger] = []
        for ch in dataset.sorted_channels():
            triggers.extend(
                self.detect_channel(ch.freq_hz, dataset.timestamps_ms, ch.channel_id)
            )
        triggers.sort(key=lambda tr: (tr.time_ms, tr.channel_id))

        span_ms = round(self.cluster_window_s * 1000.0)
        events: list[DetectionEvent] = []
        k = 0
        while k < len(triggers):
            first = triggers[k]
            members = [first]
            k += 1
            while k < len(triggers) and triggers[k].time_ms <= first.time_ms + span_ms:
                members.append(triggers[k])
                k += 1
            earliest_per_channel: dict[str, ChannelTrigger] = {}
            for tr in members:
                if tr.channel_id not in earliest_per_channel:
                    earliest_per_channel[tr.channel_id] = tr
            if len(earliest_per_channel) < self.min_channels:
                continue
            events.append(
                DetectionEvent(
                    event_time_ms=first.time_ms,
                    channels=tuple(
                        ChannelPeak(cid, earliest_per_channel[cid].peak_hz)
                        for cid in sorted(earliest_per_channel)
                    ),
                    first_peak_hz=first.first_peak_hz,
                    second_peak_hz=first.second_peak_hz,
                )
            )
        return events

    def events_to_json(self, events: Iterable[DetectionEvent]) -> list[dict]:
        """Event report objects: time, triggering channels, parameter echo."""
        params = self.get_params()
        return [
            {
                "event_time_ms": ev.event_time_ms,
                "channels": [
                    {"channel_id": cp.channel_id, "peak_hz": cp.peak_hz}
                    for cp in ev.channels
                ],
                "params_echo": params,
            }
            for ev in events
        ]
