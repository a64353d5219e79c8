"""Moving median and moving mean filters with exact streaming equivalents.

All filters are centered and odd-windowed. Near the boundaries the window is
truncated symmetrically: sample ``i`` of an ``n``-sample series is filtered
over radius ``min(half, i, n - 1 - i)``, so every window stays odd and
centered on its output sample. Reversing the input therefore reverses the
output exactly.

The window mean is accumulated center-out in symmetric pairs. Each pair sum
is commutative, so batch and reversed runs are bit-identical, and streaming
classes reuse the same kernels to stay bit-identical with batch processing.
"""

from __future__ import annotations

import bisect

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import EvenWindowError, LengthMismatchError


def _check_window(window: int) -> int:
    if int(window) != window or window < 1 or window % 2 == 0:
        raise EvenWindowError(f"window must be a positive odd integer, got {window!r}")
    return int(window)


def _median_of(values: np.ndarray) -> float:
    # Odd count: the median is an element, no averaging involved.
    return float(np.median(values))


def _mean_of(values: np.ndarray) -> float:
    """Center-out symmetric-pair mean of an odd-length window."""
    mid = len(values) // 2
    acc = float(values[mid])
    for k in range(1, mid + 1):
        acc += values[mid - k] + values[mid + k]
    return acc / len(values)


def moving_median(series, window: int = 7) -> np.ndarray:
    """Centered moving median with symmetric edge truncation.

    Removes isolated spikes up to ``window // 2`` consecutive samples long
    (interior samples; truncated edge windows offer less protection).
    """
    window = _check_window(window)
    y = np.asarray(series, dtype=float)
    if y.ndim != 1:
        raise ValueError("series must be one-dimensional")
    n = y.size
    half = window // 2
    out = np.empty(n)
    if n >= window:
        windows = np.lib.stride_tricks.sliding_window_view(y, window)
        out[half : n - half] = np.median(windows, axis=-1)
    for i in range(min(half, n)):
        r = min(half, i, n - 1 - i)
        out[i] = _median_of(y[i - r : i + r + 1])
    for i in range(max(n - half, half, 0), n):
        r = min(half, i, n - 1 - i)
        out[i] = _median_of(y[i - r : i + r + 1])
    return out


def moving_mean(series, window: int = 31) -> np.ndarray:
    """Centered moving mean with symmetric edge truncation."""
    window = _check_window(window)
    y = np.asarray(series, dtype=float)
    if y.ndim != 1:
        raise ValueError("series must be one-dimensional")
    n = y.size
    half = window // 2
    out = np.empty(n)
    if n >= window:
        # Vectorized center-out pair accumulation over the interior.
        core = y[half : n - half].copy()
        for k in range(1, half + 1):
            core += y[half - k : n - half - k] + y[half + k : n - half + k]
        out[half : n - half] = core / window
    for i in range(min(half, n)):
        r = min(half, i, n - 1 - i)
        out[i] = _mean_of(y[i - r : i + r + 1])
    for i in range(max(n - half, half, 0), n):
        r = min(half, i, n - 1 - i)
        out[i] = _mean_of(y[i - r : i + r + 1])
    return out


def detrend(filtered, trend) -> np.ndarray:
    """Elementwise difference of a filtered series and its trend."""
    a = np.asarray(filtered, dtype=float)
    b = np.asarray(trend, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatchError(f"series shapes differ: {a.shape} vs {b.shape}")
    return a - b


class _StreamingFilter:
    """Shared emit logic: outputs become final as their lookahead arrives.

    Output ``i`` needs samples up to ``i + min(half, i)``; anything still
    pending when the stream ends is resolved by :meth:`flush` with the
    end-truncated radius. Concatenating all ``push``/``flush`` returns equals
    the batch filter output exactly.
    """

    def __init__(self, window: int):
        self.window = _check_window(window)
        self._half = self.window // 2
        self._buf: list[float] = []
        self._next_out = 0

    def _emit(self, i: int, radius: int) -> float:
        raise NotImplementedError

    def _on_push(self, x: float, seen: int) -> None:
        pass

    def push(self, x: float) -> list[float]:
        self._buf.append(float(x))
        self._on_push(float(x), len(self._buf))
        out = []
        last = len(self._buf) - 1
        while True:
            i = self._next_out
            if i < self._half and last >= 2 * i:
                out.append(self._emit(i, i))
            elif i >= self._half and last >= i + self._half:
                out.append(self._emit(i, self._half))
            else:
                break
            self._next_out += 1
        return out

    def flush(self) -> list[float]:
        n = len(self._buf)
        out = []
        for i in range(self._next_out, n):
            out.append(self._emit(i, min(self._half, i, n - 1 - i)))
        self._next_out = n
        return out

    def reset(self) -> None:
        self._buf.clear()
        self._next_out = 0


class StreamingMedian(_StreamingFilter):
    """Incremental centered moving median.

    A bisect-ordered window buffer serves full-radius outputs in O(window)
    per sample; truncated edge windows fall back to a direct median.
    """

    def __init__(self, window: int = 7):
        super().__init__(window)
        self._sorted: list[float] = []

    def _on_push(self, x: float, seen: int) -> None:
        bisect.insort(self._sorted, x)
        if len(self._sorted) > self.window:
            oldest = self._buf[seen - 1 - self.window]
            del self._sorted[bisect.bisect_left(self._sorted, oldest)]

    def _emit(self, i: int, radius: int) -> float:
        if radius == self._half and len(self._sorted) == self.window:
            return self._sorted[self._half]
        return _median_of(np.array(self._buf[i - radius : i + radius + 1]))

    def reset(self) -> None:
        super().reset()
        self._sorted.clear()


class StreamingMean(_StreamingFilter):
    """Incremental centered moving mean using the symmetric-pair kernel."""

    def _emit(self, i: int, radius: int) -> float:
        window = self._buf[i - radius : i + radius + 1]
        acc = window[radius]
        for k in range(1, radius + 1):
            acc += window[radius - k] + window[radius + k]
        return acc / len(window)


def _transform_columns(x, window: int, func) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        return func(arr, window)
    if arr.ndim != 2:
        raise ValueError("expected a 1-D series or a 2-D (samples, channels) array")
    return np.column_stack([func(arr[:, j], window) for j in range(arr.shape[1])])


class MovingMedianFilter(TransformerMixin, BaseEstimator):
    """Columnwise moving median transformer (rows are time steps)."""

    def __init__(self, window: int = 7):
        self.window = window

    def fit(self, X=None, y=None):
        _check_window(self.window)
        return self

    def transform(self, X) -> np.ndarray:
        _check_window(self.window)
        return _transform_columns(X, self.window, moving_median)


class MovingMeanFilter(TransformerMixin, BaseEstimator):
    """Columnwise moving mean transformer (rows are time steps)."""

    def __init__(self, window: int = 31):
        self.window = window

    def fit(self, X=None, y=None):
        _check_window(self.window)
        return self

    def transform(self, X) -> np.ndarray:
        _check_window(self.window)
        return _transform_columns(X, self.window, moving_mean)
