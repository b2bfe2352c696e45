"""Higuchi fractal dimension.

For a series x(1..N) and stride k, the offset-m subseries
x(m), x(m+k), ..., x(m + M k) with M = floor((N-m)/k) has normalized length

    L_m(k) = (1/k) * sum_i |x(m+ik) - x(m+(i-1)k)| * (N-1) / (M k)

L(k) is the mean of L_m(k) over m = 1..k, and the fractal dimension is the
OLS slope (with intercept) of log L(k) against log(1/k) for k = 1..k_max.
Offsets and strides are 1-based throughout this module.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

import numpy as np
from joblib import Parallel, delayed

from .errors import (
    ChannelErrors,
    DegenerateCurveLength,
    InvalidOffset,
    InvalidParameter,
    SignalTooShort,
    ValidationError,
)
from .signal import Group, Recording, Style, TimeSeries, segment

log = logging.getLogger(__name__)

SANITY_BAND = (0.5, 2.5)
PHYSICAL_BAND = (1.0, 2.0)


@dataclass(frozen=True)
class HfdParams:
    k_max: int = 100

    def __post_init__(self):
        if int(self.k_max) != self.k_max or self.k_max < 2:
            raise InvalidParameter(f"k_max must be an integer >= 2, got {self.k_max}")
        object.__setattr__(self, "k_max", int(self.k_max))

    def check_length(self, n: int) -> None:
        if self.k_max > max_kmax(n):
            raise SignalTooShort(f"k_max={self.k_max} needs at least {2 * self.k_max + 1} samples, got {n}")


def max_kmax(n: int) -> int:
    """Largest admissible k_max for a series of ``n`` samples."""
    return (n - 1) // 2


def _as_array(x) -> np.ndarray:
    if isinstance(x, TimeSeries):
        return x.samples
    arr = np.asarray(x, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("series contains NaN or Inf")
    return arr


def curve_length_lmk(x, m: int, k: int) -> float:
    """Normalized curve length L_m(k) of the offset-``m`` stride-``k`` subseries."""
    x = _as_array(x)
    n = x.size
    if k < 1 or m < 1 or m > k:
        raise InvalidOffset(f"need 1 <= m <= k, got m={m}, k={k}")
    M = (n - m) // k
    if M < 1:
        raise InvalidOffset(f"subseries m={m}, k={k} has fewer than two points (N={n})")
    sub = x[m - 1:m - 1 + M * k + 1:k]
    total = np.abs(np.diff(sub)).sum()
    return float(total * (n - 1) / (M * k) / k)


def _offset_sums(x: np.ndarray, k: int) -> np.ndarray:
    # Column j of the reshaped difference array holds the stride-k pairs for
    # offset m = j + 1; axis-0 reduction accumulates rows in order.
    d = np.abs(x[k:] - x[:-k])
    pad = (-d.size) % k
    if pad:
        d = np.concatenate([d, np.zeros(pad)])
    return d.reshape(-1, k).sum(axis=0)


def curve_length_lk(x, k: int) -> float:
    """Mean curve length L(k) over all k offsets."""
    x = _as_array(x)
    n = x.size
    if k < 1:
        raise InvalidOffset(f"k must be >= 1, got {k}")
    if (n - k) // k < 1:
        raise InvalidOffset(f"stride k={k} leaves a subseries with fewer than two points (N={n})")
    return float(_lk_from_sums(_offset_sums(x, k), n, k))


def _lk_from_sums(sums: np.ndarray, n: int, k: int) -> float:
    M = (n - np.arange(1, k + 1)) // k
    return (sums * (n - 1) / (M * k) / k).sum() / k


def curve_lengths(x, k_max: int) -> np.ndarray:
    """L(k) for k = 1..k_max (index 0 holds k=1)."""
    x = _as_array(x)
    HfdParams(k_max).check_length(x.size)
    n = x.size
    return np.array([_lk_from_sums(_offset_sums(x, k), n, k) for k in range(1, k_max + 1)])


def loglog_slope(lengths: np.ndarray) -> float:
    """OLS slope of log L(k) against log(1/k), k = 1..len(lengths), with intercept."""
    lengths = np.asarray(lengths, dtype=np.float64)
    zero = np.flatnonzero(lengths <= 0)
    if zero.size:
        raise DegenerateCurveLength(int(zero[0]) + 1)
    u = -np.log(np.arange(1, lengths.size + 1, dtype=np.float64))
    v = np.log(lengths)
    du = u - u.mean()
    return float((du * (v - v.mean())).sum() / (du * du).sum())


def higuchi_fd(x, params: HfdParams | int) -> float:
    """Higuchi fractal dimension of a single series.

    Raises ``SignalTooShort`` if ``k_max > (N-1)//2`` and
    ``DegenerateCurveLength`` if any L(k) is zero.
    """
    if not isinstance(params, HfdParams):
        params = HfdParams(params)
    return loglog_slope(curve_lengths(x, params.k_max))


def hfd_sweep(x, k_maxes) -> dict[int, float]:
    """HFD at several k_max values, sharing one L(k) computation.

    L(k) does not depend on k_max, so each estimate is the fit over a prefix.
    """
    k_maxes = sorted(int(k) for k in k_maxes)
    lengths = curve_lengths(x, k_maxes[-1])
    return {k: loglog_slope(lengths[:k]) for k in k_maxes}


@dataclass(frozen=True, eq=False)
class HfdVector:
    """One HFD value per channel for one recording."""

    values: Mapping[str, float]
    params: HfdParams | None = None
    subject_id: str = ""
    presentation_id: str = ""
    group: Group | None = None
    style: Style | None = None

    def __post_init__(self):
        vals = {str(k): float(v) for k, v in dict(self.values).items()}
        bad = {k: v for k, v in vals.items() if not np.isfinite(v) or not SANITY_BAND[0] <= v <= SANITY_BAND[1]}
        if bad:
            raise ValidationError(f"HFD values outside sanity band {SANITY_BAND}: {bad}")
        outside = [k for k, v in vals.items() if not PHYSICAL_BAND[0] <= v <= PHYSICAL_BAND[1]]
        if outside:
            log.debug("%s/%s: %d channel(s) outside [1, 2]", self.subject_id, self.presentation_id, len(outside))
        object.__setattr__(self, "values", MappingProxyType(vals))
        if self.group is not None:
            object.__setattr__(self, "group", Group.parse(self.group))
        if self.style is not None:
            object.__setattr__(self, "style", Style.parse(self.style))

    @property
    def channels(self) -> tuple[str, ...]:
        return tuple(self.values)

    def as_array(self) -> np.ndarray:
        return np.fromiter(self.values.values(), dtype=np.float64, count=len(self.values))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True, eq=False)
class HfdWindowSeries:
    """Per-channel HFD values, one per non-overlapping window."""

    values: Mapping[str, tuple[float, ...]]
    window_seconds: float
    params: HfdParams | None = None
    subject_id: str = ""
    presentation_id: str = ""
    group: Group | None = None
    style: Style | None = None

    def __post_init__(self):
        vals = {str(k): tuple(float(x) for x in v) for k, v in dict(self.values).items()}
        counts = {len(v) for v in vals.values()}
        if len(counts) > 1:
            raise ValidationError(f"channels have unequal window counts: {sorted(counts)}")
        object.__setattr__(self, "values", MappingProxyType(vals))
        if self.group is not None:
            object.__setattr__(self, "group", Group.parse(self.group))
        if self.style is not None:
            object.__setattr__(self, "style", Style.parse(self.style))

    @property
    def channels(self) -> tuple[str, ...]:
        return tuple(self.values)

    @property
    def n_windows(self) -> int:
        return len(next(iter(self.values.values()))) if self.values else 0

    def as_array(self) -> np.ndarray:
        """(channels, windows) array."""
        return np.array([v for v in self.values.values()], dtype=np.float64).reshape(len(self.values), -1)


def _provenance(rec: Recording) -> dict:
    return dict(subject_id=rec.subject_id, presentation_id=rec.presentation_id, group=rec.group, style=rec.style)


def _safe_fd(x, params):
    try:
        return higuchi_fd(x, params), None
    except ValidationError as exc:
        return None, exc


def hfd_per_channel(rec: Recording, params: HfdParams | int) -> HfdVector:
    """One HFD value per channel, in the recording's channel order.

    Failures are collected over all channels and raised together as
    ``ChannelErrors`` keyed by channel label.
    """
    if not isinstance(params, HfdParams):
        params = HfdParams(params)
    values, failures = {}, {}
    for label, ts in rec.channels.items():
        v, err = _safe_fd(ts, params)
        if err is None:
            values[label] = v
        else:
            failures[label] = err
    if failures:
        raise ChannelErrors(failures)
    return HfdVector(values, params, **_provenance(rec))


def hfd_windowed(rec: Recording, params: HfdParams | int, window_seconds: float) -> HfdWindowSeries:
    """HFD per channel per non-overlapping window (no overlap, no detrending)."""
    if not isinstance(params, HfdParams):
        params = HfdParams(params)
    values, failures = {}, {}
    for label, ts in rec.channels.items():
        row = []
        for w, win in enumerate(segment(ts, window_seconds)):
            v, err = _safe_fd(win, params)
            if err is None:
                row.append(v)
            else:
                failures[(label, w)] = err
        values[label] = row
    if failures:
        raise ChannelErrors(failures)
    return HfdWindowSeries(values, window_seconds, params, **_provenance(rec))


def compute_features(recordings, params: HfdParams | int, window_seconds: float | None = None,
                     n_jobs: int = 1) -> list:
    """HFD vectors (or window series) for many recordings, optionally in parallel.

    Each recording is processed independently by the same pure kernel, so the
    result does not depend on ``n_jobs``.
    """
    recordings = list(recordings)
    if window_seconds is None:
        fn, extra = hfd_per_channel, ()
    else:
        fn, extra = hfd_windowed, (window_seconds,)
    if n_jobs == 1 or len(recordings) < 2:
        return [fn(r, params, *extra) for r in recordings]
    return Parallel(n_jobs=n_jobs)(delayed(fn)(r, params, *extra) for r in recordings)
