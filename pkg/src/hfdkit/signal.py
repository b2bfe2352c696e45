"""Time-series and recording data model, channel registry and windowing."""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidParameter, MissingChannel, ValidationError, WindowTooShort

# Non-brain channels (eye movement and cardiac leads).
DISCARD_CHANNELS = frozenset({"VEOGL", "HEOGL", "HEOGR", "VEOGU", "HEART"})

REGISTRY_RESOURCE = "channels_v1.txt"


class Group(str, enum.Enum):
    EXPERT = "expert"
    NOVICE = "novice"

    @classmethod
    def parse(cls, value) -> "Group":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValidationError(f"invalid group {value!r}; expected 'expert' or 'novice'") from None


class Style(str, enum.Enum):
    ALGEBRAIC = "A"
    GEOMETRIC = "G"

    @classmethod
    def parse(cls, value) -> "Style":
        if isinstance(value, cls):
            return value
        v = str(value).strip().upper()
        aliases = {"ALGEBRAIC": "A", "SYMBOLIC": "A", "GEOMETRIC": "G"}
        try:
            return cls(aliases.get(v, v))
        except ValueError:
            raise ValidationError(f"invalid presentation style {value!r}; expected 'A' or 'G'") from None


@dataclass(frozen=True)
class PresentationStyle:
    style: Style
    ordinal: int

    @classmethod
    def parse(cls, presentation_id: str) -> "PresentationStyle":
        """Parse identifiers such as ``"7A"`` or ``"12G"``."""
        m = re.fullmatch(r"\s*(\d+)\s*([AaGg])\s*", str(presentation_id))
        if m is None:
            raise ValidationError(f"cannot parse presentation id {presentation_id!r}")
        return cls(Style.parse(m.group(2)), int(m.group(1)))

    @property
    def label(self) -> str:
        return f"{self.ordinal}{self.style.value}"


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """A single channel of samples (microvolts) at a fixed sample rate."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64, copy=True).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise ValidationError("time series contains NaN or Inf")
        if not (self.sample_rate_hz > 0):
            raise ValidationError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return self.sample_rate_hz == other.sample_rate_hz and np.array_equal(self.samples, other.samples)

    __hash__ = None


@dataclass(frozen=True)
class ChannelRegistry:
    labels: tuple[str, ...]
    discard: frozenset = DISCARD_CHANNELS

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "discard", frozenset(self.discard))
        if len(set(labels)) != len(labels):
            dupes = sorted({x for x in labels if labels.count(x) > 1})
            raise ValidationError(f"duplicate registry labels: {dupes}")
        clash = self.discard.intersection(labels)
        if clash:
            raise ValidationError(f"registry labels overlap the discard list: {sorted(clash)}")

    @classmethod
    def default(cls) -> "ChannelRegistry":
        """The shipped 124-channel scalp montage."""
        text = resources.files("hfdkit.resources").joinpath(REGISTRY_RESOURCE).read_text()
        return cls(tuple(parse_registry_text(text)))

    @classmethod
    def from_file(cls, path) -> "ChannelRegistry":
        with open(path) as fh:
            return cls(tuple(parse_registry_text(fh.read())))

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)


def parse_registry_text(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


@dataclass(frozen=True, eq=False)
class Recording:
    """One subject watching one presentation, all channels equal length."""

    subject_id: str
    group: Group
    presentation_id: str
    style: Style
    channels: Mapping[str, TimeSeries] = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "subject_id", str(self.subject_id))
        object.__setattr__(self, "presentation_id", str(self.presentation_id))
        object.__setattr__(self, "group", Group.parse(self.group))
        object.__setattr__(self, "style", Style.parse(self.style))
        chans = dict(self.channels)
        if chans:
            lengths = {len(ts) for ts in chans.values()}
            rates = {ts.sample_rate_hz for ts in chans.values()}
            if len(lengths) != 1 or len(rates) != 1:
                raise ValidationError(
                    f"recording {self.subject_id}/{self.presentation_id}: channels differ in length or sample rate"
                )
        object.__setattr__(self, "channels", MappingProxyType(chans))

    @classmethod
    def from_array(cls, data, labels: Sequence[str], sample_rate_hz: float, *, subject_id, group,
                   presentation_id, style=None) -> "Recording":
        """Build from a (channels, samples) array."""
        data = np.asarray(data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] != len(labels):
            raise ValidationError(f"expected array of shape ({len(labels)}, n), got {data.shape}")
        if style is None:
            style = PresentationStyle.parse(presentation_id).style
        chans = {lab: TimeSeries(row, sample_rate_hz) for lab, row in zip(labels, data)}
        return cls(subject_id, group, presentation_id, style, chans)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.channels)

    @property
    def sample_rate_hz(self) -> float:
        return next(iter(self.channels.values())).sample_rate_hz

    @property
    def n_samples(self) -> int:
        return len(next(iter(self.channels.values())))

    def as_array(self) -> np.ndarray:
        return np.vstack([ts.samples for ts in self.channels.values()])

    def replace_channels(self, channels: Mapping[str, TimeSeries]) -> "Recording":
        return Recording(self.subject_id, self.group, self.presentation_id, self.style, channels)

    def __eq__(self, other):
        if not isinstance(other, Recording):
            return NotImplemented
        return (
            (self.subject_id, self.group, self.presentation_id, self.style)
            == (other.subject_id, other.group, other.presentation_id, other.style)
            and list(self.channels) == list(other.channels)
            and all(self.channels[k] == other.channels[k] for k in self.channels)
        )

    __hash__ = None


def filter_channels(recording: Recording, registry: ChannelRegistry) -> Recording:
    """Keep exactly the registry labels, in registry order.

    Discard-list channels and anything else outside the registry are dropped.
    Raises ``MissingChannel`` naming every registry label that is absent.
    """
    missing = [lab for lab in registry.labels if lab not in recording.channels]
    if missing:
        raise MissingChannel(missing)
    return recording.replace_channels({lab: recording.channels[lab] for lab in registry.labels})


def window_samples(window_seconds: float, sample_rate_hz: float) -> int:
    # small epsilon so e.g. 0.29 s at 100 Hz floors to 29, not 28
    return int(math.floor(window_seconds * sample_rate_hz + 1e-9))


def segment(ts: TimeSeries, window_seconds: float) -> list[TimeSeries]:
    """Split into contiguous non-overlapping windows; the trailing partial window is dropped."""
    if not (window_seconds > 0):
        raise InvalidParameter(f"window_seconds must be positive, got {window_seconds}")
    w = window_samples(window_seconds, ts.sample_rate_hz)
    if w < 2:
        raise WindowTooShort(f"window of {window_seconds} s at {ts.sample_rate_hz} Hz is {w} sample(s)")
    n = len(ts) // w
    return [TimeSeries(ts.samples[i * w:(i + 1) * w], ts.sample_rate_hz) for i in range(n)]
