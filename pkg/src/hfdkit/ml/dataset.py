"""Feature matrices built from per-recording HFD features."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import ChannelMismatch, HeterogeneousWidth, InvalidParameter, ValidationError
from ..hfd import HfdVector, HfdWindowSeries


class Mode(str, enum.Enum):
    WHOLE = "whole"
    WINDOWED = "windowed"


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    X: np.ndarray
    labels: np.ndarray
    subject_ids: np.ndarray
    presentation_ids: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2:
            raise ValidationError(f"feature matrix must be 2-D, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValidationError("feature matrix contains NaN or Inf")
        n = X.shape[0]
        cols = {}
        for name in ("labels", "subject_ids", "presentation_ids"):
            arr = np.asarray(getattr(self, name)).astype(str)
            if arr.shape != (n,):
                raise ValidationError(f"{name} has shape {arr.shape}, expected ({n},)")
            cols[name] = arr
        if len(self.feature_names) != X.shape[1]:
            raise ValidationError("feature_names length does not match matrix width")
        if len(set(cols["labels"])) > 2:
            raise ValidationError(f"expected at most two classes, got {sorted(set(cols['labels']))}")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        for name, arr in cols.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def shape(self) -> tuple[int, int]:
        return self.X.shape

    def __len__(self) -> int:
        return self.X.shape[0]

    def take(self, rows) -> "FeatureMatrix":
        rows = np.asarray(rows, dtype=int)
        return FeatureMatrix(self.X[rows], self.labels[rows], self.subject_ids[rows],
                             self.presentation_ids[rows], self.feature_names)


def _channel_order(features, registry_order):
    if registry_order is not None:
        order = tuple(registry_order)
    else:
        order = features[0].channels
    for f in features:
        if set(f.channels) != set(order):
            raise ChannelMismatch(set(f.channels) ^ set(order))
    return order


def build_dataset(features: Sequence[HfdVector | HfdWindowSeries], mode: Mode | str = Mode.WHOLE,
                  registry_order: Sequence[str] | None = None) -> FeatureMatrix:
    """Stack HFD features into a (samples, features) matrix.

    Whole mode gives one column per channel. Windowed mode gives
    ``n_windows * n_channels`` columns, window index as the outer loop and
    channels in registry order inside it. Rows follow input order.
    """
    mode = Mode(mode)
    features = list(features)
    if not features:
        raise InvalidParameter("no features to assemble")
    expected = HfdVector if mode is Mode.WHOLE else HfdWindowSeries
    wrong = [i for i, f in enumerate(features) if not isinstance(f, expected)]
    if wrong:
        raise ValidationError(f"mode {mode.value!r} expects {expected.__name__}; rows {wrong[:5]} differ")
    order = _channel_order(features, registry_order)
    if mode is Mode.WHOLE:
        X = np.array([[f.values[c] for c in order] for f in features], dtype=np.float64)
        names = order
    else:
        widths = [f.n_windows for f in features]
        ref = Counter(widths).most_common(1)[0][0]
        offenders = [f"{f.subject_id}/{f.presentation_id}" for f, w in zip(features, widths) if w != ref]
        if offenders:
            raise HeterogeneousWidth(offenders)
        X = np.array([[f.values[c][w] for w in range(ref) for c in order] for f in features], dtype=np.float64)
        names = tuple(f"w{w}:{c}" for w in range(ref) for c in order)
    missing_group = [i for i, f in enumerate(features) if f.group is None]
    if missing_group:
        raise ValidationError(f"rows {missing_group[:5]} carry no group label")
    return FeatureMatrix(
        X=X.reshape(len(features), len(names)),
        labels=np.array([f.group.value for f in features]),
        subject_ids=np.array([f.subject_id for f in features]),
        presentation_ids=np.array([f.presentation_id for f in features]),
        feature_names=names,
    )


def build_presentation_datasets(features: Sequence[HfdVector | HfdWindowSeries], mode: Mode | str = Mode.WINDOWED,
                                registry_order: Sequence[str] | None = None) -> dict[str, FeatureMatrix]:
    """One matrix per presentation id; widths may differ between presentations."""
    groups: dict[str, list] = {}
    for f in features:
        groups.setdefault(f.presentation_id, []).append(f)
    return {pid: build_dataset(fs, mode, registry_order) for pid, fs in groups.items()}
