"""Per-channel group contrasts, one-sided Welch t-tests and channel ranking."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats as sps

from .errors import ChannelMismatch, DegenerateVariance, InvalidParameter, MissingStyle, ValidationError
from .hfd import HfdVector
from .signal import Group, Style


class Direction(str, enum.Enum):
    LESS = "less"  # alternative: mean(a) < mean(b)
    GREATER = "greater"  # alternative: mean(a) > mean(b)


class RankBy(str, enum.Enum):
    ABS_DELTA = "abs_delta"
    SIGNED_DELTA = "signed_delta"


def welch_t(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Welch t statistic and Welch-Satterthwaite degrees of freedom."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise InvalidParameter(f"each sample needs at least 2 values, got {a.size} and {b.size}")
    va = a.var(ddof=1) / a.size
    vb = b.var(ddof=1) / b.size
    if va == 0 and vb == 0:
        raise DegenerateVariance("both samples are constant")
    t = (a.mean() - b.mean()) / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1))
    return float(t), float(df)


def one_sided_t(a: Sequence[float], b: Sequence[float], direction: Direction | str) -> tuple[float, float]:
    """One-sided Welch two-sample t-test.

    ``direction="less"`` tests the alternative mean(a) < mean(b); ``"greater"``
    the reverse. Returns ``(t, p)``.
    """
    direction = Direction(direction)
    t, df = welch_t(a, b)
    p = sps.t.cdf(t, df) if direction is Direction.LESS else sps.t.sf(t, df)
    return t, float(p)


@dataclass(frozen=True)
class ChannelDelta:
    """Per-channel mean(group A) - mean(group B) with one-sided test results.

    ``t_statistic``/``p_value`` are NaN for channels where the test is not
    defined (fewer than two samples per group, or both groups constant).
    """

    channels: tuple[str, ...]
    group_a_mean: np.ndarray
    group_b_mean: np.ndarray
    delta: np.ndarray
    t_statistic: np.ndarray
    p_value: np.ndarray
    direction: Direction | None = None

    def __getitem__(self, channel: str) -> float:
        return float(self.delta[self.channels.index(channel)])

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.channels, self.delta.tolist()))

    def negated(self) -> "ChannelDelta":
        flip = {Direction.LESS: Direction.GREATER, Direction.GREATER: Direction.LESS}.get(self.direction)
        return ChannelDelta(self.channels, self.group_b_mean, self.group_a_mean, -self.delta,
                            -self.t_statistic, self.p_value.copy(), flip)


def _check_channels(vectors: Sequence[HfdVector]) -> tuple[str, ...]:
    ref = vectors[0].channels
    for v in vectors[1:]:
        if set(v.channels) != set(ref):
            raise ChannelMismatch(set(v.channels) ^ set(ref))
    return ref


def _stack(vectors: Sequence[HfdVector], channels: tuple[str, ...]) -> np.ndarray:
    return np.array([[v.values[c] for c in channels] for v in vectors], dtype=np.float64)


def _grand_mean(mat: np.ndarray) -> np.ndarray:
    # sorted column-wise so the mean is independent of row order
    return np.sort(mat, axis=0).mean(axis=0)


def group_delta(experts: Sequence[HfdVector], novices: Sequence[HfdVector],
                direction: Direction | str = Direction.LESS) -> ChannelDelta:
    """Grand mean over all (subject, presentation) pairs of group A minus group B, per channel.

    The t-test direction must be stated explicitly by callers who care about
    p-values; ``"less"`` tests whether group A has lower HFD than group B.
    """
    experts, novices = list(experts), list(novices)
    if not experts or not novices:
        raise InvalidParameter("both groups need at least one HFD vector")
    direction = Direction(direction)
    channels = _check_channels(experts + novices)
    a = _stack(experts, channels)
    b = _stack(novices, channels)
    ma, mb = _grand_mean(a), _grand_mean(b)
    t = np.full(len(channels), np.nan)
    p = np.full(len(channels), np.nan)
    if len(experts) >= 2 and len(novices) >= 2:
        for i in range(len(channels)):
            try:
                t[i], p[i] = one_sided_t(np.sort(a[:, i]), np.sort(b[:, i]), direction)
            except DegenerateVariance:
                pass
    return ChannelDelta(channels, ma, mb, ma - mb, t, p, direction)


def split_by_group(vectors: Iterable[HfdVector]) -> tuple[list[HfdVector], list[HfdVector]]:
    experts, novices = [], []
    for v in vectors:
        if v.group is Group.EXPERT:
            experts.append(v)
        elif v.group is Group.NOVICE:
            novices.append(v)
        else:
            raise ValidationError(f"HFD vector {v.subject_id}/{v.presentation_id} has no group label")
    return experts, novices


def top_n_channels(delta: ChannelDelta, n: int, by: RankBy | str = RankBy.ABS_DELTA,
                   registry_order: Sequence[str] | None = None) -> list[tuple[str, float]]:
    """Channels ranked by |delta| (or signed delta), descending.

    Ties keep registry order (``registry_order`` if given, otherwise the
    delta's own channel order).
    """
    by = RankBy(by)
    if not 0 <= n <= len(delta.channels):
        raise InvalidParameter(f"n must lie in [0, {len(delta.channels)}], got {n}")
    order = list(registry_order) if registry_order is not None else list(delta.channels)
    pos = {c: i for i, c in enumerate(order)}
    if set(pos) != set(delta.channels):
        raise ChannelMismatch(set(pos) ^ set(delta.channels))
    vals = delta.as_dict()
    key = (lambda c: -abs(vals[c])) if by is RankBy.ABS_DELTA else (lambda c: -vals[c])
    ranked = sorted(order, key=lambda c: (key(c), pos[c]))
    return [(c, vals[c]) for c in ranked[:n]]


@dataclass(frozen=True)
class StyleDelta:
    """Per-channel mean over algebraic minus mean over geometric presentations."""

    channels: tuple[str, ...]
    algebraic_mean: np.ndarray
    geometric_mean: np.ndarray
    delta: np.ndarray

    def __getitem__(self, channel: str) -> float:
        return float(self.delta[self.channels.index(channel)])


def style_delta(vectors: Sequence[HfdVector]) -> StyleDelta:
    """Within-group style contrast: mean(algebraic) - mean(geometric) per channel."""
    vectors = list(vectors)
    untagged = [v for v in vectors if v.style is None]
    if untagged:
        raise MissingStyle(f"{len(untagged)} HFD vector(s) carry no presentation style")
    va = [v for v in vectors if v.style is Style.ALGEBRAIC]
    vg = [v for v in vectors if v.style is Style.GEOMETRIC]
    missing = [name for name, vs in (("algebraic", va), ("geometric", vg)) if not vs]
    if missing:
        raise MissingStyle(f"no {' or '.join(missing)} presentations in the group")
    channels = _check_channels(vectors)
    ma = _grand_mean(_stack(va, channels))
    mg = _grand_mean(_stack(vg, channels))
    return StyleDelta(channels, ma, mg, ma - mg)


def style_split_group_delta(experts: Sequence[HfdVector], novices: Sequence[HfdVector],
                            direction: Direction | str = Direction.LESS) -> dict[Style, ChannelDelta]:
    """Expert-minus-novice contrast computed separately on each presentation style."""
    out = {}
    for style in (Style.ALGEBRAIC, Style.GEOMETRIC):
        ex = [v for v in experts if v.style is style]
        nov = [v for v in novices if v.style is style]
        if not ex or not nov:
            raise MissingStyle(f"no {style.name.lower()} presentations for one of the groups")
        out[style] = group_delta(ex, nov, direction)
    return out


def _fmt(x: float) -> str:
    return "nan" if not np.isfinite(x) else format(float(x), ".12g")


def export_heatmap(delta: ChannelDelta, registry_order: Sequence[str] | None = None) -> str:
    """CSV text with columns channel, delta, p_value in registry order."""
    order = list(registry_order) if registry_order is not None else list(delta.channels)
    idx = {c: i for i, c in enumerate(delta.channels)}
    if set(order) != set(idx):
        raise ChannelMismatch(set(order) ^ set(idx))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["channel", "delta", "p_value"])
    for c in order:
        i = idx[c]
        w.writerow([c, _fmt(delta.delta[i]), _fmt(delta.p_value[i])])
    return buf.getvalue()


def delta_table(delta: ChannelDelta) -> str:
    """CSV text with group means, delta, t and p per channel."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["channel", "expert_mean", "novice_mean", "delta", "t_statistic", "p_value"])
    for i, c in enumerate(delta.channels):
        w.writerow([c, _fmt(delta.group_a_mean[i]), _fmt(delta.group_b_mean[i]), _fmt(delta.delta[i]),
                    _fmt(delta.t_statistic[i]), _fmt(delta.p_value[i])])
    return buf.getvalue()


def ttest_table(delta: ChannelDelta) -> str:
    """CSV text with the one-sided Welch statistic per channel."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["channel", "t_statistic", "p_value", "direction"])
    for i, c in enumerate(delta.channels):
        w.writerow([c, _fmt(delta.t_statistic[i]), _fmt(delta.p_value[i]), delta.direction.value])
    return buf.getvalue()


def style_contrast_table(expert: StyleDelta, novice: StyleDelta, registry_order: Sequence[str] | None = None) -> str:
    """CSV text of the within-group algebraic-minus-geometric contrast for each group."""
    order = list(registry_order) if registry_order is not None else list(expert.channels)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["channel", "expert_style_delta", "novice_style_delta"])
    for c in order:
        w.writerow([c, _fmt(expert[c]), _fmt(novice[c])])
    return buf.getvalue()


def style_split_table(per_style: dict[Style, ChannelDelta], registry_order: Sequence[str] | None = None) -> str:
    """CSV text of the expert-minus-novice delta per channel for each presentation style."""
    a, g = per_style[Style.ALGEBRAIC], per_style[Style.GEOMETRIC]
    order = list(registry_order) if registry_order is not None else list(a.channels)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["channel", "algebraic_delta", "geometric_delta"])
    for c in order:
        w.writerow([c, _fmt(a[c]), _fmt(g[c])])
    return buf.getvalue()
