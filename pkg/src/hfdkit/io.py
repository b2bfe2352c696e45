"""Reading and writing recordings, manifests, feature tables and JSON reports.

On-disk layout of a dataset directory: one ``<name>.csv`` per recording (header
row of channel labels, one column per channel, one row per sample) next to a
``<name>.json`` sidecar::

    {"subject_id": "S001", "group": "expert", "presentation_id": "7A",
     "style": "A", "sample_rate_hz": 2048}
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from .errors import (
    DatasetErrors,
    HfdkitError,
    ManifestConflict,
    ParseError,
    ValidationError,
)
from .hfd import HfdParams, HfdVector, HfdWindowSeries
from .signal import ChannelRegistry, Group, PresentationStyle, Recording, Style, TimeSeries, filter_channels

log = logging.getLogger(__name__)

FLOAT_DIGITS = 12
FEATURE_COLUMNS = ["subject_id", "presentation_id", "channel", "window_index", "hfd"]


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    subject_id: str
    group: Group
    presentation_id: str
    style: Style
    sample_rate_hz: float


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self):
        seen = {}
        for e in self.entries:
            key = (e.subject_id, e.presentation_id)
            if key in seen:
                raise ManifestConflict(
                    f"duplicate (subject, presentation) {key}: {seen[key]} and {e.path}"
                )
            seen[key] = e.path

    def __len__(self):
        return len(self.entries)

    @classmethod
    def from_directory(cls, root) -> "DatasetManifest":
        """Collect every ``*.json`` sidecar that has a matching ``*.csv``."""
        root = Path(root)
        if not root.is_dir():
            raise ValidationError(f"dataset directory not found: {root}")
        entries, errors = [], []
        for side in sorted(root.glob("*.json")):
            data_path = side.with_suffix(".csv")
            if not data_path.exists():
                continue
            try:
                entries.append(parse_sidecar(side, data_path))
            except HfdkitError as exc:
                errors.append(exc)
        if errors:
            raise DatasetErrors(errors)
        return cls(tuple(entries))

    def groups(self) -> dict[tuple[str, str], tuple[Group, Style]]:
        return {(e.subject_id, e.presentation_id): (e.group, e.style) for e in self.entries}


def parse_sidecar(path, data_path=None) -> ManifestEntry:
    path = Path(path)
    try:
        meta = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.msg) from None
    missing = [k for k in ("subject_id", "group", "presentation_id", "sample_rate_hz") if k not in meta]
    if missing:
        raise ParseError(path, 1, f"missing field(s) {missing}")
    try:
        style = meta.get("style") or PresentationStyle.parse(meta["presentation_id"]).style
        rate = float(meta["sample_rate_hz"])
        if not rate > 0:
            raise ValidationError(f"sample_rate_hz must be positive, got {rate}")
        return ManifestEntry(
            path=Path(data_path) if data_path else path.with_suffix(".csv"),
            subject_id=str(meta["subject_id"]),
            group=Group.parse(meta["group"]),
            presentation_id=str(meta["presentation_id"]),
            style=Style.parse(style),
            sample_rate_hz=rate,
        )
    except ValidationError as exc:
        raise ParseError(path, 1, str(exc)) from None


def _bad_line(df: pd.DataFrame) -> tuple[int, str] | None:
    num = df.apply(pd.to_numeric, errors="coerce")
    bad = ~np.isfinite(num.to_numpy(dtype=np.float64))
    if bad.any():
        r, c = np.argwhere(bad)[0]
        return int(r) + 2, f"non-numeric or missing value {df.iat[r, c]!r} in column {df.columns[c]!r}"
    return None


def read_recording_csv(path, entry: ManifestEntry) -> Recording:
    path = Path(path)
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=True)
    except pd.errors.ParserError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ParseError(path, int(m.group(1)) if m else 0, str(exc).strip()) from None
    except (OSError, pd.errors.EmptyDataError) as exc:
        raise ParseError(path, 0, str(exc)) from None
    if df.shape[0] < 2:
        raise ParseError(path, 2, "need at least two samples")
    dupes = df.columns[df.columns.duplicated()].tolist()
    if dupes or any(re.search(r"\.\d+$", c) and c.rsplit(".", 1)[0] in df.columns for c in df.columns):
        raise ParseError(path, 1, f"duplicate channel label(s) {dupes}")
    bad = _bad_line(df)
    if bad:
        raise ParseError(path, *bad)
    data = df.to_numpy(dtype=np.float64)
    channels = {str(c): TimeSeries(data[:, i], entry.sample_rate_hz) for i, c in enumerate(df.columns)}
    return Recording(entry.subject_id, entry.group, entry.presentation_id, entry.style, channels)


def load_dataset(manifest: DatasetManifest, registry: ChannelRegistry | None = None) -> list[Recording]:
    """Read and channel-filter every manifest entry.

    All files are attempted; failures are collected (with file provenance) and
    raised together as ``DatasetErrors``.
    """
    if len(manifest) == 0:
        log.warning("empty manifest: no recordings loaded")
        return []
    registry = registry or ChannelRegistry.default()
    out, errors = [], []
    for entry in manifest.entries:
        try:
            rec = read_recording_csv(entry.path, entry)
            out.append(filter_channels(rec, registry))
        except HfdkitError as exc:
            if not isinstance(exc, ParseError):
                exc = ParseError(entry.path, 1, str(exc))
            errors.append(exc)
    if errors:
        raise DatasetErrors(errors)
    return out


def write_recording(rec: Recording, directory, name: str | None = None) -> Path:
    """Write ``<name>.csv`` plus its sidecar; returns the CSV path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    name = name or f"{rec.subject_id}_{rec.presentation_id}"
    csv_path = directory / f"{name}.csv"
    df = pd.DataFrame(rec.as_array().T, columns=list(rec.labels))
    df.to_csv(csv_path, index=False, float_format="%.10g", lineterminator="\n")
    meta = {
        "subject_id": rec.subject_id,
        "group": rec.group.value,
        "presentation_id": rec.presentation_id,
        "style": rec.style.value,
        "sample_rate_hz": rec.sample_rate_hz,
    }
    (directory / f"{name}.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return csv_path


def fmt_float(x: float) -> str:
    if x is None or not math.isfinite(x):
        return "nan"
    return format(float(x), f".{FLOAT_DIGITS}g")


def header_lines(provenance: dict | None) -> str:
    if not provenance:
        return ""
    return "".join(f"# {k}={provenance[k]}\n" for k in sorted(provenance))


def features_csv(features: Sequence[HfdVector | HfdWindowSeries], provenance: dict | None = None) -> str:
    """Long-format feature table: one row per (recording, channel, window)."""
    buf = io.StringIO()
    buf.write(header_lines(provenance))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FEATURE_COLUMNS)
    for f in features:
        if isinstance(f, HfdVector):
            for ch, v in f.values.items():
                w.writerow([f.subject_id, f.presentation_id, ch, "full", fmt_float(v)])
        else:
            for ch, vals in f.values.items():
                for i, v in enumerate(vals):
                    w.writerow([f.subject_id, f.presentation_id, ch, i, fmt_float(v)])
    return buf.getvalue()


def _read_header(path) -> dict:
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            k, _, v = line[1:].strip().partition("=")
            meta[k.strip()] = v.strip()
    return meta


def read_grouping(path) -> dict[tuple[str, str], tuple[Group, Style]]:
    """(subject, presentation) -> (group, style) from a dataset directory or a CSV.

    The CSV form needs columns subject_id, presentation_id, group and
    optionally style (otherwise parsed from the presentation id).
    """
    path = Path(path)
    if path.is_dir():
        return DatasetManifest.from_directory(path).groups()
    df = pd.read_csv(path, dtype=str, comment="#")
    need = {"subject_id", "presentation_id", "group"}
    if not need.issubset(df.columns):
        raise ParseError(path, 1, f"grouping file needs columns {sorted(need)}")
    out = {}
    for i, row in enumerate(df.itertuples(index=False), start=2):
        key = (row.subject_id, row.presentation_id)
        if key in out:
            raise ManifestConflict(f"duplicate (subject, presentation) {key} in {path}")
        try:
            style = getattr(row, "style", None)
            style = Style.parse(style) if isinstance(style, str) and style else PresentationStyle.parse(
                row.presentation_id).style
            out[key] = (Group.parse(row.group), style)
        except ValidationError as exc:
            raise ParseError(path, i, str(exc)) from None
    return out


def read_features(path, grouping: dict | None = None, registry_order: Sequence[str] | None = None) -> list:
    """Parse a feature table back into HFD vectors / window series.

    Rows with ``window_index == "full"`` become ``HfdVector``; numeric window
    indices become ``HfdWindowSeries``. Group and style come from ``grouping``.
    Recordings keep first-appearance order.
    """
    path = Path(path)
    meta = _read_header(path)
    df = pd.read_csv(path, dtype=str, comment="#", keep_default_na=False)
    if list(df.columns) != FEATURE_COLUMNS:
        raise ParseError(path, 1, f"expected columns {FEATURE_COLUMNS}, got {list(df.columns)}")
    k_max = meta.get("k_max")
    params = HfdParams(int(k_max)) if k_max and k_max.isdigit() else None
    window_seconds = float(meta["window_seconds"]) if meta.get("window_seconds") not in (None, "", "None") else float("nan")
    hfd = pd.to_numeric(df["hfd"], errors="coerce").to_numpy()
    bad = np.flatnonzero(~np.isfinite(hfd))
    if bad.size:
        raise ParseError(path, int(bad[0]) + 2 + len(meta), f"bad hfd value {df['hfd'].iat[bad[0]]!r}")
    records: dict[tuple[str, str], dict] = {}
    for sid, pid, ch, win, v in zip(df["subject_id"], df["presentation_id"], df["channel"], df["window_index"], hfd):
        rec = records.setdefault((sid, pid), {})
        rec.setdefault(ch, []).append((win, float(v)))
    out = []
    for (sid, pid), chans in records.items():
        group = style = None
        if grouping is not None:
            if (sid, pid) not in grouping:
                raise ValidationError(f"no group label for {sid}/{pid} in grouping manifest")
            group, style = grouping[(sid, pid)]
        order = list(registry_order) if registry_order is not None else list(chans)
        whole = all(w == "full" for rows in chans.values() for w, _ in rows)
        if whole:
            out.append(HfdVector({c: chans[c][0][1] for c in order}, params, sid, pid, group, style))
        else:
            vals = {c: [v for _, v in sorted(chans[c], key=lambda t: int(t[0]))] for c in order}
            out.append(HfdWindowSeries(vals, window_seconds, params, sid, pid, group, style))
    return out


def _round(obj):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(format(obj, f".{FLOAT_DIGITS}g"))
    if isinstance(obj, (np.floating,)):
        return _round(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_round(v) for v in obj.tolist()]
    return obj


def dumps_json(obj) -> str:
    """Stable JSON: sorted keys, floats at 12 significant digits, NaN as null."""
    return json.dumps(_round(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def atomic_move(files: Iterable[Path], dest_dir) -> list[Path]:
    dest_dir = Path(dest_dir)
    dest_dir.mkdir(parents=True, exist_ok=True)
    out = []
    for f in files:
        target = dest_dir / Path(f).name
        os.replace(f, target)
        out.append(target)
    return out
