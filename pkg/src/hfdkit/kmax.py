"""Choosing k_max by maximizing the spread between most- and least-complex channels."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from joblib import Parallel, delayed

from .errors import ChannelErrors, EmptyVector, GridInfeasible, InvalidParameter, ValidationError
from .hfd import HfdVector, hfd_sweep, max_kmax
from .signal import Recording

DEFAULT_GRID = (2, 5, 20, 100, 150, 200, 400)


@dataclass(frozen=True)
class KmaxGrid:
    candidates: tuple[int, ...] = DEFAULT_GRID

    def __post_init__(self):
        c = tuple(int(k) for k in self.candidates)
        if not c:
            raise InvalidParameter("k_max grid is empty")
        if any(k < 2 for k in c) or any(b <= a for a, b in zip(c, c[1:])):
            raise InvalidParameter(f"k_max grid must be strictly increasing and >= 2, got {c}")
        object.__setattr__(self, "candidates", c)

    @classmethod
    def parse(cls, text: str) -> "KmaxGrid":
        return cls(tuple(int(t) for t in text.split(",") if t.strip()))


@dataclass
class TuningReport:
    candidates: list[int]
    mean_hfd: dict[int, float]
    std_hfd: dict[int, float]
    mean_spread: dict[int, float]
    std_spread: dict[int, float]
    chosen: int
    n_recordings: int = 0
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "candidates": list(self.candidates),
            "chosen_k_max": self.chosen,
            "n_recordings": self.n_recordings,
            "per_candidate": [
                {
                    "k_max": k,
                    "mean_hfd": self.mean_hfd[k],
                    "std_hfd": self.std_hfd[k],
                    "mean_spread": self.mean_spread[k],
                    "std_spread": self.std_spread[k],
                }
                for k in self.candidates
            ],
            "notes": list(self.notes),
        }


def channel_spread(hfd: HfdVector | Mapping[str, float] | Sequence[float]) -> float:
    """max - min of the per-channel HFD values."""
    if isinstance(hfd, HfdVector):
        vals = hfd.as_array()
    elif isinstance(hfd, Mapping):
        vals = np.fromiter(hfd.values(), dtype=np.float64)
    else:
        vals = np.asarray(hfd, dtype=np.float64)
    if vals.size == 0:
        raise EmptyVector("cannot take the spread of an empty HFD vector")
    return float(vals.max() - vals.min())


def select_kmax(mean_spread: Mapping[int, float]) -> int:
    """Candidate with the largest mean spread; ties go to the smaller k_max."""
    if not mean_spread:
        raise InvalidParameter("no candidates to select from")
    best = None
    for k in sorted(mean_spread):
        if best is None or mean_spread[k] > mean_spread[best]:
            best = k
    return best


def report_from_aggregates(mean_hfd: Mapping[int, float], mean_spread: Mapping[int, float],
                           std_hfd: Mapping[int, float] | None = None,
                           std_spread: Mapping[int, float] | None = None) -> TuningReport:
    """Build a report from precomputed per-candidate aggregates (no raw signals needed)."""
    cands = sorted(int(k) for k in mean_spread)
    if sorted(int(k) for k in mean_hfd) != cands:
        raise ValidationError("mean_hfd and mean_spread must cover the same candidates")
    KmaxGrid(tuple(cands))
    nan = {k: float("nan") for k in cands}
    return TuningReport(
        candidates=cands,
        mean_hfd={k: float(mean_hfd[k]) for k in cands},
        std_hfd={k: float(v) for k, v in (std_hfd or nan).items()},
        mean_spread={k: float(mean_spread[k]) for k in cands},
        std_spread={k: float(v) for k, v in (std_spread or nan).items()},
        chosen=select_kmax({k: float(mean_spread[k]) for k in cands}),
    )


def _recording_sweep(rec: Recording, candidates: tuple[int, ...]) -> np.ndarray:
    """(channels, candidates) HFD array for one recording."""
    rows, failures = [], {}
    for label, ts in rec.channels.items():
        try:
            sweep = hfd_sweep(ts, candidates)
        except ValidationError as exc:
            failures[f"{rec.subject_id}/{rec.presentation_id}/{label}"] = exc
            continue
        rows.append([sweep[k] for k in candidates])
    if failures:
        raise ChannelErrors(failures)
    return np.asarray(rows)


def tune_kmax(dataset: Sequence[Recording], grid: KmaxGrid | Sequence[int] = DEFAULT_GRID,
              n_jobs: int = 1) -> TuningReport:
    """Evaluate every candidate on every recording and pick the spread argmax.

    Per candidate the report holds the mean/std of HFD over all channels of all
    recordings, and the mean/std over recordings of the per-recording channel
    spread. L(k) is computed once per channel up to the largest candidate.
    """
    if not isinstance(grid, KmaxGrid):
        grid = KmaxGrid(tuple(grid))
    dataset = list(dataset)
    if not dataset:
        raise InvalidParameter("tune_kmax needs at least one recording")
    shortest = min(r.n_samples for r in dataset)
    bad = [k for k in grid.candidates if k > max_kmax(shortest)]
    if bad:
        raise GridInfeasible(
            f"candidates {bad} exceed the admissible k_max {max_kmax(shortest)} for the shortest channel "
            f"({shortest} samples)"
        )
    cands = grid.candidates
    if n_jobs == 1:
        sweeps = [_recording_sweep(r, cands) for r in dataset]
    else:
        sweeps = Parallel(n_jobs=n_jobs)(delayed(_recording_sweep)(r, cands) for r in dataset)
    # Sort by provenance so the aggregation order does not depend on input order.
    order = sorted(range(len(dataset)), key=lambda i: (dataset[i].subject_id, dataset[i].presentation_id))
    sweeps = [sweeps[i] for i in order]
    all_vals = np.vstack(sweeps)
    spreads = np.array([s.max(axis=0) - s.min(axis=0) for s in sweeps])
    mean_hfd = dict(zip(cands, all_vals.mean(axis=0).tolist()))
    std_hfd = dict(zip(cands, all_vals.std(axis=0).tolist()))
    mean_spread = dict(zip(cands, spreads.mean(axis=0).tolist()))
    std_spread = dict(zip(cands, spreads.std(axis=0).tolist()))
    return TuningReport(
        candidates=list(cands),
        mean_hfd=mean_hfd,
        std_hfd=std_hfd,
        mean_spread=mean_spread,
        std_spread=std_spread,
        chosen=select_kmax(mean_spread),
        n_recordings=len(dataset),
    )
