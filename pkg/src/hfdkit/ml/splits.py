"""Cross-validation fold assignment for the three split strategies.

pairs         rows are shuffled and partitioned regardless of subject
subject       subject ids are shuffled and partitioned; rows follow their subject
presentation  one sub-dataset per presentation, each partitioned by rows

Fold sizes follow ``np.array_split``: remainders go one per fold from the
first fold onward.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

import numpy as np

from ..errors import TooFewRows, TooFewSubjects
from ..seeding import derive_seed
from .dataset import FeatureMatrix


class Strategy(str, enum.Enum):
    PAIRS = "pairs"
    SUBJECT = "subject"
    PRESENTATION = "presentation"


@dataclass(frozen=True, eq=False)
class SplitPlan:
    strategy: Strategy
    seed: int
    folds: tuple[tuple[np.ndarray, np.ndarray], ...]
    rows: np.ndarray
    subset: str | None = None

    def validation_rows(self) -> np.ndarray:
        return np.concatenate([v for _, v in self.folds])

    def same_as(self, other: "SplitPlan") -> bool:
        return (
            self.strategy == other.strategy
            and self.seed == other.seed
            and self.subset == other.subset
            and np.array_equal(self.rows, other.rows)
            and len(self.folds) == len(other.folds)
            and all(np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
                    for a, b in zip(self.folds, other.folds))
        )


def presentation_sort_key(pid: str):
    m = re.fullmatch(r"(\d+)(.*)", pid)
    return (0, int(m.group(1)), m.group(2)) if m else (1, 0, pid)


def _folds_from_chunks(rows: np.ndarray, chunks) -> tuple:
    out = []
    for val in chunks:
        val = np.sort(val)
        train = np.setdiff1d(rows, val, assume_unique=True)
        out.append((train, val))
    return tuple(out)


def _row_split(rows: np.ndarray, rng: np.random.Generator, folds: int) -> tuple:
    if rows.size < folds:
        raise TooFewRows(f"{rows.size} rows cannot fill {folds} folds")
    return _folds_from_chunks(rows, np.array_split(rows[rng.permutation(rows.size)], folds))


def make_split(matrix: FeatureMatrix, strategy: Strategy | str, seed: int, folds: int = 10) -> list[SplitPlan]:
    """Seeded fold assignment.

    Returns one plan for the pairs and subject strategies and one plan per
    presentation (in presentation order) for the presentation strategy.
    """
    strategy = Strategy(strategy)
    if folds < 2:
        raise TooFewRows(f"need at least 2 folds, got {folds}")
    rows = np.arange(len(matrix))
    if strategy is Strategy.PAIRS:
        rng = np.random.default_rng(seed)
        return [SplitPlan(strategy, seed, _row_split(rows, rng, folds), rows)]
    if strategy is Strategy.SUBJECT:
        subjects = np.unique(matrix.subject_ids)
        if subjects.size < folds:
            raise TooFewSubjects(f"{subjects.size} subjects cannot fill {folds} folds")
        rng = np.random.default_rng(seed)
        chunks = np.array_split(subjects[rng.permutation(subjects.size)], folds)
        row_chunks = [np.flatnonzero(np.isin(matrix.subject_ids, c)) for c in chunks]
        return [SplitPlan(strategy, seed, _folds_from_chunks(rows, row_chunks), rows)]
    plans = []
    for pid in sorted(set(matrix.presentation_ids.tolist()), key=presentation_sort_key):
        sub = np.flatnonzero(matrix.presentation_ids == pid)
        rng = np.random.default_rng(derive_seed(seed, "presentation", pid))
        plans.append(SplitPlan(strategy, seed, _row_split(sub, rng, folds), sub, subset=pid))
    return plans
