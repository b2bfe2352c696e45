"""Seeded k-fold cross-validation, grid search and accuracy tables."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np
from joblib import Parallel, delayed

from ..errors import InvalidParameter, SingleClassTrainingSet
from ..seeding import derive_seed
from .classifiers import (
    DISPLAY_NAMES,
    SVM_MAX_EPOCHS,
    SVM_TOL,
    ClassifierSpec,
    ConstantModel,
    Family,
    grid_specs,
    train,
)
from .dataset import FeatureMatrix
from .splits import SplitPlan, Strategy, make_split, presentation_sort_key

DEFAULT_SEEDS = (0, 1, 2)
DEFAULT_FOLDS = 10


@dataclass
class CvResult:
    """Accuracies for one (sub-)dataset across all seeds."""

    subset: str | None
    n_rows: int
    fold_accuracies: dict[int, list[float]]
    seed_means: dict[int, float]
    mean: float

    def to_dict(self) -> dict:
        return {
            "subset": self.subset,
            "n_rows": self.n_rows,
            "mean_accuracy": self.mean,
            "per_seed_mean": {str(s): v for s, v in self.seed_means.items()},
            "per_fold": {str(s): list(v) for s, v in self.fold_accuracies.items()},
        }


@dataclass
class CvReport:
    spec: ClassifierSpec
    strategy: Strategy
    seeds: tuple[int, ...]
    folds: int
    results: list[CvResult]
    notes: list[str] = field(default_factory=list)

    @property
    def mean(self) -> float:
        """Grand mean for a single dataset; macro average over sub-datasets otherwise."""
        return float(np.mean([r.mean for r in self.results]))

    def result(self, subset: str | None = None) -> CvResult:
        for r in self.results:
            if r.subset == subset:
                return r
        raise KeyError(subset)

    def to_dict(self) -> dict:
        return {
            "classifier": self.spec.to_dict(),
            "strategy": self.strategy.value,
            "seeds": list(self.seeds),
            "folds": self.folds,
            "mean_accuracy": self.mean,
            "results": [r.to_dict() for r in self.results],
            "standardization": "train-fold z-score" if self.spec.family in (Family.KNN, Family.LINEAR_SVM) else "none",
            "solver": {"svm_tol": SVM_TOL, "svm_max_epochs": SVM_MAX_EPOCHS}
            if self.spec.family is Family.LINEAR_SVM else None,
            "notes": list(self.notes),
        }


def _fold_accuracy(X, y, train_idx, val_idx, spec: ClassifierSpec, seed: int) -> float:
    try:
        model = train(spec, X[train_idx], y[train_idx], seed=seed)
    except SingleClassTrainingSet:
        model = ConstantModel(str(y[train_idx][0]))
    pred = model.predict(X[val_idx])
    return float(np.mean(pred == y[val_idx]))


Dataset = Union[FeatureMatrix, Mapping[str, FeatureMatrix]]


def _plans(data: Dataset, strategy: Strategy, seed: int, folds: int) -> list[tuple[FeatureMatrix, SplitPlan]]:
    if isinstance(data, FeatureMatrix):
        return [(data, p) for p in make_split(data, strategy, seed, folds)]
    if strategy is not Strategy.PRESENTATION:
        raise InvalidParameter("per-presentation datasets require the presentation strategy")
    out = []
    for pid in sorted(data, key=presentation_sort_key):
        sub = data[pid]
        if set(sub.presentation_ids.tolist()) != {pid}:
            raise InvalidParameter(f"sub-dataset {pid!r} holds rows of other presentations")
        out.extend((sub, p) for p in make_split(sub, strategy, seed, folds))
    return out


def cross_validate(matrix: Dataset, spec: ClassifierSpec, strategy: Strategy | str,
                   seeds: Sequence[int] = DEFAULT_SEEDS, folds: int = DEFAULT_FOLDS,
                   n_jobs: int = 1) -> CvReport:
    """k-fold accuracy per seed, per-seed means and their grand mean.

    ``matrix`` is one feature matrix, or (presentation strategy only) a mapping
    presentation id -> matrix so each presentation can keep its own width.
    Standardization (for kNN and the linear SVM) is fitted inside each model on
    its training rows only. A training fold holding a single class predicts
    that class. The report is independent of ``n_jobs``.
    """
    strategy = Strategy(strategy)
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise InvalidParameter("at least one seed is required")
    plans = {s: _plans(matrix, strategy, s, folds) for s in seeds}
    tasks = []
    for s in seeds:
        for p_i, (sub, plan) in enumerate(plans[s]):
            for f_i, (tr, va) in enumerate(plan.folds):
                model_seed = derive_seed(s, "model", plan.subset or "", f_i)
                tasks.append(((s, p_i, f_i), sub, tr, va, model_seed))
    run = delayed(_fold_accuracy)
    if n_jobs == 1:
        accs = [_fold_accuracy(m.X, m.labels, tr, va, spec, ms) for _, m, tr, va, ms in tasks]
    else:
        accs = Parallel(n_jobs=n_jobs)(run(m.X, m.labels, tr, va, spec, ms) for _, m, tr, va, ms in tasks)
    by_key = {t[0]: a for t, a in zip(tasks, accs)}
    results = []
    for p_i, (_, plan) in enumerate(plans[seeds[0]]):
        fold_acc = {s: [by_key[(s, p_i, f)] for f in range(len(plans[s][p_i][1].folds))] for s in seeds}
        seed_means = {s: float(np.mean(v)) for s, v in fold_acc.items()}
        results.append(CvResult(plan.subset, int(plan.rows.size), fold_acc, seed_means,
                                float(np.mean(list(seed_means.values())))))
    report = CvReport(spec, strategy, seeds, folds, results)
    if strategy is Strategy.PRESENTATION:
        report.notes.append(f"presentations evaluated ({len(results)}): " + ", ".join(str(r.subset) for r in results))
    return report


def evaluate_grid(matrix: Dataset, family: Family | str, strategy: Strategy | str,
                  seeds: Sequence[int] = DEFAULT_SEEDS, grid=None, folds: int = DEFAULT_FOLDS,
                  n_jobs: int = 1) -> list[CvReport]:
    specs = grid_specs(family, grid)
    if not specs:
        raise InvalidParameter("empty hyperparameter grid")
    return [cross_validate(matrix, spec, strategy, seeds, folds, n_jobs) for spec in specs]


def pick_best(reports: Sequence[CvReport]) -> CvReport:
    """Highest grand mean; ties go to the smaller hyperparameter value."""
    ranked = sorted(reports, key=lambda r: r.spec.value)
    best = ranked[0]
    for r in ranked[1:]:
        if r.mean > best.mean + 1e-12:
            best = r
    return best


def grid_search(matrix: Dataset, family: Family | str, strategy: Strategy | str,
                seeds: Sequence[int] = DEFAULT_SEEDS, grid=None, folds: int = DEFAULT_FOLDS,
                n_jobs: int = 1) -> tuple[ClassifierSpec, CvReport]:
    """Exhaustive search over the family's grid (simpler model wins ties)."""
    best = pick_best(evaluate_grid(matrix, family, strategy, seeds, grid, folds, n_jobs))
    return best.spec, best


_STRATEGY_HEADERS = {Strategy.PAIRS: "Subject-pres. pairs", Strategy.SUBJECT: "Subject specific"}


def accuracy_table(reports: Sequence[CvReport]) -> str:
    """Plain-text table: one row per family, one column per strategy or presentation."""
    columns: list[tuple[Strategy, str | None]] = []
    cells: dict[tuple[str, Strategy, str | None], float] = {}
    rows: list[str] = []
    for rep in reports:
        name = DISPLAY_NAMES[rep.spec.family]
        if name not in rows:
            rows.append(name)
        for res in rep.results:
            col = (rep.strategy, res.subset)
            if col not in columns:
                columns.append(col)
            cells[(name, *col)] = res.mean
    order = {Strategy.PAIRS: 0, Strategy.SUBJECT: 1, Strategy.PRESENTATION: 2}
    columns.sort(key=lambda c: order[c[0]])
    headers = [_STRATEGY_HEADERS.get(s, sub or s.value) for s, sub in columns]
    width = max([len(r) for r in rows] + [len("Best")])
    colw = [max(len(h), 5) for h in headers]
    lines = [" | ".join([" " * width] + [h.rjust(w) for h, w in zip(headers, colw)])]
    lines.append("-" * len(lines[0]))

    def fmt(v):
        return "-" if v is None else f"{100 * v:.0f}%"

    for r in rows:
        vals = [cells.get((r, *c)) for c in columns]
        lines.append(" | ".join([r.ljust(width)] + [fmt(v).rjust(w) for v, w in zip(vals, colw)]))
    best = [max((cells[(r, *c)] for r in rows if (r, *c) in cells), default=None) for c in columns]
    lines.append("-" * len(lines[0]))
    lines.append(" | ".join(["Best".ljust(width)] + [fmt(v).rjust(w) for v, w in zip(best, colw)]))
    return "\n".join(lines)
