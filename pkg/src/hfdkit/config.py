"""Run configuration: a flat YAML mapping plus CLI overrides.

Recognized keys (all optional except ``dataset_root``)::

    dataset_root     directory of recording CSVs + sidecars ($HFDKIT_DATASET_ROOT)
    output_dir       where artifacts are written (default: ./hfdkit-out)
    k_max            HFD stride limit used for features when ``tune`` is false (default 100)
    kmax_grid        comma list or YAML list for the tuner (default 2,5,20,100,150,200,400)
    tune             run the k_max tuner first and use its choice for features (default true)
    window_seconds   sliding-window length; null for whole-recording HFD
    strategy         pairs | subject | presentation
    families         comma list of knn, svm, tree, adaboost
    seeds            comma list of integers (default 0,1,2)
    folds            CV folds (default 10)
    direction        one-sided alternative for the group t-test: less | greater
    top_n            number of channels in the top-N report
    registry         optional channel registry file; default is the bundled 124-label list
    n_jobs           worker processes (never changes results)
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import yaml

from .errors import InvalidParameter, ValidationError
from .kmax import DEFAULT_GRID
from .ml.classifiers import Family
from .ml.cv import DEFAULT_FOLDS, DEFAULT_SEEDS
from .ml.splits import Strategy
from .stats import Direction

DATASET_ENV = "HFDKIT_DATASET_ROOT"
# excluded from the hash: they change where or how fast, never what
_UNHASHED = {"n_jobs", "output_dir"}


def _int_list(value) -> tuple[int, ...]:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    try:
        return tuple(int(v) for v in value)
    except (TypeError, ValueError):
        raise InvalidParameter(f"expected a list of integers, got {value!r}") from None


def _str_list(value) -> tuple[str, ...]:
    if isinstance(value, str):
        value = value.split(",")
    return tuple(str(v).strip() for v in value if str(v).strip())


@dataclass(frozen=True)
class RunConfig:
    dataset_root: Path
    output_dir: Path = Path("hfdkit-out")
    k_max: int = 100
    kmax_grid: tuple[int, ...] = DEFAULT_GRID
    tune: bool = True
    window_seconds: float | None = None
    strategy: Strategy = Strategy.SUBJECT
    families: tuple[Family, ...] = tuple(Family)
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    folds: int = DEFAULT_FOLDS
    direction: Direction = Direction.LESS
    top_n: int = 10
    registry: Path | None = None
    n_jobs: int = 1

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("dataset_root", Path(self.dataset_root))
        set_("output_dir", Path(self.output_dir))
        if self.registry is not None:
            set_("registry", Path(self.registry))
        set_("k_max", int(self.k_max))
        set_("kmax_grid", _int_list(self.kmax_grid))
        set_("seeds", _int_list(self.seeds))
        fams = self.families if not isinstance(self.families, str) else _str_list(self.families)
        set_("families", tuple(Family.parse(f) for f in fams))
        try:
            set_("strategy", Strategy(self.strategy))
            set_("direction", Direction(self.direction))
        except ValueError as exc:
            raise InvalidParameter(str(exc)) from None
        if self.window_seconds is not None:
            set_("window_seconds", float(self.window_seconds))
        if self.k_max < 2:
            raise InvalidParameter(f"k_max must be >= 2, got {self.k_max}")
        if not self.seeds:
            raise InvalidParameter("at least one seed is required")
        if self.folds < 2 or self.top_n < 1 or self.n_jobs == 0:
            raise InvalidParameter("folds >= 2, top_n >= 1 and n_jobs != 0 are required")
        if self.window_seconds is not None and self.window_seconds <= 0:
            raise InvalidParameter("window_seconds must be positive")

    def check_paths(self) -> None:
        """Referenced inputs must exist when a run starts."""
        if not self.dataset_root.is_dir():
            raise ValidationError(f"dataset_root is not a directory: {self.dataset_root}")
        if self.registry is not None and not self.registry.is_file():
            raise ValidationError(f"registry file not found: {self.registry}")

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, Path):
                d[k] = str(v)
            elif hasattr(v, "value"):
                d[k] = v.value
            elif isinstance(v, tuple):
                d[k] = [getattr(x, "value", x) for x in v]
        return d

    def config_hash(self) -> str:
        d = {k: v for k, v in self.to_dict().items() if k not in _UNHASHED}
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Merge the YAML file (if any) with CLI overrides; overrides win.

    ``$HFDKIT_DATASET_ROOT`` is consulted only when neither gives a dataset root.
    """
    data: dict = {}
    if path is not None:
        try:
            data = yaml.safe_load(Path(path).read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ValidationError(f"config {path} must be a flat mapping")
        nested = [k for k, v in data.items() if isinstance(v, dict)]
        if nested:
            raise ValidationError(f"config must be flat; nested keys: {nested}")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if DATASET_ENV in os.environ and "dataset_root" not in data:
        data["dataset_root"] = os.environ[DATASET_ENV]
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValidationError(f"unknown config key(s): {unknown}")
    if "dataset_root" not in data:
        raise ValidationError(f"dataset_root missing (config key or ${DATASET_ENV})")
    try:
        return RunConfig(**data)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(str(exc)) from None
