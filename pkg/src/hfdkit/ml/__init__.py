from .classifiers import (
    GRIDS,
    AdaBoost,
    ClassifierSpec,
    DecisionTree,
    Family,
    KNearestNeighbors,
    LinearSVM,
    Standardizer,
    grid_specs,
    train,
)
from .cv import CvReport, CvResult, accuracy_table, cross_validate, evaluate_grid, grid_search
from .dataset import FeatureMatrix, Mode, build_dataset, build_presentation_datasets
from .splits import SplitPlan, Strategy, make_split

__all__ = [
    "AdaBoost",
    "ClassifierSpec",
    "CvReport",
    "CvResult",
    "DecisionTree",
    "Family",
    "FeatureMatrix",
    "GRIDS",
    "KNearestNeighbors",
    "LinearSVM",
    "Mode",
    "SplitPlan",
    "Standardizer",
    "Strategy",
    "accuracy_table",
    "build_dataset",
    "build_presentation_datasets",
    "cross_validate",
    "evaluate_grid",
    "grid_search",
    "grid_specs",
    "make_split",
    "train",
]
