"""Four small classifier families implemented directly in numpy.

All models are deterministic given (spec, training rows, seed). Labels are
arbitrary strings; internally they are encoded by sorted order, so any tie
resolves toward the lexicographically smaller label.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidParameter, SingleClassTrainingSet, ValidationError

# Linear SVM solver constants (reported with every CV run).
SVM_TOL = 1e-6  # relative change of the primal objective between epochs
SVM_MAX_EPOCHS = 1000


class Family(str, enum.Enum):
    KNN = "knn"
    LINEAR_SVM = "linear_svm"
    DECISION_TREE = "decision_tree"
    ADABOOST = "adaboost"

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        key = _FAMILY_ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise InvalidParameter(f"unknown classifier family {value!r}") from None


_FAMILY_ALIASES = {"svm": "linear_svm", "tree": "decision_tree", "nn": "knn", "ada": "adaboost"}


GRIDS: dict[Family, tuple] = {
    Family.KNN: (3, 5, 7, 9, 11),
    Family.LINEAR_SVM: (0.025, 0.5, 0.75),
    Family.DECISION_TREE: (3, 5, 7),
    Family.ADABOOST: (25, 50, 100),
}

PARAM_NAMES = {
    Family.KNN: "n_neighbors",
    Family.LINEAR_SVM: "C",
    Family.DECISION_TREE: "max_depth",
    Family.ADABOOST: "n_estimators",
}

DISPLAY_NAMES = {
    Family.KNN: "Nearest Neighbors",
    Family.LINEAR_SVM: "Linear SVM",
    Family.DECISION_TREE: "Decision Tree",
    Family.ADABOOST: "AdaBoost",
}


@dataclass(frozen=True)
class ClassifierSpec:
    family: Family
    value: float
    extended: bool = False

    def __post_init__(self):
        fam = Family.parse(self.family)
        object.__setattr__(self, "family", fam)
        if fam is Family.LINEAR_SVM:
            if not self.value > 0:
                raise InvalidParameter(f"C must be positive, got {self.value}")
            object.__setattr__(self, "value", float(self.value))
        else:
            if int(self.value) != self.value or self.value < 1:
                raise InvalidParameter(f"{PARAM_NAMES[fam]} must be a positive integer, got {self.value}")
            object.__setattr__(self, "value", int(self.value))
        if not self.extended and self.value not in GRIDS[fam]:
            raise InvalidParameter(
                f"{PARAM_NAMES[fam]}={self.value} is outside the {fam.value} grid {GRIDS[fam]}; "
                "pass extended=True to allow it"
            )

    @property
    def param_name(self) -> str:
        return PARAM_NAMES[self.family]

    def to_dict(self) -> dict:
        return {"family": self.family.value, self.param_name: self.value, "extended": self.extended}

    def __str__(self):
        return f"{self.family.value}({self.param_name}={self.value})"


def grid_specs(family: Family | str, grid=None) -> list[ClassifierSpec]:
    family = Family.parse(family)
    values = GRIDS[family] if grid is None else tuple(grid)
    return [ClassifierSpec(family, v, extended=v not in GRIDS[family]) for v in values]


class Standardizer:
    """Per-feature z-scoring; constant features are centred but not scaled."""

    def fit(self, X):
        X = np.asarray(X, dtype=np.float64)
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        self.scale_ = np.where(std > 0, std, 1.0)
        return self

    def transform(self, X):
        return (np.asarray(X, dtype=np.float64) - self.mean_) / self.scale_


def _encode(y):
    classes, codes = np.unique(np.asarray(y).astype(str), return_inverse=True)
    if classes.size < 2:
        raise SingleClassTrainingSet(f"training set holds a single class {classes.tolist()}")
    return classes, codes


class KNearestNeighbors:
    """Euclidean kNN on standardized features.

    Neighbour ties in distance keep training-row order; vote ties go to the
    lexicographically smaller label.
    """

    def __init__(self, n_neighbors: int = 5):
        self.n_neighbors = n_neighbors

    def fit(self, X, y, seed: int = 0):
        self.classes_, codes = _encode(y)
        self.scaler_ = Standardizer().fit(X)
        self.X_ = self.scaler_.transform(X)
        self.y_ = codes
        return self

    def predict(self, X):
        Q = self.scaler_.transform(X)
        k = min(self.n_neighbors, self.X_.shape[0])
        out = np.empty(Q.shape[0], dtype=int)
        for start in range(0, Q.shape[0], 64):
            q = Q[start:start + 64]
            d = ((q[:, None, :] - self.X_[None, :, :]) ** 2).sum(axis=2)
            nn = np.argsort(d, axis=1, kind="stable")[:, :k]
            for i, row in enumerate(nn):
                votes = np.bincount(self.y_[row], minlength=self.classes_.size)
                out[start + i] = int(np.argmax(votes))
        return self.classes_[out]


class LinearSVM:
    """L2-regularized hinge-loss linear SVM, primal objective
    0.5 ||w||^2 + C sum_i max(0, 1 - y_i (w.x_i + b)).

    Solved by dual coordinate descent; the bias is learned as the weight of a
    constant feature. Stops when the relative change of the primal objective
    between epochs is <= ``tol`` or after ``max_epochs`` epochs.
    """

    def __init__(self, C: float = 0.5, tol: float = SVM_TOL, max_epochs: int = SVM_MAX_EPOCHS):
        self.C = C
        self.tol = tol
        self.max_epochs = max_epochs

    def _primal(self, Z, s, w):
        margins = 1.0 - s * (Z @ w)
        return 0.5 * float(w @ w) + self.C * float(np.clip(margins, 0.0, None).sum())

    def fit(self, X, y, seed: int = 0):
        self.classes_, codes = _encode(y)
        if self.classes_.size != 2:
            raise ValidationError("LinearSVM supports two classes")
        self.scaler_ = Standardizer().fit(X)
        Xs = self.scaler_.transform(X)
        Z = np.hstack([Xs, np.ones((Xs.shape[0], 1))])
        s = np.where(codes == 1, 1.0, -1.0)
        n = Z.shape[0]
        qii = (Z * Z).sum(axis=1)
        alpha = np.zeros(n)
        w = np.zeros(Z.shape[1])
        rng = np.random.default_rng(seed)
        prev = self._primal(Z, s, w)
        self.n_epochs_ = 0
        self.converged_ = False
        rows = [Z[i] for i in range(n)]
        for epoch in range(self.max_epochs):
            for i in rng.permutation(n):
                zi = rows[i]
                g = s[i] * float(zi @ w) - 1.0
                a_old = alpha[i]
                a_new = min(max(a_old - g / qii[i], 0.0), self.C)
                if a_new != a_old:
                    w += (a_new - a_old) * s[i] * zi
                    alpha[i] = a_new
            obj = self._primal(Z, s, w)
            self.n_epochs_ = epoch + 1
            if abs(prev - obj) <= self.tol * max(abs(prev), 1e-12):
                self.converged_ = True
                break
            prev = obj
        self.objective_ = obj
        self.coef_ = w[:-1]
        self.intercept_ = w[-1]
        return self

    def decision_function(self, X):
        return self.scaler_.transform(X) @ self.coef_ + self.intercept_

    def predict(self, X):
        return self.classes_[(self.decision_function(X) > 0).astype(int)]


def _best_gini_split(X, W):
    """Best (feature, threshold) by weighted Gini over all features.

    ``W`` is (n, K) per-class sample weight. Ties go to the lowest feature
    index, then the lowest threshold.
    """
    n, d = X.shape
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    cum = np.cumsum(W[order], axis=0)  # (n, d, K)
    total = cum[-1]
    left = cum[:-1]
    right = total[None, :, :] - left
    wl = left.sum(axis=2)
    wr = right.sum(axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        gl = wl - (left ** 2).sum(axis=2) / wl
        gr = wr - (right ** 2).sum(axis=2) / wr
    score = np.nan_to_num(gl) + np.nan_to_num(gr)  # = weighted impurity * total weight
    valid = xs[1:] > xs[:-1]
    if not valid.any():
        return None
    score = np.where(valid, score, np.inf)
    flat = np.argmin(score.T)  # feature-major scan
    j, i = divmod(int(flat), n - 1)
    lo, hi = xs[i, j], xs[i + 1, j]
    thr = lo + (hi - lo) / 2.0
    if not lo <= thr < hi:
        thr = lo
    return j, float(thr)


class DecisionTree:
    """CART with Gini impurity and a depth cap; supports sample weights.

    Impure nodes are split as long as some feature separates their rows,
    even when the best split does not reduce impurity, so an uncapped tree
    fits any consistent training set exactly.
    """

    def __init__(self, max_depth: int | None = 3):
        self.max_depth = max_depth

    def fit(self, X, y, seed: int = 0, sample_weight=None):
        self.classes_, codes = _encode(y)
        X = np.asarray(X, dtype=np.float64)
        n = X.shape[0]
        w = np.full(n, 1.0 / n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
        W = np.zeros((n, self.classes_.size))
        W[np.arange(n), codes] = w
        self.feature_, self.threshold_, self.left_, self.right_, self.value_ = [], [], [], [], []
        self.depth_ = 0
        self._grow(X, W, np.arange(n), 0)
        self.feature_ = np.array(self.feature_)
        self.threshold_ = np.array(self.threshold_)
        self.left_ = np.array(self.left_)
        self.right_ = np.array(self.right_)
        self.value_ = np.array(self.value_)
        return self

    def _grow(self, X, W, idx, depth):
        node = len(self.feature_)
        counts = W[idx].sum(axis=0)
        self.feature_.append(-1)
        self.threshold_.append(0.0)
        self.left_.append(-1)
        self.right_.append(-1)
        self.value_.append(counts)
        self.depth_ = max(self.depth_, depth)
        n_nonzero = np.count_nonzero(counts > 0)
        if n_nonzero <= 1 or idx.size < 2 or (self.max_depth is not None and depth >= self.max_depth):
            return node
        split = _best_gini_split(X[idx], W[idx])
        if split is None:
            return node
        j, thr = split
        go_left = X[idx, j] <= thr
        self.feature_[node] = j
        self.threshold_[node] = thr
        self.left_[node] = self._grow(X, W, idx[go_left], depth + 1)
        self.right_[node] = self._grow(X, W, idx[~go_left], depth + 1)
        return node

    def apply(self, X):
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(X.shape[0], dtype=int)
        for _ in range(self.depth_ + 1):
            feat = self.feature_[node]
            inner = feat >= 0
            if not inner.any():
                break
            xv = X[np.arange(X.shape[0]), np.where(inner, feat, 0)]
            nxt = np.where(xv <= self.threshold_[node], self.left_[node], self.right_[node])
            node = np.where(inner, nxt, node)
        return node

    def predict(self, X):
        return self.classes_[np.argmax(self.value_[self.apply(X)], axis=1)]


@dataclass
class Stump:
    feature: int
    threshold: float
    polarity: int  # +1: predict +1 when x > threshold

    def predict(self, X):
        x = np.asarray(X, dtype=np.float64)[:, self.feature]
        return np.where(x > self.threshold, self.polarity, -self.polarity)


class AdaBoost:
    """Discrete AdaBoost over depth-1 stumps with the exponential-loss update.

    Each round picks the stump with the smallest weighted training error,
    sets alpha = 0.5 ln((1 - err) / err) and reweights w *= exp(-alpha y h).
    ``errors_`` holds the per-round weighted errors and ``loss_bound_`` the
    running product of 2 sqrt(err (1 - err)), an upper bound on the training
    error.
    """

    MIN_ERROR = 1e-10

    def __init__(self, n_estimators: int = 50):
        self.n_estimators = n_estimators

    def fit(self, X, y, seed: int = 0):
        self.classes_, codes = _encode(y)
        if self.classes_.size != 2:
            raise ValidationError("AdaBoost supports two classes")
        X = np.asarray(X, dtype=np.float64)
        n, d = X.shape
        s = np.where(codes == 1, 1.0, -1.0)
        order = np.argsort(X, axis=0, kind="stable")
        xs = np.take_along_axis(X, order, axis=0)
        w = np.full(n, 1.0 / n)
        self.stumps_, self.alphas_, self.errors_, self.loss_bound_ = [], [], [], []
        bound = 1.0
        for _ in range(self.n_estimators):
            stump, err = self._best_stump(xs, order, s, w)
            if err >= 0.5:
                break
            e = max(err, self.MIN_ERROR)
            alpha = 0.5 * math.log((1.0 - e) / e)
            h = stump.predict(X)
            self.stumps_.append(stump)
            self.alphas_.append(alpha)
            self.errors_.append(err)
            bound *= 2.0 * math.sqrt(e * (1.0 - e))
            self.loss_bound_.append(bound)
            if err <= self.MIN_ERROR:
                break
            w = w * np.exp(-alpha * s * h)
            w /= w.sum()
        if not self.stumps_:
            # no stump beats chance: fall back to the weighted majority
            majority = 1 if w[s > 0].sum() > w[s < 0].sum() else -1
            self.stumps_.append(Stump(0, np.inf, -majority))
            self.alphas_.append(1.0)
        return self

    @staticmethod
    def _best_stump(xs, order, s, w):
        n, d = xs.shape
        wpos = np.where(s > 0, w, 0.0)[order]
        wneg = np.where(s < 0, w, 0.0)[order]
        # error when rows 0..i are predicted -1 and the rest +1
        cpos = np.vstack([np.zeros((1, d)), np.cumsum(wpos, axis=0)])
        cneg = np.vstack([np.zeros((1, d)), np.cumsum(wneg, axis=0)])
        err_plus = cpos + (cneg[-1] - cneg)
        err_minus = cneg + (cpos[-1] - cpos)
        # positions 0..n: split after i rows; only where the value changes (or at the ends)
        valid = np.ones((n + 1, d), dtype=bool)
        valid[1:n] = xs[1:] > xs[:-1]
        err_plus = np.where(valid, err_plus, np.inf)
        err_minus = np.where(valid, err_minus, np.inf)
        both = np.stack([err_plus.T, err_minus.T], axis=2)  # (d, n+1, 2)
        flat = int(np.argmin(both))
        j, rem = divmod(flat, (n + 1) * 2)
        i, pol = divmod(rem, 2)
        if i == 0:
            thr = -np.inf
        elif i == n:
            thr = np.inf
        else:
            lo, hi = xs[i - 1, j], xs[i, j]
            thr = lo + (hi - lo) / 2.0
            if not lo <= thr < hi:
                thr = lo
        return Stump(j, float(thr), 1 if pol == 0 else -1), float(both[j, i, pol])

    def decision_function(self, X):
        return sum(a * st.predict(X) for a, st in zip(self.alphas_, self.stumps_))

    def predict(self, X):
        return self.classes_[(self.decision_function(X) > 0).astype(int)]


def make_model(spec: ClassifierSpec):
    if spec.family is Family.KNN:
        return KNearestNeighbors(spec.value)
    if spec.family is Family.LINEAR_SVM:
        return LinearSVM(spec.value)
    if spec.family is Family.DECISION_TREE:
        return DecisionTree(spec.value)
    return AdaBoost(spec.value)


def train(spec: ClassifierSpec, X, y, seed: int = 0):
    """Fit the model described by ``spec``.

    Raises ``SingleClassTrainingSet`` when ``y`` holds fewer than two classes.
    """
    return make_model(spec).fit(X, y, seed=seed)


@dataclass
class ConstantModel:
    """Fallback used by cross-validation when a training fold has a single class."""

    label: str
    classes_: np.ndarray = field(init=False)

    def __post_init__(self):
        self.classes_ = np.array([self.label])

    def predict(self, X):
        return np.full(np.asarray(X).shape[0], self.label)
