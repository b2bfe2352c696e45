import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hfdkit.errors import ChannelMismatch, HeterogeneousWidth, InvalidParameter, SingleClassTrainingSet, TooFewRows, TooFewSubjects, ValidationError
from hfdkit.hfd import HfdVector, HfdWindowSeries
from hfdkit.ml import (
    AdaBoost,
    ClassifierSpec,
    DecisionTree,
    Family,
    FeatureMatrix,
    KNearestNeighbors,
    LinearSVM,
    Mode,
    Standardizer,
    Strategy,
    accuracy_table,
    build_dataset,
    build_presentation_datasets,
    cross_validate,
    grid_search,
    make_split,
    train,
)
from hfdkit.signal import ChannelRegistry, Group

sk_neighbors = pytest.importorskip("sklearn.neighbors")
sk_svm = pytest.importorskip("sklearn.svm")
sk_tree = pytest.importorskip("sklearn.tree")


def blobs(n=200, sep=5.0, d=2, seed=0):
    """Two unit-variance Gaussian blobs whose centres are ``sep`` apart."""
    rng = np.random.default_rng(seed)
    y = np.array(["expert", "novice"] * (n // 2))
    X = rng.normal(size=(n, d))
    X[y == "novice", 0] += sep
    return X, y


def matrix_from(X, y, subjects=None, pids=None):
    n = len(y)
    subjects = subjects if subjects is not None else [f"S{i:03d}" for i in range(n)]
    pids = pids if pids is not None else ["1A"] * n
    return FeatureMatrix(X, y, subjects, pids, tuple(f"f{i}" for i in range(X.shape[1])))


def cohort_matrix(n_subj=44, n_pres=16, d=3, seed=0):
    rng = np.random.default_rng(seed)
    subj = np.repeat([f"S{i:03d}" for i in range(n_subj)], n_pres)
    pids = np.tile([f"{p // 2 + 1}{'AG'[p % 2]}" for p in range(n_pres)], n_subj)
    y = np.where(np.repeat(np.arange(n_subj) % 2 == 0, n_pres), "expert", "novice")
    return FeatureMatrix(rng.normal(size=(len(y), d)), y, subj, pids, ("a", "b", "c")[:d])


def vec(values, sid, pid, group=Group.EXPERT):
    return HfdVector(values, None, sid, pid, group, None)


# dataset ---------------------------------------------------------------

def test_whole_mode_registry_order_and_shape():
    reg = ChannelRegistry.default()
    vals = {c: 1.5 for c in reversed(reg.labels)}
    feats = [vec(vals, f"S{i}", "1A") for i in range(3)]
    m = build_dataset(feats, Mode.WHOLE, reg.labels)
    assert m.shape == (3, 124) and m.feature_names == reg.labels
    assert build_dataset(feats[:1], "whole", reg.labels).shape == (1, 124)


def test_windowed_width_and_order():
    reg = ChannelRegistry.default()
    ws = HfdWindowSeries({c: [1.1 + 0.1 * w for w in range(5)] for c in reg.labels}, 8.0, None, "S1", "1A",
                         Group.EXPERT, None)
    m = build_dataset([ws], Mode.WINDOWED, reg.labels)
    assert m.shape == (1, 620)
    assert m.feature_names[:2] == ("w0:Fp1", "w0:Fpz")
    assert m.feature_names[124] == "w1:Fp1"
    assert m.X[0, 124] == pytest.approx(1.2)


def test_heterogeneous_width_names_offenders():
    mk = lambda sid, n: HfdWindowSeries({"a": [1.5] * n}, 8.0, None, sid, "1A", Group.EXPERT, None)  # noqa: E731
    with pytest.raises(HeterogeneousWidth) as ei:
        build_dataset([mk("S1", 3), mk("S2", 3), mk("S3", 2)], Mode.WINDOWED)
    assert "S3/1A" in str(ei.value)


def test_per_presentation_datasets_keep_their_widths():
    mk = lambda sid, pid, n: HfdWindowSeries({"a": [1.5] * n}, 8.0, None, sid, pid, Group.EXPERT, None)  # noqa: E731
    subs = build_presentation_datasets([mk("S1", "1A", 3), mk("S2", "1A", 3), mk("S1", "1G", 5)])
    assert {k: v.shape for k, v in subs.items()} == {"1A": (2, 3), "1G": (1, 5)}


def test_dataset_validation():
    with pytest.raises(ChannelMismatch):
        build_dataset([vec({"a": 1.5}, "S1", "1A"), vec({"b": 1.5}, "S2", "1A")])
    with pytest.raises(ValidationError):
        FeatureMatrix(np.array([[np.nan]]), ["expert"], ["S1"], ["1A"], ("a",))
    with pytest.raises(ValidationError):
        FeatureMatrix(np.zeros((3, 1)), ["a", "b", "c"], ["S"] * 3, ["1A"] * 3, ("x",))
    m = build_dataset([vec({"a": 1.5}, "S1", "1A")])
    with pytest.raises(ValueError):
        m.X[0, 0] = 2.0


# splits ----------------------------------------------------------------

def test_pairs_fold_sizes():
    plan, = make_split(cohort_matrix(), "pairs", 0)
    assert sorted({len(v) for _, v in plan.folds}) == [70, 71]
    assert [len(v) for _, v in plan.folds][:4] == [71] * 4


def test_subject_fold_sizes():
    m = cohort_matrix()
    plan, = make_split(m, Strategy.SUBJECT, 1)
    per_fold = [len(set(m.subject_ids[v])) for _, v in plan.folds]
    assert sorted(set(per_fold)) == [4, 5]


def test_presentation_subdatasets():
    plans = make_split(cohort_matrix(), "presentation", 0)
    assert len(plans) == 16
    assert all(p.rows.size == 44 for p in plans)
    assert [p.subset for p in plans[:3]] == ["1A", "1G", "2A"]


@given(st.integers(0, 2**32 - 1), st.sampled_from(list(Strategy)))
def test_split_invariants(seed, strategy):
    m = cohort_matrix(n_subj=12, n_pres=4)
    for plan in make_split(m, strategy, seed):
        val = plan.validation_rows()
        assert sorted(val.tolist()) == sorted(plan.rows.tolist())
        for tr, va in plan.folds:
            assert not set(tr) & set(va)
            assert sorted(np.concatenate([tr, va]).tolist()) == sorted(plan.rows.tolist())
            if strategy is Strategy.SUBJECT:
                assert not set(m.subject_ids[tr]) & set(m.subject_ids[va])
        assert plan.same_as(next(p for p in make_split(m, strategy, seed) if p.subset == plan.subset))


def test_split_errors():
    m = cohort_matrix(n_subj=6, n_pres=1)
    with pytest.raises(TooFewSubjects):
        make_split(m, "subject", 0)
    with pytest.raises(TooFewRows):
        make_split(m, "pairs", 0)


# classifiers ------------------------------------------------------------

def test_spec_grid_and_aliases():
    assert ClassifierSpec("svm", 0.5).family is Family.LINEAR_SVM
    with pytest.raises(InvalidParameter):
        ClassifierSpec("knn", 4)
    assert ClassifierSpec("knn", 4, extended=True).value == 4
    with pytest.raises(InvalidParameter):
        ClassifierSpec("forest", 3)


def test_single_class_rejected():
    with pytest.raises(SingleClassTrainingSet):
        train(ClassifierSpec("knn", 3), np.zeros((4, 2)), ["a"] * 4)


def test_knn_duplicated_row_and_k1_memorization():
    X = np.array([[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [2.0, 0.5], [3.0, 3.0]])
    y = np.array(["b", "b", "b", "a", "a", "a"])
    assert KNearestNeighbors(3).fit(X, y).predict([[0.0, 0.0]]).tolist() == ["b"]
    X2, y2 = blobs(60, sep=0.5, seed=3)
    assert np.all(KNearestNeighbors(1).fit(X2, y2).predict(X2) == y2)


@pytest.mark.parametrize("k", [3, 5, 11])
def test_knn_matches_sklearn(k):
    X, y = blobs(120, sep=1.0, d=4, seed=k)
    Xq = np.random.default_rng(99).normal(size=(50, 4))
    ours = KNearestNeighbors(k).fit(X[:100], y[:100]).predict(Xq)
    sc = Standardizer().fit(X[:100])
    ref = sk_neighbors.KNeighborsClassifier(k, algorithm="brute").fit(sc.transform(X[:100]), y[:100])
    assert np.array_equal(ours, ref.predict(sc.transform(Xq)))


@pytest.mark.parametrize("C", [0.025, 0.5, 0.75])
def test_svm_reaches_liblinear_optimum(C):
    # liblinear's dual solver also treats the bias as a regularized constant feature
    X, y = blobs(150, sep=1.5, d=3, seed=int(C * 100))
    ours = LinearSVM(C).fit(X, y, seed=1)
    Xs = ours.scaler_.transform(X)
    ref = sk_svm.LinearSVC(C=C, loss="hinge", dual=True, tol=1e-10, max_iter=200000, intercept_scaling=1.0).fit(Xs, y)
    s = np.where(y == ours.classes_[1], 1.0, -1.0)

    def primal(w, b):
        return 0.5 * (w @ w + b * b) + C * np.clip(1 - s * (Xs @ w + b), 0, None).sum()

    p_ours = primal(ours.coef_, ours.intercept_)
    p_ref = primal(ref.coef_.ravel(), ref.intercept_[0])
    assert ours.converged_
    assert abs(p_ours - p_ref) <= 1e-3 * max(1.0, p_ref)
    assert np.allclose(ours.coef_, ref.coef_.ravel(), atol=0.05)


def test_svm_deterministic_for_seed():
    X, y = blobs(80, sep=1.0, seed=2)
    a = LinearSVM(0.5).fit(X, y, seed=4).decision_function(X)
    b = LinearSVM(0.5).fit(X, y, seed=4).decision_function(X)
    assert np.array_equal(a, b)


def test_tree_root_split_matches_sklearn_impurity():
    X, y = blobs(100, sep=1.0, d=3, seed=8)
    ours = DecisionTree(1).fit(X, y)
    ref = sk_tree.DecisionTreeClassifier(max_depth=1, criterion="gini").fit(X, y)
    t = ref.tree_

    def child_impurity(counts):
        w = counts.sum(axis=1)
        g = 1 - ((counts / w[:, None]) ** 2).sum(axis=1)
        return (w * g).sum() / w.sum()

    ours_imp = child_impurity(ours.value_[[ours.left_[0], ours.right_[0]]])
    n = t.weighted_n_node_samples
    ref_imp = (n[1] * t.impurity[1] + n[2] * t.impurity[2]) / n[0]
    assert ours_imp == pytest.approx(ref_imp, abs=1e-12)


@given(st.integers(0, 10_000), st.sampled_from([1, 2, 3, 5]))
def test_tree_depth_cap(seed, depth):
    X, y = blobs(60, sep=0.3, d=3, seed=seed)
    t = DecisionTree(depth).fit(X, y)
    assert t.depth_ <= depth


@given(st.integers(0, 10_000))
def test_uncapped_tree_fits_consistent_data(seed):
    X, y = blobs(50, sep=0.3, d=2, seed=seed)
    assert np.all(DecisionTree(None).fit(X, y).predict(X) == y)


def brute_stump_error(X, s, w):
    best = np.inf
    for j in range(X.shape[1]):
        vals = sorted(set(X[:, j].tolist()))
        cuts = [-np.inf] + [(a + b) / 2 for a, b in zip(vals, vals[1:])] + [np.inf]
        for c in cuts:
            for pol in (1, -1):
                pred = np.where(X[:, j] > c, pol, -pol)
                best = min(best, float(w[pred != s].sum()))
    return best


def test_adaboost_first_stump_matches_brute_force():
    X, y = blobs(40, sep=1.0, d=3, seed=5)
    model = AdaBoost(1).fit(X, y)
    s = np.where(y == model.classes_[1], 1.0, -1.0)
    assert model.errors_[0] == pytest.approx(brute_stump_error(X, s, np.full(40, 1 / 40)), abs=1e-12)


def test_adaboost_separable_1d_reaches_zero_error():
    X = np.array([[1.0], [2.0], [3.0], [4.0], [5.0], [6.0]])
    y = np.array(["a", "a", "a", "b", "b", "b"])
    m = AdaBoost(10).fit(X, y)
    assert len(m.stumps_) <= 10
    assert np.all(m.predict(X) == y)


@given(st.integers(0, 10_000))
def test_adaboost_round_errors_and_bound(seed):
    X, y = blobs(60, sep=0.8, d=2, seed=seed)
    m = AdaBoost(25).fit(X, y)
    assert all(e < 0.5 for e in m.errors_)
    assert all(b2 <= b1 + 1e-15 for b1, b2 in zip(m.loss_bound_, m.loss_bound_[1:]))
    train_err = np.mean(m.predict(X) != y)
    assert train_err <= m.loss_bound_[-1] + 1e-12


@pytest.mark.parametrize("family,value", [("knn", 5), ("svm", 0.5), ("tree", 3), ("adaboost", 50)])
def test_blob_holdout_accuracy(family, value):
    X, y = blobs(200, seed=1)
    Xt, yt = blobs(200, seed=2)
    model = train(ClassifierSpec(family, value), X, y)
    assert np.mean(model.predict(Xt) == yt) >= 0.95


def test_standardizer_uses_training_rows_only():
    X, y = blobs(100, seed=4)
    tr = np.arange(90)
    model = train(ClassifierSpec("knn", 3), X[tr], y[tr])
    X_other = X.copy()
    X_other[90:] = 1e6  # validation rows changed arbitrarily
    model2 = train(ClassifierSpec("knn", 3), X_other[tr], y[tr])
    assert np.array_equal(model.scaler_.mean_, X[tr].mean(axis=0))
    assert np.array_equal(model.scaler_.mean_, model2.scaler_.mean_)
    assert np.array_equal(model.scaler_.scale_, model2.scaler_.scale_)


# cross-validation ------------------------------------------------------

def test_constant_label_dataset_scores_one():
    m = matrix_from(np.random.default_rng(0).normal(size=(30, 2)), np.array(["expert"] * 30))
    rep = cross_validate(m, ClassifierSpec("tree", 3), "pairs", seeds=[0])
    assert rep.mean == 1.0


def test_report_structure_and_worker_invariance():
    X, y = blobs(100, sep=2.0, seed=6)
    m = matrix_from(X, y)
    a = cross_validate(m, ClassifierSpec("svm", 0.5), "pairs", seeds=[0, 1, 2])
    b = cross_validate(m, ClassifierSpec("svm", 0.5), "pairs", seeds=[0, 1, 2], n_jobs=3)
    assert a.to_dict() == b.to_dict()
    r = a.results[0]
    assert set(r.fold_accuracies) == {0, 1, 2} and all(len(v) == 10 for v in r.fold_accuracies.values())
    assert r.mean == pytest.approx(np.mean(list(r.seed_means.values())))
    assert all(0 <= acc <= 1 for v in r.fold_accuracies.values() for acc in v)
    assert a.to_dict()["solver"]["svm_tol"] == 1e-6


def test_grid_search_ties_and_single_spec():
    X, y = blobs(200, seed=0, sep=8.0)
    m = matrix_from(X, y)
    spec, rep = grid_search(m, "tree", "pairs", seeds=[0])
    assert spec.value == 3 and rep.mean >= 0.95
    spec1, _ = grid_search(m, "knn", "pairs", seeds=[0], grid=[7])
    assert spec1.value == 7
    with pytest.raises(InvalidParameter):
        grid_search(m, "knn", "pairs", grid=[])


def test_knn_grid_accuracies_close_on_blobs():
    X, y = blobs(200, seed=3)
    m = matrix_from(X, y)
    accs = [cross_validate(m, ClassifierSpec("knn", k), "pairs", seeds=[0]).mean for k in (3, 5, 7, 9, 11)]
    assert max(accs) - min(accs) <= 0.02


def test_presentation_strategy_reports_and_table():
    m = cohort_matrix(n_subj=20, n_pres=4)
    rep = cross_validate(m, ClassifierSpec("knn", 3), "presentation", seeds=[0])
    assert [r.subset for r in rep.results] == ["1A", "1G", "2A", "2G"]
    assert "presentations evaluated (4)" in rep.notes[0]
    subs = {pid: m.take(np.flatnonzero(m.presentation_ids == pid)) for pid in ("1A", "2G")}
    rep2 = cross_validate(subs, ClassifierSpec("knn", 3), "presentation", seeds=[0])
    assert [r.subset for r in rep2.results] == ["1A", "2G"]
    assert rep2.result("1A").fold_accuracies == rep.result("1A").fold_accuracies
    table = accuracy_table([rep])
    assert "Nearest Neighbors" in table and "1A" in table and "Best" in table
