import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_clouds
from test_logit import cloud_decomposition, dataset_from
from ucreg.errors import ConvergenceWarning, InsufficientDataError, UndefinedRocError
from ucreg.evaluation import RocCurve, auc_pairs_oracle, confusion, roc_curve, split
from ucreg.logit import BinaryLogitModel, FitConfig, FitDiagnostics, MultinomialModel, fit_multinomial


def test_perfect_ranking():
    c = roc_curve([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1])
    assert c.auc == 1.0


def test_inverted_ranking():
    c = roc_curve([0.9, 0.8, 0.2, 0.1], [0, 0, 1, 1])
    assert c.auc == 0.0


def test_interleaved_case_derived():
    # brute-force concordant pairs: pos {0.35, 0.8} vs neg {0.1, 0.4}
    # -> 3 of 4 concordant
    c = roc_curve([0.1, 0.35, 0.4, 0.8], [0, 1, 0, 1])
    assert c.auc == 0.75
    assert auc_pairs_oracle([0.1, 0.35, 0.4, 0.8], [0, 1, 0, 1]) == 0.75


def test_youden_optimal_lowest_threshold_tie_break():
    c = roc_curve([0.1, 0.35, 0.4, 0.8], [0, 1, 0, 1])
    # J = 0.5 both at t=0.35 and t=0.8; lowest threshold wins
    assert c.optimal_threshold == 0.35
    assert c.optimal_j == 0.5


def test_endpoints_and_point_count():
    scores = [0.3, 0.3, 0.7, 0.2, 0.9]
    c = roc_curve(scores, [0, 1, 0, 0, 1])
    assert c.points[0].threshold == -np.inf
    assert (c.points[0].sensitivity, c.points[0].fpr) == (1.0, 1.0)
    assert c.points[-1].threshold == np.inf
    assert (c.points[-1].sensitivity, c.points[-1].fpr) == (0.0, 0.0)
    assert len(c.points) <= len(set(scores)) + 1


def test_monotone_sweep():
    rng = np.random.default_rng(0)
    scores = rng.uniform(size=60).round(1)  # force ties
    truth = (rng.uniform(size=60) < 0.4).astype(int)
    c = roc_curve(scores, truth)
    sens = [p.sensitivity for p in c.points]
    fprs = [p.fpr for p in c.points]
    assert all(b <= a for a, b in zip(sens, sens[1:]))
    assert all(b <= a for a, b in zip(fprs, fprs[1:]))


def test_single_class_rejected():
    with pytest.raises(UndefinedRocError):
        roc_curve([0.1, 0.2], [1, 1])
    with pytest.raises(UndefinedRocError):
        auc_pairs_oracle([0.1, 0.2], [0, 0])


def test_all_tied_scores_half():
    assert auc_pairs_oracle([0.5] * 6, [0, 1, 0, 1, 0, 1]) == 0.5
    assert roc_curve([0.5] * 6, [0, 1, 0, 1, 0, 1]).auc == 0.5


@given(st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=100, deadline=None)
def test_trapezoid_equals_pair_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 200))
    scores = rng.integers(0, 10, size=n) / 10.0  # heavy ties
    truth = rng.integers(0, 2, size=n)
    if truth.min() == truth.max():
        truth[0] = 1 - truth[0]
    assert abs(roc_curve(scores, truth).auc - auc_pairs_oracle(scores, truth)) < 1e-12


@given(st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=50, deadline=None)
def test_auc_invariant_under_monotone_transform(seed):
    rng = np.random.default_rng(seed)
    scores = rng.normal(size=50)
    truth = rng.integers(0, 2, size=50)
    if truth.min() == truth.max():
        truth[0] = 1 - truth[0]
    a0 = roc_curve(scores, truth).auc
    a1 = roc_curve(np.exp(scores), truth).auc
    a2 = roc_curve(3.0 * scores + 11.0, truth).auc
    assert abs(a0 - a1) < 1e-12 and abs(a0 - a2) < 1e-12


@given(st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=50, deadline=None)
def test_class_swap_flips_auc(seed):
    rng = np.random.default_rng(seed)
    scores = rng.normal(size=40)
    truth = rng.integers(0, 2, size=40)
    if truth.min() == truth.max():
        truth[0] = 1 - truth[0]
    assert abs(roc_curve(scores, truth).auc - (1 - roc_curve(scores, 1 - truth).auc)) < 1e-12


def test_roc_json_export_threshold_encoding():
    doc = roc_curve([0.2, 0.8], [0, 1]).to_json_dict(model_meta={"p_value": 0.5})
    assert doc["points"][0]["t"] == "-inf"
    assert doc["points"][-1]["t"] == "inf"
    assert doc["model_meta"]["p_value"] == 0.5


# ------------------------------------------------------------------ confusion

def _cloud_model(n_per=25):
    X, y = make_clouds(n_per=n_per)
    dec = cloud_decomposition(y)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        mm = fit_multinomial(X, dec, attr_names=("u", "v"))
    ds = dataset_from({"u": X[:, 0], "v": X[:, 1], "t": ["abc"[j] for j in y]})
    return mm, ds


def test_confusion_diagonal_on_separable_clouds():
    mm, ds = _cloud_model()
    from ucreg.dataset import decompose_target

    dec = decompose_target(ds, "t")
    cm = confusion(mm, ds, dec)
    assert cm.total == 75
    assert np.array_equal(cm.counts, np.diag([25, 25, 25]))


def test_confusion_single_row():
    mm, ds = _cloud_model()
    from ucreg.dataset import decompose_target

    dec = decompose_target(ds, "t")
    cm = confusion(mm, ds, dec.select_rows(np.array([0])))
    assert cm.total == 1


def test_confusion_uniform_model_ties_to_lowest_index():
    zero = np.zeros(2)
    diag = FitDiagnostics(1, True, 0.0, 0.0, 0.0, 1.0)
    sub = BinaryLogitModel(
        attr_names=("u", "v"),
        w0=0.0,
        w=zero,
        means=zero,
        stds=np.ones(2),
        diagnostics=diag,
        config=FitConfig(),
    )
    mm = MultinomialModel(labels=("a", "b", "c"), submodels=(sub, sub))
    ds = dataset_from({"u": [1.0, 2.0], "v": [3.0, 4.0], "t": ["a", "b"]})
    from ucreg.dataset import decompose_target

    cm = confusion(mm, ds, decompose_target(ds, "t"))
    assert cm.counts[:, 0].sum() == 2  # every prediction lands on label 0


# ---------------------------------------------------------------------- split

def test_split_sizes():
    ds = dataset_from({"x": list(range(10))})
    train, test = split(ds, 0.2, seed=7)
    assert len(test) == 2 and len(train) == 8


def test_split_deterministic():
    ds = dataset_from({"x": list(range(50))})
    a = split(ds, 0.3, seed=42)
    b = split(ds, 0.3, seed=42)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_split_half():
    ds = dataset_from({"x": [1.0, 2.0, 3.0, 4.0]})
    train, test = split(ds, 0.5, seed=0)
    assert len(train) == len(test) == 2


def test_split_disjoint_covering():
    ds = dataset_from({"x": list(range(23))})
    train, test = split(ds, 0.25, seed=3)
    both = np.concatenate([train, test])
    assert sorted(both.tolist()) == list(range(23))


def test_split_bad_ratio():
    ds = dataset_from({"x": [1.0, 2.0]})
    with pytest.raises(ValueError):
        split(ds, 0.0, seed=1)
    with pytest.raises(ValueError):
        split(ds, 1.0, seed=1)


def test_split_singleton_rejected():
    ds = dataset_from({"x": [1.0]})
    with pytest.raises(InsufficientDataError):
        split(ds, 0.5, seed=1)
