import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_clouds
from ucreg.dataset import Dataset, decompose_target, load_table
from ucreg.errors import (
    ConvergenceWarning,
    DegenerateLabelsError,
    IncompleteProfileError,
    InsufficientDataError,
    ZeroVarianceError,
)
from ucreg.logit import (
    BinaryLogitModel,
    FitConfig,
    MultinomialModel,
    fit_binary,
    fit_multinomial,
    penalized_gradient,
    penalized_log_likelihood,
    predict_binary,
    predict_multinomial,
    probability_matrix,
    sigmoid,
    softmax,
)


def dataset_from(cols: dict) -> Dataset:
    columns = {}
    for name, vals in cols.items():
        if isinstance(vals[0], str):
            columns[name] = tuple(vals)
        else:
            arr = np.asarray(vals, dtype=float)
            arr.flags.writeable = False
            columns[name] = arr
    return Dataset(column_order=tuple(cols), columns=columns)


def cloud_decomposition(y, labels=("a", "b", "c")):
    k = len(labels)
    presence = np.zeros((len(y), k), dtype=np.int8)
    presence[np.arange(len(y)), y] = 1
    from ucreg.dataset import TargetDecomposition

    return TargetDecomposition(
        target_name="t",
        labels=tuple(labels),
        presence=presence,
        row_indices=np.arange(len(y)),
    )


# ---------------------------------------------------------------- sigmoid

def test_sigmoid_at_zero():
    assert sigmoid(0.0) == 0.5


def test_sigmoid_closed_form():
    assert math.isclose(sigmoid(math.log(3)), 0.75, rel_tol=1e-12)


@given(st.floats(min_value=-500, max_value=500, allow_nan=False))
def test_sigmoid_complement(z):
    assert abs(sigmoid(z) + sigmoid(-z) - 1.0) < 1e-12


def test_sigmoid_clamped():
    assert sigmoid(1000.0) == 1 - 1e-15
    assert sigmoid(-1000.0) == 1e-15


# ---------------------------------------------------------------- softmax

def test_softmax_uniform():
    assert np.allclose(softmax([0.0, 0.0, 0.0]), [1 / 3] * 3, atol=1e-15)


def test_softmax_closed_form():
    out = softmax(np.log([1.0, 2.0, 3.0]))
    assert np.allclose(out, [1 / 6, 2 / 6, 3 / 6], atol=1e-12)


@given(st.lists(st.floats(-50, 50), min_size=2, max_size=6), st.floats(-100, 100))
def test_softmax_shift_invariance(z, c):
    z = np.array(z)
    assert np.allclose(softmax(z), softmax(z + c), atol=1e-12)


@given(st.lists(st.floats(-200, 200), min_size=2, max_size=8))
def test_softmax_sums_to_one(z):
    assert abs(softmax(np.array(z)).sum() - 1.0) < 1e-12


# ----------------------------------------------------- likelihood geometry

@given(st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=60, deadline=None)
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    n, d = 30, 3
    X = rng.normal(size=(n, d))
    y = (rng.uniform(size=n) < 0.5).astype(float)
    params = rng.normal(size=d + 1)
    l2 = 10.0 ** rng.uniform(-6, 0)
    g = penalized_gradient(params, X, y, l2)
    h = 1e-5
    for i in range(d + 1):
        e = np.zeros(d + 1)
        e[i] = h
        num = (
            penalized_log_likelihood(params + e, X, y, l2)
            - penalized_log_likelihood(params - e, X, y, l2)
        ) / (2 * h)
        assert abs(num - g[i]) / max(1.0, abs(g[i])) < 1e-6


def test_penalized_ll_monotone_across_iterations():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(80, 4))
    y = (X @ np.array([1.0, -2.0, 0.5, 0.0]) + rng.normal(size=80) > 0).astype(float)
    path = []
    fit_binary(X, y, callback=lambda it, ll: path.append(ll))
    assert all(b >= a for a, b in zip(path, path[1:]))


# ---------------------------------------------------------------- fitting

def _grid_best_ll(Xs, y, l2, w0s, w1s):
    best = -np.inf
    for w0 in w0s:
        for w1 in w1s:
            ll = penalized_log_likelihood(np.array([w0, w1]), Xs[:, None], y, l2)
            best = max(best, ll)
    return best


def test_separable_fit_converges_and_beats_grid_oracle():
    x = np.array([-2.0, -1.0, 1.0, 2.0])
    y = (x > 0).astype(float)
    m = fit_binary(x[:, None], y, attr_names=("x",))
    assert m.diagnostics.converged
    assert predict_binary(m, {"x": 2.0}) > 0.99
    # independent penalized-likelihood grid search in the standardized space
    xs = (x - x.mean()) / x.std()
    grid = _grid_best_ll(
        xs, y, m.config.l2, np.linspace(-5, 5, 81), np.linspace(0, 40, 401)
    )
    fitted_ll = penalized_log_likelihood(
        np.concatenate(([m.w0], m.w)), xs[:, None], y, m.config.l2
    )
    assert fitted_ll >= grid - 1e-9


def test_class_swap_negates_coefficients():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(60, 2))
    y = (X[:, 0] + rng.normal(scale=0.5, size=60) > 0).astype(float)
    m1 = fit_binary(X, y)
    m2 = fit_binary(X, 1 - y)
    assert abs(m1.w0 + m2.w0) < 1e-6
    assert np.all(np.abs(m1.w + m2.w) < 1e-6)


def test_noise_fit_small_weights_large_p():
    rng = np.random.default_rng(5)
    n = 400
    X = rng.normal(size=(n, 3))
    y = (rng.uniform(size=n) < 0.5).astype(float)
    m = fit_binary(X, y)
    assert np.all(np.abs(m.w) < 0.4)
    # permutation baseline: the observed LR statistic should sit inside
    # the null distribution, not in its upper tail
    lrs = []
    for _ in range(100):
        lrs.append(fit_binary(X, rng.permutation(y)).diagnostics.lr_chi2)
    assert m.diagnostics.lr_chi2 <= np.quantile(lrs, 0.99)
    assert m.diagnostics.p_value > 0.01


def test_intercept_only_closed_form():
    y = np.array([1.0, 0.0, 0.0, 0.0])
    m = fit_binary(np.empty((4, 0)), y)
    assert math.isclose(m.w0, math.log(0.25 / 0.75), rel_tol=1e-9)
    assert m.diagnostics.converged


def test_lr_chi2_nonnegative():
    rng = np.random.default_rng(23)
    for seed in range(5):
        X = rng.normal(size=(50, 2))
        y = (rng.uniform(size=50) < 0.4).astype(float)
        m = fit_binary(X, y)
        assert m.diagnostics.lr_chi2 >= -1e-8


def test_single_class_rejected():
    with pytest.raises(DegenerateLabelsError):
        fit_binary(np.ones((5, 1)) * np.arange(5)[:, None], np.ones(5))


def test_constant_column_rejected():
    X = np.column_stack([np.arange(6.0), np.full(6, 3.0)])
    y = np.array([0, 0, 0, 1, 1, 1.0])
    with pytest.raises(ZeroVarianceError) as exc:
        fit_binary(X, y, attr_names=("a", "flat"))
    assert "flat" in str(exc.value)


def test_n_not_greater_than_d_rejected():
    X = np.random.default_rng(0).normal(size=(3, 3))
    with pytest.raises(InsufficientDataError):
        fit_binary(X, np.array([0, 1, 0.0]))


def test_nonconvergence_warns_and_flags():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(40, 2))
    y = (X[:, 0] > 0).astype(float)
    with pytest.warns(ConvergenceWarning):
        m = fit_binary(X, y, cfg=FitConfig(max_iter=2))
    assert not m.diagnostics.converged
    assert m.diagnostics.iterations == 2


def test_affine_rescaling_leaves_predictions():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(100, 2))
    y = (X[:, 0] - X[:, 1] + rng.normal(size=100) > 0).astype(float)
    m1 = fit_binary(X, y, attr_names=("a", "b"))
    X2 = X.copy()
    X2[:, 1] = X2[:, 1] * 37.5 - 4.0
    m2 = fit_binary(X2, y, attr_names=("a", "b"))
    p1 = [predict_binary(m1, {"a": r[0], "b": r[1]}) for r in X[:10]]
    p2 = [predict_binary(m2, {"a": r[0], "b": r[1] * 37.5 - 4.0}) for r in X[:10]]
    assert np.allclose(p1, p2, atol=1e-9)


# ------------------------------------------------------------- multinomial

def test_k2_multinomial_equals_binary():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(80, 2))
    y = (X[:, 0] + rng.normal(scale=0.5, size=80) > 0).astype(int)
    dec = cloud_decomposition(1 - y, labels=("pos", "neg"))  # label 0 = positive
    mm = fit_multinomial(X, dec, attr_names=("a", "b"))
    bm = fit_binary(X, (y == 1).astype(float), attr_names=("a", "b"))
    for row in X[:20]:
        profile = {"a": row[0], "b": row[1]}
        p_multi = predict_multinomial(mm, profile)
        p_bin = predict_binary(bm, profile)
        assert abs(p_multi[0] - p_bin) < 1e-9
        assert abs(p_multi.sum() - 1.0) < 1e-12


def test_three_clouds_perfect_training_accuracy():
    X, y = make_clouds()
    dec = cloud_decomposition(y)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        mm = fit_multinomial(X, dec, attr_names=("u", "v"))
    # nearest-centroid oracle agrees on every training point
    centroids = np.array([X[y == j].mean(axis=0) for j in range(3)])
    for i in range(len(X)):
        probs = predict_multinomial(mm, {"u": X[i, 0], "v": X[i, 1]})
        oracle = np.argmin(((X[i] - centroids) ** 2).sum(axis=1))
        assert np.argmax(probs) == oracle == y[i]


def test_twin_labels_get_equal_probabilities():
    rng = np.random.default_rng(4)
    base = rng.normal(size=(30, 2))
    X = np.vstack([base, base, base + 8.0])
    y = np.array([0] * 30 + [1] * 30 + [2] * 30)
    dec = cloud_decomposition(y, labels=("twin1", "twin2", "far"))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        mm = fit_multinomial(X, dec, attr_names=("u", "v"))
    probs = predict_multinomial(mm, {"u": 0.0, "v": 0.0})
    assert abs(probs[0] - probs[1]) < 1e-12


def test_profile_at_means_gives_intercept_scores():
    X, y = make_clouds(n_per=25)
    dec = cloud_decomposition(y)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        mm = fit_multinomial(X, dec, attr_names=("u", "v"))
    sub = mm.submodels[0]
    profile = {"u": sub.means[0], "v": sub.means[1]}
    zs = [m.linear_profile(profile) for m in mm.submodels]
    assert np.allclose(zs, [m.w0 for m in mm.submodels], atol=1e-12)
    expected = softmax(np.array(zs + [0.0]))
    assert np.allclose(predict_multinomial(mm, profile), expected, atol=0)


def test_incomplete_profile_names_attribute():
    X, y = make_clouds(n_per=20)
    dec = cloud_decomposition(y)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        mm = fit_multinomial(X, dec, attr_names=("u", "v"))
    with pytest.raises(IncompleteProfileError) as exc:
        predict_multinomial(mm, {"u": 1.0})
    assert "v" in exc.value.missing


def test_probability_matrix_consistent_with_profile_path():
    X, y = make_clouds(n_per=20)
    dec = cloud_decomposition(y)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        mm = fit_multinomial(X, dec, attr_names=("u", "v"))
    ds = dataset_from({"u": X[:, 0], "v": X[:, 1]})
    pm = probability_matrix(mm, ds)
    assert pm.matrix.shape == (len(X), 3)
    assert np.all(np.abs(pm.matrix.sum(axis=1) - 1.0) < 1e-12)
    for i in (0, 25, 59):
        direct = predict_multinomial(mm, {"u": X[i, 0], "v": X[i, 1]})
        assert np.allclose(pm.matrix[i], direct, atol=1e-12, rtol=0)


def test_probability_matrix_skips_missing_rows():
    X, y = make_clouds(n_per=10)
    dec = cloud_decomposition(y)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        mm = fit_multinomial(X, dec, attr_names=("u", "v"))
    u = X[:, 0].copy()
    u[3] = np.nan
    ds = dataset_from({"u": u, "v": X[:, 1]})
    pm = probability_matrix(mm, ds)
    assert pm.n_skipped == 1
    assert 3 not in pm.row_indices.tolist()


def test_model_json_round_trip():
    rng = np.random.default_rng(13)
    X = rng.normal(size=(50, 2))
    y = (X[:, 0] > 0.2).astype(float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        m = fit_binary(X, y, attr_names=("a", "b"))
    again = BinaryLogitModel.from_json_dict(m.to_json_dict())
    assert again.w0 == m.w0
    assert np.array_equal(again.w, m.w)
    assert np.array_equal(again.means, m.means)
    profile = {"a": 0.3, "b": -1.1}
    assert predict_binary(again, profile) == predict_binary(m, profile)


def test_equation_text_uses_original_units():
    ds = load_table(b"t,x\n0,1\n0,2\n1,3\n1,4\n")
    dec = decompose_target(ds, "t")
    X = ds.values("x")[dec.row_indices][:, None]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        m = fit_binary(X, dec.presence[:, 1].astype(float), attr_names=("x",))
    eq = m.equation("death")
    assert eq.startswith("logit(P(death)) =")
    assert "*x" in eq
