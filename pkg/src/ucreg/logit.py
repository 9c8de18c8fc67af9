"""Binary logistic fitting and the k-1 submodel multinomial composition.

Binary models maximize an L2-penalized Bernoulli log-likelihood by
Newton-Raphson with step halving, on internally standardized columns.
A multinomial model is k-1 binary fits of label j versus the reference
(last) label, combined at prediction time by softmax over
(z_1, ..., z_{k-1}, 0).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from .dataset import Dataset, TargetDecomposition
from .errors import (
    ConvergenceWarning,
    DegenerateLabelsError,
    IncompleteProfileError,
    InsufficientDataError,
    UnknownAttributeError,
    ZeroVarianceError,
)

PROB_EPS = 1e-15


def _sigmoid_raw(z):
    """Stable logistic without output clamping (internal use)."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def sigmoid(z):
    """Logistic 1/(1+e^-z), clamped to (1e-15, 1-1e-15).

    The clamp keeps downstream likelihoods and logs finite.
    """
    scalar = np.isscalar(z)
    out = np.clip(_sigmoid_raw(z), PROB_EPS, 1.0 - PROB_EPS)
    return float(out) if scalar else out


def softmax(z):
    """Probabilities e^{z_j} / sum_i e^{z_i}, computed with max subtraction."""
    z = np.asarray(z, dtype=float)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass(frozen=True)
class FitConfig:
    """Newton-Raphson settings; tol is the relative log-likelihood change."""

    max_iter: int = 100
    tol: float = 1e-8
    l2: float = 1e-6

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")

    def to_json_dict(self) -> dict:
        return {"max_iter": self.max_iter, "tol": self.tol, "l2": self.l2}


@dataclass(frozen=True)
class FitDiagnostics:
    iterations: int
    converged: bool
    log_likelihood: float
    null_log_likelihood: float
    lr_chi2: float
    p_value: float

    def to_json_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "log_likelihood": self.log_likelihood,
            "null_log_likelihood": self.null_log_likelihood,
            "lr_chi2": self.lr_chi2,
            "p_value": self.p_value,
        }


def penalized_log_likelihood(params, X, y, l2: float) -> float:
    """Bernoulli log-likelihood minus (l2/2)*||weights||^2.

    params[0] is the intercept (unpenalized), params[1:] the weights.
    """
    params = np.asarray(params, dtype=float)
    z = params[0] + np.asarray(X, dtype=float) @ params[1:]
    y = np.asarray(y, dtype=float)
    ll = float(y @ z - np.logaddexp(0.0, z).sum())
    return ll - 0.5 * l2 * float(params[1:] @ params[1:])


def penalized_gradient(params, X, y, l2: float) -> np.ndarray:
    """Analytic gradient of penalized_log_likelihood in the same layout."""
    params = np.asarray(params, dtype=float)
    X = np.asarray(X, dtype=float)
    z = params[0] + X @ params[1:]
    resid = np.asarray(y, dtype=float) - _sigmoid_raw(z)
    return np.concatenate(([resid.sum()], X.T @ resid - l2 * params[1:]))


@dataclass(frozen=True)
class BinaryLogitModel:
    """One fitted logit: prediction is sigmoid(w0 + w . standardized x)."""

    attr_names: tuple[str, ...]
    w0: float
    w: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    diagnostics: FitDiagnostics
    config: FitConfig

    @property
    def d(self) -> int:
        return len(self.attr_names)

    def linear(self, X: np.ndarray) -> np.ndarray:
        Xs = (np.asarray(X, dtype=float) - self.means) / self.stds
        return self.w0 + Xs @ self.w

    def linear_profile(self, profile) -> float:
        x = profile_vector(profile, self.attr_names)
        return float(self.linear(x[None, :])[0])

    def coefficients_original(self) -> tuple[float, np.ndarray]:
        """(intercept, weights) expressed in the raw attribute units."""
        w_orig = self.w / self.stds
        w0_orig = self.w0 - float(w_orig @ self.means)
        return w0_orig, w_orig

    def equation(self, outcome: str = "y") -> str:
        w0, w = self.coefficients_original()
        terms = [f"{w0:.6g}"]
        for name, c in zip(self.attr_names, w):
            terms.append(f"{'-' if c < 0 else '+'} {abs(c):.6g}*{name}")
        return f"logit(P({outcome})) = " + " ".join(terms)

    def to_json_dict(self) -> dict:
        w0_orig, w_orig = self.coefficients_original()
        return {
            "attributes": list(self.attr_names),
            "standardization": {
                "means": [float(v) for v in self.means],
                "stds": [float(v) for v in self.stds],
            },
            "intercept": self.w0,
            "coefficients": [float(v) for v in self.w],
            "intercept_original": w0_orig,
            "coefficients_original": [float(v) for v in w_orig],
            "diagnostics": self.diagnostics.to_json_dict(),
            "config": self.config.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "BinaryLogitModel":
        return cls(
            attr_names=tuple(doc["attributes"]),
            w0=float(doc["intercept"]),
            w=np.array(doc["coefficients"], dtype=float),
            means=np.array(doc["standardization"]["means"], dtype=float),
            stds=np.array(doc["standardization"]["stds"], dtype=float),
            diagnostics=FitDiagnostics(**doc["diagnostics"]),
            config=FitConfig(**doc["config"]),
        )


@dataclass(frozen=True)
class MultinomialModel:
    """k-1 binary submodels against the last (reference) label."""

    labels: tuple[str, ...]
    submodels: tuple[BinaryLogitModel, ...]

    @property
    def k(self) -> int:
        return len(self.labels)

    @property
    def attr_names(self) -> tuple[str, ...]:
        return self.submodels[0].attr_names

    def linear_matrix(self, X: np.ndarray) -> np.ndarray:
        """n x k score matrix (reference column fixed at 0)."""
        X = np.asarray(X, dtype=float)
        zs = np.column_stack(
            [m.linear(X) for m in self.submodels] + [np.zeros(len(X))]
        )
        return zs

    def to_json_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "attributes": list(self.attr_names),
            "submodels": [
                dict(m.to_json_dict(), label=self.labels[j],
                     equation=m.equation(self.labels[j]))
                for j, m in enumerate(self.submodels)
            ],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "MultinomialModel":
        return cls(
            labels=tuple(doc["labels"]),
            submodels=tuple(
                BinaryLogitModel.from_json_dict(m) for m in doc["submodels"]
            ),
        )


def profile_vector(profile, attr_names) -> np.ndarray:
    """Profile dict -> ordered value vector; names every missing attribute."""
    missing = [
        a
        for a in attr_names
        if a not in profile
        or profile[a] is None
        or (isinstance(profile[a], float) and np.isnan(profile[a]))
    ]
    if missing:
        raise IncompleteProfileError(missing)
    return np.array([float(profile[a]) for a in attr_names])


def _standardize(X: np.ndarray, attr_names):
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    for j, s in enumerate(stds):
        if s == 0.0:
            raise ZeroVarianceError(attr_names[j])
    return means, stds


def fit_binary(
    X,
    y,
    cfg: FitConfig = FitConfig(),
    attr_names=None,
    standardization=None,
    callback=None,
) -> BinaryLogitModel:
    """Fit one penalized binary logit by Newton-Raphson with step halving.

    Columns are standardized internally unless a shared (means, stds) pair
    is supplied.  The penalized log-likelihood is non-decreasing across
    iterations; convergence means its relative change fell below cfg.tol.
    ``callback(iteration, penalized_ll)`` is invoked once per iteration.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    if attr_names is None:
        attr_names = tuple(f"x{j + 1}" for j in range(d))
    attr_names = tuple(attr_names)
    if len(attr_names) != d:
        raise ValueError("attr_names length does not match design columns")
    if np.isnan(X).any():
        raise ValueError("design matrix contains missing values; exclude rows first")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("y must be binary 0/1")
    if len(np.unique(y)) < 2:
        raise DegenerateLabelsError("y contains a single class")
    if n <= d:
        raise InsufficientDataError(f"need more rows than attributes (n={n}, d={d})")

    if standardization is None:
        means, stds = _standardize(X, attr_names)
    else:
        means, stds = (np.asarray(v, dtype=float) for v in standardization)
    Xs = (X - means) / stds

    ybar = y.mean()
    w0_null = float(np.log(ybar / (1.0 - ybar)))
    ll_null = float(n * (ybar * np.log(ybar) + (1 - ybar) * np.log(1 - ybar)))

    params = np.zeros(d + 1)
    params[0] = w0_null
    ll = penalized_log_likelihood(params, Xs, y, cfg.l2)

    penalty_diag = np.full(d + 1, cfg.l2)
    penalty_diag[0] = 0.0
    Z = np.column_stack([np.ones(n), Xs])

    converged = False
    iterations = 0
    for it in range(1, cfg.max_iter + 1):
        iterations = it
        g = penalized_gradient(params, Xs, y, cfg.l2)
        p = _sigmoid_raw(Z @ params)
        W = p * (1.0 - p)
        H = Z.T @ (W[:, None] * Z) + np.diag(penalty_diag)
        try:
            delta = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(H, g, rcond=None)[0]

        alpha = 1.0
        ll_new = ll
        cand = params
        for _ in range(40):
            trial = params + alpha * delta
            ll_trial = penalized_log_likelihood(trial, Xs, y, cfg.l2)
            if ll_trial >= ll:
                cand, ll_new = trial, ll_trial
                break
            alpha *= 0.5

        rel = abs(ll_new - ll) / (abs(ll) + 1e-12)
        params, ll = cand, ll_new
        if callback is not None:
            callback(it, ll)
        if rel < cfg.tol:
            converged = True
            break

    if not converged:
        warnings.warn(
            f"fit stopped after {iterations} iterations without meeting tol",
            ConvergenceWarning,
            stacklevel=2,
        )

    ll_fit = penalized_log_likelihood(params, Xs, y, 0.0)
    lr = 2.0 * (ll_fit - ll_null)
    p_value = float(chi2.sf(lr, d)) if d > 0 else 1.0
    diagnostics = FitDiagnostics(
        iterations=iterations,
        converged=converged,
        log_likelihood=ll_fit,
        null_log_likelihood=ll_null,
        lr_chi2=lr,
        p_value=p_value,
    )
    return BinaryLogitModel(
        attr_names=attr_names,
        w0=float(params[0]),
        w=params[1:].copy(),
        means=means.copy(),
        stds=stds.copy(),
        diagnostics=diagnostics,
        config=cfg,
    )


def fit_multinomial(
    X,
    dec: TargetDecomposition,
    cfg: FitConfig = FitConfig(),
    attr_names=None,
) -> MultinomialModel:
    """Fit label-vs-reference submodels sharing one standardization.

    The reference is the last label; submodel j is trained on the rows
    carrying label j or the reference.  k = 2 reduces to one binary fit
    over all rows.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if dec.k < 2:
        raise DegenerateLabelsError("need at least two labels")
    if len(X) != len(dec.presence):
        raise ValueError("design rows do not match decomposition rows")
    n, d = X.shape
    if attr_names is None:
        attr_names = tuple(f"x{j + 1}" for j in range(d))
    attr_names = tuple(attr_names)
    if np.isnan(X).any():
        raise ValueError("design matrix contains missing values; exclude rows first")

    shared = _standardize(X, attr_names)
    ref = dec.k - 1
    submodels = []
    for j in range(dec.k - 1):
        mask = (dec.presence[:, j] == 1) | (dec.presence[:, ref] == 1)
        submodels.append(
            fit_binary(
                X[mask],
                dec.presence[mask, j].astype(float),
                cfg=cfg,
                attr_names=attr_names,
                standardization=shared,
            )
        )
    return MultinomialModel(labels=dec.labels, submodels=tuple(submodels))


def predict_binary(m: BinaryLogitModel, profile) -> float:
    """P(outcome | profile) for one binary model."""
    return float(sigmoid(m.linear_profile(profile)))


def predict_multinomial(mm: MultinomialModel, profile) -> np.ndarray:
    """Length-k probability vector for one profile."""
    zs = np.array([m.linear_profile(profile) for m in mm.submodels] + [0.0])
    return softmax(zs)


@dataclass(frozen=True)
class ProbabilityMatrix:
    """n x k probabilities plus which dataset rows produced them."""

    labels: tuple[str, ...]
    matrix: np.ndarray
    row_indices: np.ndarray
    n_skipped: int = 0

    def to_json_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "rows": [int(i) for i in self.row_indices],
            "matrix": [[float(v) for v in row] for row in self.matrix],
            "skipped_missing": self.n_skipped,
        }


def probability_matrix(
    mm: MultinomialModel, ds: Dataset, rows=None
) -> ProbabilityMatrix:
    """Evaluate the model over dataset rows; incomplete rows are skipped."""
    missing_cols = [a for a in mm.attr_names if a not in ds.attr_names]
    if missing_cols:
        raise UnknownAttributeError(missing_cols)
    if rows is None:
        rows = np.arange(ds.n_rows)
    rows = np.asarray(rows, dtype=np.intp)
    X = np.column_stack([ds.values(a)[rows] for a in mm.attr_names])
    complete = ~np.isnan(X).any(axis=1)
    zs = mm.linear_matrix(X[complete])
    return ProbabilityMatrix(
        labels=mm.labels,
        matrix=softmax(zs),
        row_indices=rows[complete],
        n_skipped=int((~complete).sum()),
    )
