"""Classifier suite behind one fit/score interface producing bot scores in [0, 1].

Logistic regression is implemented here directly (L2-penalised log-loss
minimised with L-BFGS); the remaining algorithms wrap scikit-learn estimators
with its default hyperparameters.
"""

from __future__ import annotations

import pickle
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

ALGORITHMS = (
    "logistic_regression",
    "random_forest",
    "gradient_boosting",
    "knn",
    "naive_bayes",
    "adaboost",
    "linear_svm",
    "mlp",
)
REQUIRED_ALGORITHMS = ALGORITHMS[:5]
SCALED = frozenset({"logistic_regression", "linear_svm", "knn", "mlp", "naive_bayes"})
MARGIN_LINK = frozenset({"linear_svm", "adaboost"})

MLP_HIDDEN = {"A": (120,), "B": (120,), "C": (120,), "D": (150,), "Light": (300, 200)}

MODEL_MAGIC = b"BOTDETECT-MODEL\n"
MODEL_VERSION = 1


class DegenerateLabelsError(ValueError):
    pass


@dataclass(frozen=True)
class ClassifierSpec:
    algorithm: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")


def default_hyperparameters(algorithm: str, feature_set_id: Optional[str] = None) -> dict:
    if algorithm == "logistic_regression":
        return {"C": 1.0, "max_iter": 1000, "tol": 1e-10}
    if algorithm == "random_forest":
        return {"n_estimators": 100, "criterion": "gini", "max_features": "sqrt"}
    if algorithm == "gradient_boosting":
        return {"n_estimators": 100, "learning_rate": 0.1, "max_depth": 3, "loss": "log_loss"}
    if algorithm == "knn":
        return {"n_neighbors": 5, "metric": "euclidean"}
    if algorithm == "naive_bayes":
        return {"var_smoothing": 1e-9}
    if algorithm == "adaboost":
        return {"n_estimators": 50, "learning_rate": 1.0}
    if algorithm == "linear_svm":
        return {"C": 1.0, "max_iter": 10000}
    if algorithm == "mlp":
        return {"hidden_layer_sizes": MLP_HIDDEN.get(feature_set_id, (100,)), "max_iter": 200}
    raise ValueError(f"unknown algorithm {algorithm!r}")


def make_spec(algorithm: str, feature_set_id: Optional[str] = None, seed: int = 0, **overrides) -> ClassifierSpec:
    hp = default_hyperparameters(algorithm, feature_set_id)
    hp.update(overrides)
    return ClassifierSpec(algorithm, hp, seed)


# -- logistic regression --------------------------------------------------------


def logistic_loss_grad(params: np.ndarray, X: np.ndarray, y: np.ndarray, C: float):
    """Objective ``0.5*|w|^2 + C*sum(log-loss)`` and its gradient; intercept unpenalised."""
    w, b = params[:-1], params[-1]
    z = X @ w + b
    loss = C * float(np.sum(np.logaddexp(0.0, z) - y * z)) + 0.5 * float(w @ w)
    r = C * (expit(z) - y)
    grad = np.empty_like(params)
    grad[:-1] = X.T @ r + w
    grad[-1] = r.sum()
    return loss, grad


class LogisticRegression:
    def __init__(self, C=1.0, max_iter=1000, tol=1e-10):
        self.C = C
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y):
        x0 = np.zeros(X.shape[1] + 1)
        res = minimize(
            logistic_loss_grad,
            x0,
            args=(X, y.astype(np.float64), self.C),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": self.max_iter, "gtol": self.tol, "ftol": 1e-15},
        )
        self.coef_ = res.x[:-1]
        self.intercept_ = res.x[-1]
        self.n_iter_ = res.nit
        return self

    def decision_function(self, X):
        return X @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        p = expit(self.decision_function(X))
        return np.column_stack([1.0 - p, p])


def _estimator(spec: ClassifierSpec):
    hp = dict(spec.hyperparameters)
    a = spec.algorithm
    if a == "logistic_regression":
        return LogisticRegression(**hp)
    if a == "random_forest":
        from sklearn.ensemble import RandomForestClassifier

        return RandomForestClassifier(random_state=spec.seed, n_jobs=1, **hp)
    if a == "gradient_boosting":
        from sklearn.ensemble import GradientBoostingClassifier

        return GradientBoostingClassifier(random_state=spec.seed, **hp)
    if a == "knn":
        from sklearn.neighbors import KNeighborsClassifier

        return KNeighborsClassifier(**hp)
    if a == "naive_bayes":
        from sklearn.naive_bayes import GaussianNB

        return GaussianNB(**hp)
    if a == "adaboost":
        from sklearn.ensemble import AdaBoostClassifier

        return AdaBoostClassifier(random_state=spec.seed, **hp)
    if a == "linear_svm":
        from sklearn.svm import LinearSVC

        return LinearSVC(random_state=spec.seed, **hp)
    if a == "mlp":
        from sklearn.neural_network import MLPClassifier

        hp["hidden_layer_sizes"] = tuple(hp["hidden_layer_sizes"])
        return MLPClassifier(random_state=spec.seed, **hp)
    raise ValueError(a)


# -- fitted models ----------------------------------------------------------------


@dataclass(frozen=True)
class Scaler:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X):
        std = X.std(axis=0)
        std[std == 0] = 1.0
        return cls(X.mean(axis=0), std)

    def transform(self, X):
        return (X - self.mean) / self.std


@dataclass(frozen=True)
class FittedModel:
    spec: ClassifierSpec
    estimator: object
    n_features: int
    scaler: Optional[Scaler] = None
    feature_set_id: Optional[str] = None
    training_combo_id: Optional[str] = None
    threshold: Optional[float] = None
    bigram: Optional[object] = None  # BigramModel for Light models

    def with_threshold(self, threshold: float) -> "FittedModel":
        return replace(self, threshold=float(threshold))


def encode_labels(y) -> np.ndarray:
    y = np.asarray(y)
    if y.dtype.kind in "US" or y.dtype == object:
        bad = set(y.tolist()) - {"bot", "human"}
        if bad:
            raise ValueError(f"labels must be 'bot' or 'human', got {sorted(bad)}")
        return (y == "bot").astype(np.int64)
    return y.astype(np.int64)


def _check_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("feature matrix must be 2-D")
    bad = np.argwhere(~np.isfinite(X))
    if bad.size:
        r, c = bad[0]
        raise ValueError(f"non-finite feature at row {r}, column {c}")
    return X


def fit(spec: ClassifierSpec, X, y, feature_set_id=None, training_combo_id=None, bigram=None) -> FittedModel:
    X = _check_matrix(X)
    y = encode_labels(y)
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"{X.shape[0]} rows but {y.shape[0]} labels")
    if X.shape[0] < 2 or len(np.unique(y)) < 2:
        raise DegenerateLabelsError("degenerate training labels")
    scaler = Scaler.fit(X) if spec.algorithm in SCALED else None
    Xt = scaler.transform(X) if scaler else X
    est = _estimator(spec)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        est.fit(Xt, y)
    return FittedModel(spec, est, X.shape[1], scaler, feature_set_id, training_combo_id, bigram=bigram)


def score(model: FittedModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0:
        return np.empty(0)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got shape {X.shape}")
    X = _check_matrix(X)
    Xt = model.scaler.transform(X) if model.scaler else X
    if model.spec.algorithm in MARGIN_LINK:
        s = expit(model.estimator.decision_function(Xt))
    else:
        s = model.estimator.predict_proba(Xt)[:, 1]
    return np.clip(s, 0.0, 1.0)


def save_model(model: FittedModel, path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(MODEL_VERSION.to_bytes(2, "big"))
        pickle.dump(model, fh, protocol=pickle.HIGHEST_PROTOCOL)
    tmp.replace(path)


def load_model(path) -> FittedModel:
    with open(path, "rb") as fh:
        if fh.read(len(MODEL_MAGIC)) != MODEL_MAGIC:
            raise ValueError(f"{path}: not a botdetect model file")
        version = int.from_bytes(fh.read(2), "big")
        if version != MODEL_VERSION:
            raise ValueError(f"{path}: unsupported model version {version}")
        try:
            model = pickle.load(fh)
        except Exception as exc:
            raise ValueError(f"{path}: corrupt model file ({exc})") from exc
    if not isinstance(model, FittedModel):
        raise ValueError(f"{path}: unexpected payload")
    return model
