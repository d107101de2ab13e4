"""Probabilistic classifier over summary-statistic features.

Logistic regression fitted by iteratively reweighted least squares with a
small ridge penalty, plus stratified k-fold cross-validation that yields
one out-of-fold log-odds value per held-out point.  The log-odds of the
"simulated" class against the "observed" class is the raw material for
the density-ratio estimates in :mod:`carmen.ratio`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .numerics import RngStream

_LN_CLAMP = 1e-12  # |v| floor before taking logs, keeps ln-features total

DEFAULT_RIDGE = 1e-6
DEFAULT_MAX_ITER = 100
DEFAULT_TOL = 1e-8


def _ln_abs(v: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(np.abs(v), _LN_CLAMP))


# Each transform maps (x, y) columns to one feature column.  For
# univariate data the value itself plays the role of x and y is absent.
_TRANSFORMS = {
    "x": lambda x, y: x,
    "abs_x": lambda x, y: np.abs(x),
    "x2": lambda x, y: x**2,
    "x3": lambda x, y: x**3,
    "x4": lambda x, y: x**4,
    "ln_abs_x": lambda x, y: _ln_abs(x),
    "y": lambda x, y: y,
    "abs_y": lambda x, y: np.abs(y),
    "y2": lambda x, y: y**2,
    "ln_abs_y": lambda x, y: _ln_abs(y),
    "yx": lambda x, y: y * x,
    "abs_yx": lambda x, y: np.abs(y * x),
    "yx2": lambda x, y: (y * x) ** 2,
}

_NEEDS_RESPONSE = {"y", "abs_y", "y2", "ln_abs_y", "yx", "abs_yx", "yx2"}


@dataclass(frozen=True)
class FeatureMap:
    """An ordered list of named transforms applied to each datapoint."""

    transforms: tuple[str, ...]

    def __init__(self, transforms) -> None:
        names = tuple(transforms)
        if not names:
            raise ValueError("feature map needs at least one transform")
        unknown = [t for t in names if t not in _TRANSFORMS]
        if unknown:
            raise ValueError(f"unknown transforms {unknown}; known: {sorted(_TRANSFORMS)}")
        object.__setattr__(self, "transforms", names)

    def matrix(self, data: Dataset) -> np.ndarray:
        """Raw (unstandardized) feature matrix, one row per datapoint."""
        if data.is_regression:
            x, y = data.covariates, data.values
        else:
            x, y = data.values, None
        cols = []
        for name in self.transforms:
            if y is None and name in _NEEDS_RESPONSE:
                raise ValueError(f"transform {name!r} needs regression data")
            cols.append(_TRANSFORMS[name](x, y))
        return np.column_stack(cols)


@dataclass(frozen=True)
class LabeledDesign:
    """Standardized feature rows with class labels (simulated = 1)."""

    features: np.ndarray
    labels: np.ndarray
    mean: np.ndarray
    sd: np.ndarray

    def transform(self, raw: np.ndarray) -> np.ndarray:
        """Standardize held-out raw feature rows with the training parameters."""
        return (np.atleast_2d(raw) - self.mean) / self.sd


def _standardize(raw: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    mu = raw.mean(axis=0)
    sd = raw.std(axis=0)
    sd = np.where(sd > 0.0, sd, 1.0)
    return (raw - mu) / sd, mu, sd


def build_design(observed: Dataset, simulated: Dataset, fm: FeatureMap) -> LabeledDesign:
    """Feature rows for both classes, standardization fitted on the union."""
    raw = np.vstack([fm.matrix(observed), fm.matrix(simulated)])
    labels = np.concatenate([np.zeros(len(observed)), np.ones(len(simulated))])
    feats, mu, sd = _standardize(raw)
    return LabeledDesign(features=feats, labels=labels, mean=mu, sd=sd)


@dataclass(frozen=True)
class LogisticFit:
    intercept: float
    weights: np.ndarray
    ridge: float
    converged: bool
    iterations: int
    objective_path: tuple[float, ...] = field(repr=False, default=())


def _expit(eta: np.ndarray) -> np.ndarray:
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    ez = np.exp(eta[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def fit_logistic(
    design: LabeledDesign,
    ridge: float = DEFAULT_RIDGE,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> LogisticFit:
    """Ridge-penalized logistic regression by IRLS.

    The penalty applies to the weights only, never the intercept.  Each
    Newton step is halved until the penalized log-likelihood does not
    decrease, so the objective path is non-decreasing.  A singular system
    bumps the ridge by 10x (up to three times) before giving up with
    ``converged=False``; the last iterate is always returned.
    """
    if ridge < 0.0:
        raise ValueError("ridge strength must be nonnegative")
    y = np.asarray(design.labels, dtype=float)
    classes = np.unique(y)
    if not np.array_equal(classes, [0.0, 1.0]):
        raise ValueError("design must contain both classes")
    X = design.features
    n, d = X.shape
    A = np.hstack([np.ones((n, 1)), X])
    beta = np.zeros(d + 1)
    lam = float(ridge)

    def objective(b: np.ndarray) -> float:
        eta = A @ b
        ll = float(y @ eta - np.logaddexp(0.0, eta).sum())
        return ll - 0.5 * lam * float(b[1:] @ b[1:])

    obj = objective(beta)
    path = [obj]
    converged = False
    bumps = 0
    iterations = 0
    while iterations < max_iter:
        eta = A @ beta
        p = _expit(eta)
        w = p * (1.0 - p)
        grad = A.T @ (y - p)
        grad[1:] -= lam * beta[1:]
        hess = A.T @ (w[:, None] * A)
        hess[1:, 1:] += lam * np.eye(d)
        try:
            delta = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            if bumps >= 3:
                break
            bumps += 1
            lam = lam * 10.0 if lam > 0.0 else 1e-6
            obj = objective(beta)
            continue
        iterations += 1
        step = 1.0
        accepted = False
        for _ in range(30):
            cand = beta + step * delta
            cand_obj = objective(cand)
            if cand_obj >= obj - 1e-12:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        change = float(np.max(np.abs(cand - beta)))
        beta = cand
        obj = cand_obj
        path.append(obj)
        if change < tol:
            converged = True
            break

    return LogisticFit(
        intercept=float(beta[0]),
        weights=beta[1:].copy(),
        ridge=lam,
        converged=converged,
        iterations=iterations,
        objective_path=tuple(path),
    )


def log_odds(fit: LogisticFit, rows: np.ndarray):
    """ln(P(sim | x) / P(obs | x)) for standardized feature rows."""
    rows = np.asarray(rows, dtype=float)
    single = rows.ndim == 1
    rows = np.atleast_2d(rows)
    if rows.shape[1] != fit.weights.size:
        raise ValueError(f"row dimension {rows.shape[1]} != fit dimension {fit.weights.size}")
    out = fit.intercept + rows @ fit.weights
    return float(out[0]) if single else out


def _fold_indices(n: int, k: int, g: np.random.Generator) -> list[np.ndarray]:
    return [np.sort(f) for f in np.array_split(g.permutation(n), k)]


def cv_log_odds(
    observed: Dataset,
    simulated: Dataset,
    fm: FeatureMap,
    k: int,
    ridge: float,
    rng: RngStream,
    score: str = "observed",
) -> np.ndarray:
    """Out-of-fold log-odds for every point of one class.

    Both classes are partitioned into ``k`` folds (stratified, so each fold
    is class-balanced up to rounding); each fold's points are scored by a
    classifier fitted on the remaining folds, with standardization refit
    on the training rows only.  Returns one value per point of the scored
    class, aligned with its dataset order.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(observed) < k or len(simulated) < k:
        raise ValueError("each class needs at least k points")
    if score not in ("observed", "simulated"):
        raise ValueError(f"score must be 'observed' or 'simulated', got {score!r}")

    raw_obs = fm.matrix(observed)
    raw_sim = fm.matrix(simulated)
    g = rng.generator()
    folds_obs = _fold_indices(len(observed), k, g)
    folds_sim = _fold_indices(len(simulated), k, g)

    target_raw = raw_obs if score == "observed" else raw_sim
    out = np.full(target_raw.shape[0], np.nan)
    for j in range(k):
        train_obs = np.setdiff1d(np.arange(len(observed)), folds_obs[j])
        train_sim = np.setdiff1d(np.arange(len(simulated)), folds_sim[j])
        raw_train = np.vstack([raw_obs[train_obs], raw_sim[train_sim]])
        labels = np.concatenate([np.zeros(train_obs.size), np.ones(train_sim.size)])
        feats, mu, sd = _standardize(raw_train)
        design = LabeledDesign(features=feats, labels=labels, mean=mu, sd=sd)
        fit = fit_logistic(design, ridge=ridge)
        held = folds_obs[j] if score == "observed" else folds_sim[j]
        out[held] = log_odds(fit, design.transform(target_raw[held]))
    return out
