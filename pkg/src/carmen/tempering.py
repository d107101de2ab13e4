"""Tempering-level selection and diagnostic curves.

The optimal level t* maximizes the log predictive score of held-out
validation data under the tempered posterior: a coarse scan over a
log-spaced grid followed by golden-section refinement in log10(t).
The curve runner evaluates the analytic and classifier-based log-ratio
diagnostics along the same grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conjugate import Model, SufficientStats, predictive_logpdf, temper_update
from .data import Dataset
from .discriminator import DEFAULT_RIDGE, FeatureMap
from .numerics import RngStream
from .ratio import LogRatioEstimate, estimate_log_ratio, estimate_reverse_log_ratio
from .testing import MisspecTestResult, t_test_logz
from .truths import TruthSpec, true_log_ratio

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

DEFAULT_GRID_LO = 1e-8
DEFAULT_GRID_HI = 1.0
DEFAULT_GRID_COUNT = 50

# substream allocation inside curve(): 1 = estimate at t*, 2 = reverse
# estimate at t*, 1000+i = grid point i
_SUB_T_STAR = 1
_SUB_REVERSE = 2
_SUB_GRID_BASE = 1000


@dataclass(frozen=True)
class TemperingGrid:
    """Strictly increasing tempering levels in (0, 1]."""

    values: np.ndarray
    spacing: str = "explicit"

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("grid must be a non-empty 1-D array")
        if np.any(v <= 0.0) or np.any(v > 1.0):
            raise ValueError("grid values must lie in (0, 1]")
        if v.size > 1 and np.any(np.diff(v) <= 0.0):
            raise ValueError("grid values must be strictly increasing")
        object.__setattr__(self, "values", v)

    @classmethod
    def log_uniform(
        cls,
        lo: float = DEFAULT_GRID_LO,
        hi: float = DEFAULT_GRID_HI,
        count: int = DEFAULT_GRID_COUNT,
    ) -> "TemperingGrid":
        if not 0.0 < lo < hi <= 1.0:
            raise ValueError("need 0 < lo < hi <= 1")
        if count < 2:
            raise ValueError("count must be >= 2")
        return cls(np.logspace(math.log10(lo), math.log10(hi), count), spacing="log-uniform")

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class TStarResult:
    t_star: float
    log_predictive: float
    at_boundary: bool


def optimize_t(model: Model, x_update: Dataset, x_valid: Dataset, grid: TemperingGrid) -> TStarResult:
    """Tempering level maximizing the validation log predictive score.

    Coarse grid scan, then golden-section refinement on log10(t) inside
    the bracket around the best grid point (absolute tolerance 1e-3 on
    log10 t).  A maximum at a grid edge is returned as-is and flagged.
    """
    if len(x_update) == 0 or len(x_valid) == 0:
        raise ValueError("both data partitions must be non-empty")
    stats = SufficientStats.from_dataset(x_update)

    def score(t: float) -> float:
        return float(predictive_logpdf(temper_update(model, stats, t), x_valid).sum())

    ts = grid.values
    scores = np.array([score(t) for t in ts])
    best = int(np.argmax(scores))
    if best == 0 or best == len(ts) - 1:
        return TStarResult(t_star=float(ts[best]), log_predictive=float(scores[best]), at_boundary=True)

    lo, hi = math.log10(ts[best - 1]), math.log10(ts[best + 1])
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = score(10.0**c)
    fd = score(10.0**d)
    while b - a > 1e-3:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = score(10.0**c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = score(10.0**d)
    u = c if fc >= fd else d
    fu = max(fc, fd)
    # never return a refinement worse than the best grid point
    if fu >= scores[best]:
        return TStarResult(t_star=float(10.0**u), log_predictive=float(fu), at_boundary=False)
    return TStarResult(t_star=float(ts[best]), log_predictive=float(scores[best]), at_boundary=False)


@dataclass(frozen=True)
class CurvePoint:
    t: float
    log_predictive: float | None
    logz_true_sum: float | None = None
    logz_approx_sum: float | None = None
    t_stat: float | None = None
    p_value: float | None = None


@dataclass(frozen=True)
class TemperingCurve:
    points: tuple[CurvePoint, ...]
    t_star: float
    t_star_boundary: bool
    log_predictive_at_t_star: float
    estimate_at_t_star: LogRatioEstimate
    test_at_t_star: MisspecTestResult
    true_at_t_star: LogRatioEstimate | None = None
    reverse_at_t_star: LogRatioEstimate | None = None


def curve(
    model: Model,
    truth: TruthSpec | None,
    x_update: Dataset,
    x_valid: Dataset,
    grid: TemperingGrid,
    fm: FeatureMap,
    k: int,
    rng: RngStream,
    ridge: float = DEFAULT_RIDGE,
    n_sim: int | None = None,
    full_curve: bool = False,
    reverse: bool = False,
) -> TemperingCurve:
    """Diagnostics along the tempering grid plus the headline result at t*.

    The analytic log ratio is evaluated at every grid point whenever the
    truth is known.  Classifier-based estimates along the whole grid cost
    one cross-validated fit per point and are opt-in via ``full_curve``;
    the estimate at t* is always computed.  A grid point that fails is
    recorded with missing fields rather than aborting the run.
    """
    opt = optimize_t(model, x_update, x_valid, grid)
    stats = SufficientStats.from_dataset(x_update)

    points: list[CurvePoint] = []
    for i, t in enumerate(grid.values):
        try:
            post = temper_update(model, stats, float(t))
            lp = float(predictive_logpdf(post, x_valid).sum())
            true_sum = None
            if truth is not None:
                true_sum = float(true_log_ratio(post, truth, x_valid).sum)
            approx_sum = t_stat = p_value = None
            if full_curve:
                est = estimate_log_ratio(
                    post, x_valid, fm, k, rng.substream(_SUB_GRID_BASE + i), n_sim=n_sim, ridge=ridge
                )
                res = t_test_logz(est)
                approx_sum = est.sum
                t_stat = res.statistic
                p_value = res.p_value
            points.append(
                CurvePoint(
                    t=float(t),
                    log_predictive=lp,
                    logz_true_sum=true_sum,
                    logz_approx_sum=approx_sum,
                    t_stat=t_stat,
                    p_value=p_value,
                )
            )
        except (ValueError, RuntimeError, np.linalg.LinAlgError):
            points.append(CurvePoint(t=float(t), log_predictive=None))

    post_star = temper_update(model, stats, opt.t_star)
    est_star = estimate_log_ratio(
        post_star, x_valid, fm, k, rng.substream(_SUB_T_STAR), n_sim=n_sim, ridge=ridge
    )
    test_star = t_test_logz(est_star)
    true_star = true_log_ratio(post_star, truth, x_valid) if truth is not None else None
    reverse_star = None
    if reverse:
        reverse_star = estimate_reverse_log_ratio(
            post_star, x_valid, fm, k, rng.substream(_SUB_REVERSE), n_sim=n_sim, ridge=ridge
        )

    return TemperingCurve(
        points=tuple(points),
        t_star=opt.t_star,
        t_star_boundary=opt.at_boundary,
        log_predictive_at_t_star=opt.log_predictive,
        estimate_at_t_star=est_star,
        test_at_t_star=test_star,
        true_at_t_star=true_star,
        reverse_at_t_star=reverse_star,
    )
