"""Tempered conjugate updates and their analytic posterior predictives.

Three exponential-family models are supported, each with a closed-form
power update: the likelihood contribution enters every sufficient
statistic scaled by the tempering level ``t`` in [0, 1].  ``t = 0``
returns the prior exactly and ``t = 1`` is the standard Bayes update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .numerics import RngStream, log_gamma


def _check_t(t: float) -> float:
    t = float(t)
    if not (np.isfinite(t) and 0.0 <= t <= 1.0):
        raise ValueError(f"tempering level must lie in [0, 1], got {t!r}")
    return t


@dataclass(frozen=True)
class SufficientStats:
    """Sufficient statistics of an update batch.

    For univariate families ``sum_x``/``sum_xx`` are moments of the
    values; for regression they are moments of the covariates and the
    response sums are carried separately.
    """

    n: int
    sum_x: float = 0.0
    sum_xx: float = 0.0
    sum_xy: float = 0.0
    sum_y: float = 0.0
    sum_yy: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        for name in ("sum_x", "sum_xx", "sum_xy", "sum_y", "sum_yy"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.n > 0:
            slack = 1e-9 * max(1.0, abs(self.sum_xx), abs(self.sum_yy))
            if self.sum_xx < self.sum_x**2 / self.n - slack:
                raise ValueError("sum_xx inconsistent with sum_x")
            if self.sum_yy < self.sum_y**2 / self.n - slack:
                raise ValueError("sum_yy inconsistent with sum_y")

    @classmethod
    def from_dataset(cls, data: Dataset) -> "SufficientStats":
        y = data.values
        if data.covariates is None:
            return cls(n=len(data), sum_x=float(y.sum()), sum_xx=float((y * y).sum()))
        x = data.covariates
        return cls(
            n=len(data),
            sum_x=float(x.sum()),
            sum_xx=float((x * x).sum()),
            sum_xy=float((x * y).sum()),
            sum_y=float(y.sum()),
            sum_yy=float((y * y).sum()),
        )


# ---------------------------------------------------------------------------
# Gaussian with known observation noise, conjugate normal prior on the mean
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianKnownVarModel:
    """x ~ N(mu, noise_sd^2) with mu ~ N(prior_mean, prior_sd^2)."""

    noise_sd: float
    prior_mean: float
    prior_sd: float

    def __post_init__(self) -> None:
        if not (self.noise_sd > 0.0 and self.prior_sd > 0.0):
            raise ValueError("noise_sd and prior_sd must be positive")

    def posterior(self, stats: SufficientStats, t: float) -> "GaussianPosterior":
        t = _check_t(t)
        noise_var = self.noise_sd**2
        precision = 1.0 / self.prior_sd**2 + t * stats.n / noise_var
        mean = (self.prior_mean / self.prior_sd**2 + t * stats.sum_x / noise_var) / precision
        return GaussianPosterior(noise_sd=self.noise_sd, mean=mean, precision=precision, t=t)


@dataclass(frozen=True)
class GaussianPosterior:
    """Tempered posterior N(mean, 1/precision) over the Gaussian mean."""

    noise_sd: float
    mean: float
    precision: float
    t: float

    @property
    def sd(self) -> float:
        return self.precision**-0.5

    @property
    def predictive_var(self) -> float:
        return self.noise_sd**2 + 1.0 / self.precision

    def predictive_logpdf(self, x):
        v = self.predictive_var
        x = np.asarray(x, dtype=float)
        out = -0.5 * (np.log(2.0 * np.pi * v) + (x - self.mean) ** 2 / v)
        return float(out) if out.ndim == 0 else out

    def predictive_sample(self, rng: RngStream, n: int) -> Dataset:
        g = rng.generator()
        mus = g.normal(self.mean, self.sd, size=n)
        return Dataset(g.normal(mus, self.noise_sd))

    def param_logpdf(self, mu):
        mu = np.asarray(mu, dtype=float)
        out = 0.5 * np.log(self.precision / (2.0 * np.pi)) - 0.5 * self.precision * (mu - self.mean) ** 2
        return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Poisson counts with conjugate gamma prior on the rate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PoissonGammaModel:
    """x ~ Poisson(lam) with lam ~ Gamma(shape, rate)."""

    shape: float
    rate: float

    def __post_init__(self) -> None:
        if not (self.shape > 0.0 and self.rate > 0.0):
            raise ValueError("shape and rate must be positive")

    def posterior(self, stats: SufficientStats, t: float) -> "PoissonGammaPosterior":
        t = _check_t(t)
        return PoissonGammaPosterior(
            shape=self.shape + t * stats.sum_x,
            rate=self.rate + t * stats.n,
            t=t,
        )


@dataclass(frozen=True)
class PoissonGammaPosterior:
    """Tempered posterior Gamma(shape, rate); negative-binomial predictive."""

    shape: float
    rate: float
    t: float

    def predictive_logpdf(self, x):
        x = np.asarray(x, dtype=float)
        if x.size and np.any(x < 0):
            raise ValueError("counts must be nonnegative")
        r = self.shape
        out = (
            log_gamma(x + r) - log_gamma(r) - log_gamma(x + 1.0)
            + r * math.log(self.rate / (1.0 + self.rate))
            + x * math.log(1.0 / (1.0 + self.rate))
        )
        return float(out) if np.ndim(out) == 0 else out

    def predictive_sample(self, rng: RngStream, n: int) -> Dataset:
        g = rng.generator()
        lams = g.gamma(self.shape, 1.0 / self.rate, size=n)
        return Dataset(g.poisson(lams).astype(float))

    def param_logpdf(self, lam):
        lam = np.asarray(lam, dtype=float)
        if np.any(lam <= 0):
            raise ValueError("rate parameter must be positive")
        out = (
            self.shape * math.log(self.rate) - log_gamma(self.shape)
            + (self.shape - 1.0) * np.log(lam) - self.rate * lam
        )
        return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Univariate linear regression (no intercept) with normal-inverse-gamma prior
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NIGRegressionModel:
    """y ~ N(theta*x, sigma^2); theta | sigma^2 ~ N(coef_mean, sigma^2/precision_scale),
    sigma^2 ~ InvGamma(shape, scale)."""

    coef_mean: float
    precision_scale: float
    shape: float
    scale: float

    def __post_init__(self) -> None:
        if not (self.precision_scale > 0.0 and self.shape > 0.0 and self.scale > 0.0):
            raise ValueError("precision_scale, shape and scale must be positive")

    def posterior(self, stats: SufficientStats, t: float) -> "NIGRegressionPosterior":
        t = _check_t(t)
        lam = self.precision_scale + t * stats.sum_xx
        coef = (self.precision_scale * self.coef_mean + t * stats.sum_xy) / lam
        shape = self.shape + 0.5 * t * stats.n
        scale = self.scale + 0.5 * (
            t * stats.sum_yy + self.precision_scale * self.coef_mean**2 - lam * coef**2
        )
        if scale <= 0.0:
            raise RuntimeError("posterior scale collapsed to a nonpositive value")
        return NIGRegressionPosterior(coef=coef, coef_precision=lam, shape=shape, scale=scale, t=t)


def _student_t_logpdf(z, df):
    z = np.asarray(z, dtype=float)
    return (
        log_gamma(0.5 * (df + 1.0)) - log_gamma(0.5 * df)
        - 0.5 * math.log(df * math.pi)
        - 0.5 * (df + 1.0) * np.log1p(z * z / df)
    )


@dataclass(frozen=True)
class NIGRegressionPosterior:
    """Tempered normal-inverse-gamma posterior; Student-t predictive."""

    coef: float
    coef_precision: float
    shape: float
    scale: float
    t: float

    def predictive_logpdf(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        df = 2.0 * self.shape
        scale_sq = (self.scale / self.shape) * (1.0 + x * x / self.coef_precision)
        s = np.sqrt(scale_sq)
        out = _student_t_logpdf((y - self.coef * x) / s, df) - np.log(s)
        return float(out) if np.ndim(out) == 0 else out

    def predictive_sample(self, rng: RngStream, n: int, covariates) -> Dataset:
        if covariates is None:
            raise ValueError("regression predictive sampling requires covariates")
        x = np.asarray(covariates, dtype=float)
        if x.shape != (n,):
            raise ValueError(f"covariates must have shape ({n},), got {x.shape}")
        g = rng.generator()
        sigma_sq = 1.0 / g.gamma(self.shape, 1.0 / self.scale, size=n)
        theta = g.normal(self.coef, np.sqrt(sigma_sq / self.coef_precision))
        y = theta * x + g.normal(0.0, np.sqrt(sigma_sq))
        return Dataset(y, covariates=x)

    def param_logpdf(self, theta, sigma_sq):
        theta = np.asarray(theta, dtype=float)
        sigma_sq = np.asarray(sigma_sq, dtype=float)
        if np.any(sigma_sq <= 0):
            raise ValueError("sigma_sq must be positive")
        ig = (
            self.shape * math.log(self.scale) - log_gamma(self.shape)
            - (self.shape + 1.0) * np.log(sigma_sq) - self.scale / sigma_sq
        )
        cond_var = sigma_sq / self.coef_precision
        norm = -0.5 * (np.log(2.0 * np.pi * cond_var) + (theta - self.coef) ** 2 / cond_var)
        out = ig + norm
        return float(out) if np.ndim(out) == 0 else out


Model = GaussianKnownVarModel | PoissonGammaModel | NIGRegressionModel
TemperedPosterior = GaussianPosterior | PoissonGammaPosterior | NIGRegressionPosterior


def temper_update(model: Model, stats: SufficientStats, t: float) -> TemperedPosterior:
    """Closed-form tempered posterior for any of the three families."""
    return model.posterior(stats, t)


def predictive_logpdf(post: TemperedPosterior, data: Dataset) -> np.ndarray:
    """Per-point log predictive density/mass of ``data`` under ``post``."""
    if isinstance(post, NIGRegressionPosterior):
        if data.covariates is None:
            raise ValueError("regression predictive requires covariates")
        return np.asarray(post.predictive_logpdf(data.covariates, data.values))
    return np.asarray(post.predictive_logpdf(data.values))


def predictive_sample(
    post: TemperedPosterior, rng: RngStream, n: int, covariates=None
) -> Dataset:
    """Ancestral draw of ``n`` points from the tempered posterior predictive."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(post, NIGRegressionPosterior):
        return post.predictive_sample(rng, n, covariates)
    if covariates is not None:
        raise ValueError("covariates are only meaningful for regression models")
    return post.predictive_sample(rng, n)


def log_tempered_predictive(model: Model, x_update: Dataset, x_valid: Dataset, t: float) -> float:
    """Log predictive score of ``x_valid`` after a power-``t`` update on ``x_update``.

    Computed as the sum of one-point predictive log densities under the
    fixed tempered posterior (no sequential re-conditioning on the
    validation points).
    """
    if len(x_update) == 0 or len(x_valid) == 0:
        raise ValueError("both data partitions must be non-empty")
    post = temper_update(model, SufficientStats.from_dataset(x_update), t)
    return float(predictive_logpdf(post, x_valid).sum())
