"""Benchmark data-generating processes with exact log densities.

Every truth pairs a sampler with its closed-form log density so the
analytical log ratio against a model predictive can be computed as an
oracle alongside the classifier-based estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conjugate import TemperedPosterior, predictive_logpdf
from .data import Dataset
from .numerics import RngStream, log_beta, log_gamma, normal_cdf
from .ratio import LogRatioEstimate


@dataclass(frozen=True)
class GaussianTruth:
    mean: float
    sd: float

    def __post_init__(self) -> None:
        if self.sd <= 0.0:
            raise ValueError("sd must be positive")

    def sample(self, rng: RngStream, n: int) -> Dataset:
        return Dataset(rng.generator().normal(self.mean, self.sd, size=n))

    def logpdf(self, data: Dataset) -> np.ndarray:
        x = data.values
        return -0.5 * (np.log(2.0 * np.pi * self.sd**2) + ((x - self.mean) / self.sd) ** 2)


@dataclass(frozen=True)
class LaplaceTruth:
    loc: float
    scale: float

    def __post_init__(self) -> None:
        if self.scale <= 0.0:
            raise ValueError("scale must be positive")

    def sample(self, rng: RngStream, n: int) -> Dataset:
        return Dataset(rng.generator().laplace(self.loc, self.scale, size=n))

    def logpdf(self, data: Dataset) -> np.ndarray:
        x = data.values
        return -math.log(2.0 * self.scale) - np.abs(x - self.loc) / self.scale


@dataclass(frozen=True)
class NegBinomialTruth:
    """Counts with pmf proportional to (1-p)^r p^x, so the mean is r p/(1-p)."""

    r: float
    p: float

    def __post_init__(self) -> None:
        if self.r <= 0.0 or not 0.0 < self.p < 1.0:
            raise ValueError("need r > 0 and p in (0, 1)")

    def sample(self, rng: RngStream, n: int) -> Dataset:
        draws = rng.generator().negative_binomial(self.r, 1.0 - self.p, size=n)
        return Dataset(draws.astype(float))

    def logpdf(self, data: Dataset) -> np.ndarray:
        x = data.values
        out = np.full(x.shape, -np.inf)
        ok = x >= 0
        xs = x[ok]
        out[ok] = (
            log_gamma(xs + self.r) - log_gamma(self.r) - log_gamma(xs + 1.0)
            + self.r * math.log1p(-self.p) + xs * math.log(self.p)
        )
        return out


@dataclass(frozen=True)
class BetaBinomialTruth:
    a: float
    b: float
    trials: int

    def __post_init__(self) -> None:
        if self.a <= 0.0 or self.b <= 0.0 or self.trials < 1:
            raise ValueError("need a, b > 0 and trials >= 1")

    def sample(self, rng: RngStream, n: int) -> Dataset:
        g = rng.generator()
        probs = g.beta(self.a, self.b, size=n)
        return Dataset(g.binomial(self.trials, probs).astype(float))

    def logpdf(self, data: Dataset) -> np.ndarray:
        x = data.values
        out = np.full(x.shape, -np.inf)
        ok = (x >= 0) & (x <= self.trials)
        xs = x[ok]
        m = float(self.trials)
        out[ok] = (
            log_gamma(m + 1.0) - log_gamma(xs + 1.0) - log_gamma(m - xs + 1.0)
            + log_beta(xs + self.a, m - xs + self.b) - log_beta(self.a, self.b)
        )
        return out


def _uniform_covariates(g: np.random.Generator, n: int) -> np.ndarray:
    # covariates are drawn U(-1, 1) so the sigmoid mean traverses its
    # full dynamic range
    return g.uniform(-1.0, 1.0, size=n)


@dataclass(frozen=True)
class TNoiseRegressionTruth:
    """y = x + Student-t noise; density is conditional on the covariate."""

    df: float = 3.0
    scale: float = 1.22

    def __post_init__(self) -> None:
        if self.df <= 0.0 or self.scale <= 0.0:
            raise ValueError("df and scale must be positive")

    def sample(self, rng: RngStream, n: int) -> Dataset:
        g = rng.generator()
        x = _uniform_covariates(g, n)
        y = x + self.scale * g.standard_t(self.df, size=n)
        return Dataset(y, covariates=x)

    def logpdf(self, data: Dataset) -> np.ndarray:
        z = (data.values - data.covariates) / self.scale
        df = self.df
        return (
            log_gamma(0.5 * (df + 1.0)) - log_gamma(0.5 * df)
            - 0.5 * math.log(df * math.pi) - math.log(self.scale)
            - 0.5 * (df + 1.0) * np.log1p(z * z / df)
        )


@dataclass(frozen=True)
class SigmoidRegressionTruth:
    """y = amplitude*(Phi(steepness*x) - 1/2) + Gaussian noise."""

    amplitude: float = 5.0
    steepness: float = 10.0
    noise_sd: float = 0.1

    def __post_init__(self) -> None:
        if self.noise_sd <= 0.0:
            raise ValueError("noise_sd must be positive")

    def mean_fn(self, x) -> np.ndarray:
        return self.amplitude * (normal_cdf(self.steepness * np.asarray(x, float)) - 0.5)

    def sample(self, rng: RngStream, n: int) -> Dataset:
        g = rng.generator()
        x = _uniform_covariates(g, n)
        y = self.mean_fn(x) + g.normal(0.0, self.noise_sd, size=n)
        return Dataset(y, covariates=x)

    def logpdf(self, data: Dataset) -> np.ndarray:
        resid = data.values - self.mean_fn(data.covariates)
        return -0.5 * (np.log(2.0 * np.pi * self.noise_sd**2) + (resid / self.noise_sd) ** 2)


TruthSpec = (
    GaussianTruth
    | LaplaceTruth
    | NegBinomialTruth
    | BetaBinomialTruth
    | TNoiseRegressionTruth
    | SigmoidRegressionTruth
)

_REGRESSION_TRUTHS = (TNoiseRegressionTruth, SigmoidRegressionTruth)


def truth_sample(spec: TruthSpec, rng: RngStream, n: int) -> Dataset:
    """n i.i.d. draws from the named truth (covariates first for regression)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return spec.sample(rng, n)


def truth_logpdf(spec: TruthSpec, data: Dataset) -> np.ndarray:
    """Exact per-point log density/mass; -inf outside the support."""
    if isinstance(spec, _REGRESSION_TRUTHS) and not data.is_regression:
        raise ValueError("regression truths need covariates")
    return np.asarray(spec.logpdf(data))


def true_log_ratio(post: TemperedPosterior, spec: TruthSpec, x_valid: Dataset) -> LogRatioEstimate:
    """Exact per-point log p_model(x) - log p_truth(x) over the validation set."""
    per_point = predictive_logpdf(post, x_valid) - truth_logpdf(spec, x_valid)
    return LogRatioEstimate.from_per_point(per_point)
