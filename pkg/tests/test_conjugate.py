"""Tempered conjugate updates against closed forms and quadrature oracles."""

import math

import numpy as np
import pytest
from scipy import integrate

from carmen.conjugate import (
    GaussianKnownVarModel,
    NIGRegressionModel,
    PoissonGammaModel,
    SufficientStats,
    log_tempered_predictive,
    predictive_logpdf,
    predictive_sample,
    temper_update,
)
from carmen.data import Dataset
from carmen.numerics import RngStream
from carmen.truths import GaussianTruth, NegBinomialTruth, TNoiseRegressionTruth

GAUSS = GaussianKnownVarModel(noise_sd=0.1, prior_mean=0.0, prior_sd=9.9)
POIS = PoissonGammaModel(shape=3.0, rate=0.05)
NIG = NIGRegressionModel(coef_mean=0.0, precision_scale=1.0, shape=2.0, scale=2.0)


class TestTemperUpdate:
    def test_t_zero_returns_prior(self):
        stats = SufficientStats(n=1000, sum_x=2345.0, sum_xx=3e4)
        post = temper_update(GAUSS, stats, 0.0)
        assert post.mean == 0.0
        assert post.precision == pytest.approx(1.0 / 9.9**2, rel=1e-15)

        ppost = temper_update(POIS, stats, 0.0)
        assert (ppost.shape, ppost.rate) == (3.0, 0.05)

        rstats = SufficientStats(n=10, sum_x=1.0, sum_xx=3.0, sum_xy=2.0, sum_y=4.0, sum_yy=9.0)
        rpost = temper_update(NIG, rstats, 0.0)
        assert (rpost.coef, rpost.coef_precision, rpost.shape, rpost.scale) == (0.0, 1.0, 2.0, 2.0)

    def test_poisson_closed_form(self):
        stats = SufficientStats(n=1000, sum_x=60000.0, sum_xx=60000.0**2 / 1000 + 1)
        post = temper_update(POIS, stats, 1e-3)
        assert post.shape == pytest.approx(63.0, rel=1e-12)
        assert post.rate == pytest.approx(1.05, rel=1e-12)

    def test_gaussian_full_update_sd(self):
        stats = SufficientStats(n=1000, sum_x=0.0, sum_xx=9000.0)
        post = temper_update(GAUSS, stats, 1.0)
        assert post.sd == pytest.approx((1.0 / 98.01 + 1e5) ** -0.5, rel=1e-10)

    def test_t_one_is_standard_conjugate(self):
        # textbook untempered updates, written out independently
        data = GaussianTruth(0.0, 3.01).sample(RngStream(0), 50)
        stats = SufficientStats.from_dataset(data)
        post = temper_update(GAUSS, stats, 1.0)
        n, xbar = 50, data.values.mean()
        prec = 1.0 / 9.9**2 + n / 0.01
        assert post.precision == pytest.approx(prec, rel=1e-14)
        assert post.mean == pytest.approx((n * xbar / 0.01) / prec, rel=1e-12)

        counts = NegBinomialTruth(63.0, 0.488).sample(RngStream(1), 50)
        cstats = SufficientStats.from_dataset(counts)
        cpost = temper_update(POIS, cstats, 1.0)
        assert cpost.shape == pytest.approx(3.0 + counts.values.sum(), rel=1e-14)
        assert cpost.rate == pytest.approx(0.05 + 50.0, rel=1e-14)

    def test_gaussian_precision_monotone_in_t(self):
        stats = SufficientStats(n=100, sum_x=30.0, sum_xx=400.0)
        ts = np.linspace(0.0, 1.0, 25)
        precs = [temper_update(GAUSS, stats, float(t)).precision for t in ts]
        assert np.all(np.diff(precs) > 0)

    def test_t_out_of_range(self):
        stats = SufficientStats(n=10, sum_x=1.0, sum_xx=1.0)
        with pytest.raises(ValueError):
            temper_update(GAUSS, stats, -0.1)
        with pytest.raises(ValueError):
            temper_update(GAUSS, stats, 1.1)

    def test_inconsistent_stats_rejected(self):
        with pytest.raises(ValueError):
            SufficientStats(n=10, sum_x=100.0, sum_xx=1.0)


class TestPredictive:
    def test_negative_binomial_mass_sums_to_one(self):
        post = temper_update(POIS, SufficientStats(n=1000, sum_x=60000.0, sum_xx=3.7e6), 1e-3)
        xs = np.arange(0, 10001, dtype=float)
        total = np.exp(post.predictive_logpdf(xs)).sum()
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_gaussian_prior_predictive_density(self):
        post = temper_update(GAUSS, SufficientStats(n=0), 0.0)
        expected = -0.5 * math.log(2 * math.pi * (0.1**2 + 9.9**2))
        assert post.predictive_logpdf(0.0) == pytest.approx(expected, rel=1e-12)

    def test_gaussian_predictive_integrates_to_one(self):
        post = temper_update(GAUSS, SufficientStats(n=30, sum_x=20.0, sum_xx=100.0), 0.5)
        total, _ = integrate.quad(lambda x: math.exp(post.predictive_logpdf(x)), -60, 60, limit=300)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_regression_predictive_integrates_to_one(self):
        post = temper_update(NIG, SufficientStats(n=0), 0.0)
        total, _ = integrate.quad(
            lambda y: math.exp(post.predictive_logpdf(0.5, y)), -300, 300, limit=500
        )
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_gaussian_predictive_variance_decreasing_in_t(self):
        stats = SufficientStats(n=1000, sum_x=100.0, sum_xx=9200.0)
        ts = np.logspace(-8, 0, 30)
        variances = [temper_update(GAUSS, stats, float(t)).predictive_var for t in ts]
        assert np.all(np.diff(variances) < 0)

    def test_negative_count_rejected(self):
        post = temper_update(POIS, SufficientStats(n=0), 0.0)
        with pytest.raises(ValueError):
            post.predictive_logpdf(-1.0)


class TestPredictiveSample:
    def test_gaussian_prior_predictive_variance(self):
        post = temper_update(GAUSS, SufficientStats(n=0), 0.0)
        draws = predictive_sample(post, RngStream(10), 100000)
        assert draws.values.var() == pytest.approx(0.1**2 + 9.9**2, rel=0.05)

    def test_poisson_gamma_predictive_mean(self):
        post = temper_update(POIS, SufficientStats(n=1000, sum_x=60000.0, sum_xx=3.7e6), 1e-3)
        draws = predictive_sample(post, RngStream(11), 100000)
        assert draws.values.mean() == pytest.approx(60.0, rel=0.01)

    def test_regression_zero_covariates_centered(self):
        post = temper_update(NIG, SufficientStats(n=0), 0.0)
        draws = predictive_sample(post, RngStream(12), 50000, covariates=np.zeros(50000))
        se = draws.values.std(ddof=1) / math.sqrt(len(draws))
        assert abs(draws.values.mean()) < 4 * se

    def test_sampler_matches_density(self):
        # empirical CDF of predictive draws against the analytic predictive
        post = temper_update(GAUSS, SufficientStats(n=50, sum_x=30.0, sum_xx=200.0), 1e-4)
        draws = predictive_sample(post, RngStream(13), 40000).values
        grid = np.quantile(draws, [0.1, 0.25, 0.5, 0.75, 0.9])
        sd = math.sqrt(post.predictive_var)
        for q, g in zip([0.1, 0.25, 0.5, 0.75, 0.9], grid):
            from carmen.numerics import normal_cdf

            model_q = normal_cdf((g - post.mean) / sd)
            assert model_q == pytest.approx(q, abs=0.01)

    def test_regression_requires_covariates(self):
        post = temper_update(NIG, SufficientStats(n=0), 0.0)
        with pytest.raises(ValueError):
            predictive_sample(post, RngStream(0), 10)


class TestLogTemperedPredictive:
    def test_t_zero_equals_prior_score(self):
        xu = GaussianTruth(0.0, 3.01).sample(RngStream(20), 100)
        xv = GaussianTruth(0.0, 3.01).sample(RngStream(21), 100)
        prior_post = temper_update(GAUSS, SufficientStats(n=0), 0.0)
        expected = float(predictive_logpdf(prior_post, xv).sum())
        assert log_tempered_predictive(GAUSS, xu, xv, 0.0) == pytest.approx(expected, rel=1e-14)

    def test_gaussian_setup_maximized_near_1e6(self):
        truth = GaussianTruth(0.0, 3.01)
        xu = truth.sample(RngStream(22), 1000)
        xv = truth.sample(RngStream(23), 1000)
        ts = np.logspace(-8, 0, 120)
        scores = [log_tempered_predictive(GAUSS, xu, xv, float(t)) for t in ts]
        t_best = ts[int(np.argmax(scores))]
        assert 9.5e-7 / 3 <= t_best <= 9.5e-7 * 3

    def test_poisson_setup_maximized_near_1e3(self):
        truth = NegBinomialTruth(63.0, 0.488)
        xu = truth.sample(RngStream(24), 1000)
        xv = truth.sample(RngStream(25), 1000)
        ts = np.logspace(-6, 0, 120)
        scores = [log_tempered_predictive(POIS, xu, xv, float(t)) for t in ts]
        t_best = ts[int(np.argmax(scores))]
        assert 1.0e-3 / 3 <= t_best <= 1.0e-3 * 3


class TestQuadratureOracle:
    """Posterior densities must match likelihood^t x prior, normalized numerically."""

    @pytest.mark.parametrize("t", [0.0, 1e-3, 1.0])
    def test_gaussian(self, t):
        from oracles import gaussian_posterior_quadrature_relerr

        assert gaussian_posterior_quadrature_relerr(t) < 1e-6

    @pytest.mark.parametrize("t", [0.0, 1e-3, 1.0])
    def test_poisson_gamma(self, t):
        from oracles import poisson_posterior_quadrature_relerr

        assert poisson_posterior_quadrature_relerr(t) < 1e-6

    @pytest.mark.parametrize("t", [0.0, 1e-3, 1.0])
    def test_nig_regression(self, t):
        from oracles import nig_posterior_quadrature_relerr

        assert nig_posterior_quadrature_relerr(t) < 1e-6
