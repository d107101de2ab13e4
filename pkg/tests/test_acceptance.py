"""Acceptance suite: one test per benchmark criterion.

Every test prints a single `[criterion NN] PASS/FAIL` line with the
measured quantities (run pytest with -s to see the lines for passing
criteria) and then asserts.  Benchmark figures are Monte Carlo outputs,
so point values carry the stated stochastic tolerances; structural and
oracle checks are exact.
"""

import math
import time

import numpy as np

from carmen.cli import ScenarioConfig, emit_outputs, run_scenario
from carmen.conjugate import GaussianKnownVarModel, SufficientStats, temper_update
from carmen.discriminator import FeatureMap, LabeledDesign, fit_logistic
from carmen.numerics import RngStream
from carmen.ratio import LogRatioEstimate, estimate_log_ratio, estimate_reverse_log_ratio
from carmen.testing import t_test_logz
from carmen.truths import GaussianTruth

SEEDS = tuple(range(10))

_batch_cache: dict = {}


def _batch(scenario: str, full_curve: bool = False):
    key = (scenario, full_curve)
    if key not in _batch_cache:
        results = []
        elapsed = []
        for seed in SEEDS:
            start = time.monotonic()
            results.append(
                run_scenario(ScenarioConfig(scenario=scenario, seed=seed, full_curve=full_curve))
            )
            elapsed.append(time.monotonic() - start)
        _batch_cache[key] = (results, elapsed)
    return _batch_cache[key]


def _report(num: int, name: str, ok: bool, detail: str) -> str:
    line = f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'} {name}: {detail}"
    print(line, flush=True)
    return line


def _grid_max(result, column: str) -> float:
    return max(row[column] for row in result.curve_rows if row[column] is not None)


def test_criterion_01_gauss_gauss_t_star_and_p():
    results, elapsed = _batch("gauss-gauss")
    med_t = float(np.median([r.t_star for r in results]))
    med_p = float(np.median([r.p_value for r in results]))
    worst = max(elapsed)
    ok = 3e-7 <= med_t <= 3e-6 and med_p > 0.05 and worst < 120.0
    line = _report(
        1,
        "gauss-gauss",
        ok,
        f"median t*={med_t:.3g} (window [3e-7, 3e-6]), median p={med_p:.3g} (> 0.05), "
        f"max runtime {worst:.2f}s (< 120s)",
    )
    assert ok, line


def test_criterion_02_gauss_laplace_detection_and_bias():
    results, _ = _batch("gauss-laplace", full_curve=True)
    n_small_p = sum(r.p_value < 1e-3 for r in results)
    true_maxima = [_grid_max(r, "logz_true_sum") for r in results]
    apx_maxima = [_grid_max(r, "logz_approx_sum") for r in results]
    med_true = float(np.median(true_maxima))
    med_apx = float(np.median(apx_maxima))
    ok = n_small_p >= 9 and -110.0 <= med_true <= -40.0 and med_apx < 0.0 and med_apx > med_true
    line = _report(
        2,
        "gauss-laplace",
        ok,
        f"p<1e-3 for {n_small_p}/10 seeds (need >=9), median true grid max {med_true:.1f} "
        f"(window [-110, -40]), median approx grid max {med_apx:.1f} (negative, above true)",
    )
    assert ok, line


def test_criterion_03_poisson_nb_well_specified():
    results, _ = _batch("poisson-nb")
    med_t = float(np.median([r.t_star for r in results]))
    med_p = float(np.median([r.p_value for r in results]))
    med_abs_mean = float(np.median([abs(r.logz_mean) for r in results]))
    ok = 3e-4 <= med_t <= 3e-3 and med_p > 0.5 and med_abs_mean <= 0.01
    line = _report(
        3,
        "poisson-nb",
        ok,
        f"median t*={med_t:.3g} (window [3e-4, 3e-3]), median p={med_p:.3g} (> 0.5), "
        f"median |mean logZ|={med_abs_mean:.4f} (<= 0.01/point)",
    )
    assert ok, line


def test_criterion_04_poisson_betabinom_detection():
    # As stated, misspecification must be flagged at t* on every seed and
    # both diagnostic curves must peak below -30.  The tempered predictive
    # can, in fact, come within ~9e-4 nats/point of this generating
    # process (the score-optimal level sits near t~1e-2 where mean and
    # variance both match), so an honest score-maximizing pipeline finds
    # next to nothing to detect; the assertions below record that outcome.
    results, _ = _batch("poisson-betabinom", full_curve=True)
    n_small_p = sum(r.p_value < 1e-6 for r in results)
    med_true = float(np.median([_grid_max(r, "logz_true_sum") for r in results]))
    med_apx = float(np.median([_grid_max(r, "logz_approx_sum") for r in results]))
    ok = n_small_p == 10 and med_apx < -30.0 and med_true < -30.0
    line = _report(
        4,
        "poisson-betabinom",
        ok,
        f"p<1e-6 for {n_small_p}/10 seeds (need 10), median approx grid max {med_apx:.1f} "
        f"and median true grid max {med_true:.1f} (both must be < -30)",
    )
    assert ok, line


def test_criterion_05_reg_tnoise_borderline():
    results, _ = _batch("reg-tnoise")
    med_p = float(np.median([r.p_value for r in results]))
    med_t = float(np.median([r.t_star for r in results]))
    ok = med_p < 0.1 and med_t < 0.1
    line = _report(
        5,
        "reg-tnoise",
        ok,
        f"median p={med_p:.3g} (< 0.1), median t*={med_t:.3g} (< 0.1)",
    )
    assert ok, line


def test_criterion_06_reg_sigmoid_boundary_and_uniform_rejection():
    results, _ = _batch("reg-sigmoid", full_curve=True)
    n_boundary = sum(r.t_star == 1.0 and r.t_star_boundary for r in results)
    worst_p = max(
        row["p_value"]
        for r in results
        for row in r.curve_rows
        if row["p_value"] is not None
    )
    ok = n_boundary >= 8 and worst_p < 1e-6
    line = _report(
        6,
        "reg-sigmoid",
        ok,
        f"t*=1 boundary for {n_boundary}/10 seeds (need >=8), max p over all "
        f"grid points {worst_p:.3g} (< 1e-6)",
    )
    assert ok, line


def test_criterion_07_conjugate_quadrature_oracle():
    from oracles import (
        gaussian_posterior_quadrature_relerr,
        nig_posterior_quadrature_relerr,
        poisson_posterior_quadrature_relerr,
    )

    worst = 0.0
    for t in (0.0, 1e-3, 1.0):
        worst = max(
            worst,
            gaussian_posterior_quadrature_relerr(t),
            poisson_posterior_quadrature_relerr(t),
            nig_posterior_quadrature_relerr(t),
        )
    ok = worst < 1e-6
    line = _report(
        7,
        "conjugate quadrature oracle",
        ok,
        f"max relative error {worst:.3g} over 3 families x t in {{0, 1e-3, 1}} x 5 points (< 1e-6)",
    )
    assert ok, line


def test_criterion_08_gaussian_kl_oracle():
    # closed-form divergences between the N(0,1) model and N(0,2^2) truth:
    # KL(truth||model) = ln(1/2) + 2 - 1/2 = 0.8069
    # KL(model||truth) = ln 2 + 1/8 - 1/2 = 0.3181
    kl_forward = math.log(0.5) + 2.0 - 0.5
    kl_reverse = math.log(2.0) + 0.125 - 0.5
    model = GaussianKnownVarModel(noise_sd=1.0, prior_mean=0.0, prior_sd=1e-8)
    post = temper_update(model, SufficientStats(n=0), 0.0)
    truth = GaussianTruth(0.0, 2.0)
    xv = truth.sample(RngStream(800), 2000)
    fm = FeatureMap(("x", "x2"))
    fwd = -estimate_log_ratio(post, xv, fm, 10, RngStream(801)).mean
    rev = -estimate_reverse_log_ratio(post, xv, fm, 10, RngStream(801)).mean
    ok = abs(fwd - kl_forward) <= 0.3 * kl_forward and abs(rev - kl_reverse) <= 0.3 * kl_reverse
    line = _report(
        8,
        "gaussian KL oracle",
        ok,
        f"forward {fwd:.3f} vs {kl_forward:.3f} (+-30%), reverse {rev:.3f} vs {kl_reverse:.3f} (+-30%) "
        f"at n=2000 per class",
    )
    assert ok, line


def test_criterion_09_statistical_null_calibration():
    g = RngStream(900).generator()
    ps = np.array(
        [
            t_test_logz(LogRatioEstimate.from_per_point(g.normal(size=100))).p_value
            for _ in range(1000)
        ]
    )
    sorted_p = np.sort(ps)
    i = np.arange(1, ps.size + 1)
    ks = max(np.max(i / ps.size - sorted_p), np.max(sorted_p - (i - 1) / ps.size))

    n = 20000
    feats = g.normal(size=(n, 2))
    eta = 1.5 * feats[:, 0] - 0.7 * feats[:, 1]
    labels = (g.uniform(size=n) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
    mu, sd = feats.mean(axis=0), feats.std(axis=0)
    fit = fit_logistic(LabeledDesign((feats - mu) / sd, labels, mu, sd), ridge=1e-6)
    w = fit.weights / sd
    err = max(abs(w[0] - 1.5), abs(w[1] + 0.7))
    ok = ks < 0.05 and err < 0.1
    line = _report(
        9,
        "statistical null calibration",
        ok,
        f"KS distance of null p-values {ks:.3f} over 1000 replicates (< 0.05); "
        f"IRLS weight recovery error {err:.3f} (< 0.1)",
    )
    assert ok, line


def test_criterion_10_determinism(tmp_path):
    small = dict(n_update=140, n_validate=140, folds=5, grid_lo=1e-7, grid_hi=1.0, grid_count=8)
    mismatches = []
    for scenario in (
        "gauss-gauss",
        "gauss-laplace",
        "poisson-nb",
        "poisson-betabinom",
        "reg-tnoise",
        "reg-sigmoid",
    ):
        cfg = ScenarioConfig(scenario=scenario, seed=17, **small)
        j1, c1 = emit_outputs(run_scenario(cfg), tmp_path / scenario / "a")
        j2, c2 = emit_outputs(run_scenario(cfg), tmp_path / scenario / "b")
        if j1.read_bytes() != j2.read_bytes() or c1.read_bytes() != c2.read_bytes():
            mismatches.append(scenario)
    ok = not mismatches
    line = _report(
        10,
        "determinism",
        ok,
        "byte-identical JSON/CSV across reruns for all six scenarios"
        if ok
        else f"mismatched outputs: {mismatches}",
    )
    assert ok, line
