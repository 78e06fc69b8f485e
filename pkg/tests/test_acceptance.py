"""End-to-end verification suite: ten checks, one verdict line each.

Each test exercises a contract of the package through public entry points
only and reports PASS or FAIL with the measured numbers via the
criterion_verdict fixture, so the final pytest output carries one line per
criterion.
"""

import pathlib
import time

import numpy as np
from scipy.stats import multivariate_normal

from conftest import fd_grad, rel_err
from fsvi import (
    ExperimentConfig,
    SampleSet,
    VariationalPosterior,
    dbound_dalpha,
    dbound_dbeta,
    grad_L,
    grad_mu,
    kl_gaussian_prior,
    lower_bound_fs,
    run_experiment,
    scg_maximise,
    spectrum_mse_benchmark,
    update_alpha,
    update_beta,
)
from fsvi.models import RbfDesign, RbfRegressionModel, synth_regression_data

# Optional local copy of the banana benchmark splits (train*.csv/test*.csv,
# binary labels in the last column). The published table values depend on
# this external data and are checked only when it is present.
_BANANA_DIR = pathlib.Path(__file__).parent / "data" / "banana"


def test_criterion_01_gradient_fidelity(model_zoo, criterion_verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    worst = 0.0
    worst_case = ""
    for name, model, hyper in model_zoo:
        m = model.dim
        for k in range(20):
            mu = rng.standard_normal(m)
            factor = np.diag(rng.uniform(0.2, 0.6, m)) + 0.05 * rng.standard_normal(
                (m, m)
            )
            post = VariationalPosterior(mu, factor)
            samples = SampleSet.generate(4, m, seed=1000 + k)

            g_mu = grad_mu(model, post, hyper, samples)
            fd_mu = fd_grad(
                lambda v: lower_bound_fs(
                    model, VariationalPosterior(v, factor), hyper, samples
                ),
                mu,
            )
            err = rel_err(g_mu, fd_mu)
            if err > worst:
                worst, worst_case = err, f"{name} mu config {k}"

            g_l = grad_L(model, post, hyper, samples)
            fd_l = fd_grad(
                lambda v: lower_bound_fs(
                    model,
                    VariationalPosterior(mu, v.reshape(m, m)),
                    hyper,
                    samples,
                ),
                factor.ravel(),
            ).reshape(m, m)
            err = rel_err(g_l, fd_l)
            if err > worst:
                worst, worst_case = err, f"{name} L config {k}"
    elapsed = time.perf_counter() - start
    passed = worst < 1e-5 and elapsed < 30.0
    criterion_verdict(
        1,
        passed,
        f"worst gradient relative error {worst:.2e} ({worst_case}) over "
        f"7 models x 20 configs in {elapsed:.1f}s",
    )


def test_criterion_02_kl_closed_form(criterion_verdict):
    rng = np.random.default_rng(1)
    worst = 0.0
    for k in range(10):
        m = int(rng.integers(1, 6))
        mu = rng.standard_normal(m)
        factor = np.eye(m) + 0.3 * rng.standard_normal((m, m))
        post = VariationalPosterior(mu, factor)
        alpha = float(np.exp(rng.uniform(np.log(0.2), np.log(5.0))))

        exact = kl_gaussian_prior(post, alpha)
        draws = post.sample(1_000_000, np.random.default_rng(2000 + k))
        log_q = multivariate_normal(mu, post.covariance()).logpdf(draws)
        log_p = multivariate_normal(np.zeros(m), np.eye(m) / alpha).logpdf(draws)
        estimate = float(np.mean(log_q - log_p))
        worst = max(worst, abs(estimate - exact) / abs(exact))
    passed = worst < 0.01
    criterion_verdict(
        2,
        passed,
        f"closed-form KL vs 1e6-draw Monte-Carlo: worst relative gap "
        f"{worst:.4f} over 10 random states (M <= 5)",
    )


def test_criterion_03_exact_inference_agreement(tmp_path, criterion_verdict):
    start = time.perf_counter()
    artifacts = run_experiment(
        ExperimentConfig(kind="blr", seed=0, out_dir=str(tmp_path))
    )
    elapsed = time.perf_counter() - start
    rmse = artifacts.metrics["mean_rmse"]
    gap = artifacts.metrics["cov_frobenius_gap"]
    passed = rmse < 0.05 and gap < 0.25 and elapsed < 120.0
    criterion_verdict(
        3,
        passed,
        f"mean-prediction RMSE {rmse:.4f} (< 0.05), covariance gap "
        f"{gap:.4f} (< 0.25) in {elapsed:.1f}s",
    )


def test_criterion_04_overfitting_detection(tmp_path, criterion_verdict):
    start = time.perf_counter()
    hits = 0
    for seed in range(10):
        artifacts = run_experiment(
            ExperimentConfig(
                kind="blr-overfit", seed=seed, out_dir=str(tmp_path / str(seed))
            )
        )
        if (
            artifacts.metrics["verdict_s10"] == "overfitting"
            and artifacts.metrics["verdict_s100"] == "ok"
        ):
            hits += 1
    elapsed = time.perf_counter() - start
    passed = hits >= 9 and elapsed < 300.0
    criterion_verdict(
        4,
        passed,
        f"{hits}/10 seeds flagged S=10 as overfitting and S=100 as ok "
        f"in {elapsed:.1f}s",
    )


def test_criterion_05_bivariate_divergence_ordering(tmp_path, criterion_verdict):
    # Factor-of-two windows around the reference divergences for the three
    # coefficient vectors; the direction that reproduces those magnitudes
    # measures the fitted density against the target (q-to-p).
    windows = {0: (0.1755, 0.702), 1: (0.2925, 1.17), 2: (0.5515, 2.206)}
    start = time.perf_counter()
    artifacts = run_experiment(
        ExperimentConfig(kind="bivariate", seed=1, out_dir=str(tmp_path))
    )
    elapsed = time.perf_counter() - start

    ok = True
    parts = []
    for i, (lo, hi) in windows.items():
        prop = artifacts.metrics[f"kld_proposed_q-to-p_target{i}"]
        lap = artifacts.metrics[f"kld_laplace_q-to-p_target{i}"]
        ok = ok and lo <= prop <= hi and prop < lap
        parts.append(f"target {i}: {prop:.3f} vs laplace {lap:.3f}")
    passed = ok and elapsed < 180.0
    criterion_verdict(
        5,
        passed,
        "; ".join(parts) + f"; windows {list(windows.values())} in {elapsed:.1f}s",
    )


def test_criterion_06_classification_parity(tmp_path, criterion_verdict):
    logistic = run_experiment(
        ExperimentConfig(kind="logistic", seed=0, out_dir=str(tmp_path / "two"))
    )
    multiclass = run_experiment(
        ExperimentConfig(kind="multiclass", seed=0, out_dir=str(tmp_path / "three"))
    )
    acc2 = logistic.metrics["mean_accuracy"]
    acc3 = multiclass.metrics["mean_accuracy"]
    passed = acc2 >= 0.90 and acc3 >= 0.90
    parts = [f"two-class accuracy {acc2:.4f}", f"three-class accuracy {acc3:.4f}"]

    if _BANANA_DIR.is_dir():
        banana = run_experiment(
            ExperimentConfig(
                kind="logistic",
                seed=0,
                out_dir=str(tmp_path / "banana"),
                data=str(_BANANA_DIR),
            )
        )
        bacc = banana.metrics["mean_accuracy"]
        passed = passed and abs(bacc - 0.889) <= 0.02
        parts.append(f"banana splits {bacc:.4f} (target 0.889 +- 0.02)")
    else:
        parts.append(
            "published benchmark-table accuracies not reproducible without "
            "local banana splits (tests/data/banana absent)"
        )
    criterion_verdict(6, passed, "; ".join(parts))


def test_criterion_07_robust_denoising(tmp_path, criterion_verdict):
    start = time.perf_counter()
    wins = 0
    pairs = []
    for seed in range(10):
        artifacts = run_experiment(
            ExperimentConfig(
                kind="cauchy-ppca", seed=seed, out_dir=str(tmp_path / str(seed))
            )
        )
        cauchy = artifacts.metrics["mean_error_cauchy"]
        gauss = artifacts.metrics["mean_error_gaussian"]
        pairs.append((cauchy, gauss))
        if cauchy < gauss:
            wins += 1
    elapsed = time.perf_counter() - start
    passed = wins >= 9 and elapsed < 600.0
    mean_c = np.mean([p[0] for p in pairs])
    mean_g = np.mean([p[1] for p in pairs])
    criterion_verdict(
        7,
        passed,
        f"heavy-tailed fit beat the Gaussian baseline on {wins}/10 seeds "
        f"(mean errors {mean_c:.5f} vs {mean_g:.5f}) in {elapsed:.1f}s",
    )


def test_criterion_08_hyperparameter_stationarity(criterion_verdict):
    rng = np.random.default_rng(8)
    worst_alpha = 0.0
    for _ in range(50):
        m = int(rng.integers(2, 7))
        post = VariationalPosterior(
            rng.standard_normal(m), np.eye(m) + 0.3 * rng.standard_normal((m, m))
        )
        alpha = update_alpha(post)
        worst_alpha = max(worst_alpha, abs(dbound_dalpha(post, alpha)))

    x, y = synth_regression_data(10, seed=0)
    design = RbfDesign.from_inputs(x, 1.0, n_centres=3)
    model = RbfRegressionModel(x, y, design)
    worst_beta = 0.0
    for k in range(50):
        post = VariationalPosterior(
            rng.standard_normal(model.dim),
            0.5 * (np.eye(model.dim) + 0.3 * rng.standard_normal((model.dim,) * 2)),
        )
        samples = SampleSet.generate(8, model.dim, seed=3000 + k)
        beta = update_beta(model, post, samples)
        worst_beta = max(worst_beta, abs(dbound_dbeta(model, post, samples, beta)))

    passed = worst_alpha < 1e-8 and worst_beta < 1e-8
    criterion_verdict(
        8,
        passed,
        f"post-update derivatives: |d/dalpha| <= {worst_alpha:.2e}, "
        f"|d/dbeta| <= {worst_beta:.2e} over 50 random states each",
    )


def test_criterion_09_optimiser_contract(criterion_verdict):
    rng = np.random.default_rng(9)
    solved = 0
    worst_norm = 0.0
    for _ in range(100):
        eigs = np.exp(rng.uniform(np.log(0.1), np.log(10.0), 20))
        q, _ = np.linalg.qr(rng.standard_normal((20, 20)))
        a = q @ np.diag(eigs) @ q.T
        target = rng.standard_normal(20)

        def fun(x):
            d = x - target
            return -float(d @ a @ d), -2.0 * (a @ d)

        res = scg_maximise(fun, rng.standard_normal(20), max_iters=200, grad_tol=1e-8)
        grad_norm = float(np.linalg.norm(2.0 * a @ (res.x - target)))
        worst_norm = max(worst_norm, grad_norm)
        if res.iterations <= 200 and grad_norm <= 1e-8:
            solved += 1
    passed = solved == 100
    criterion_verdict(
        9,
        passed,
        f"{solved}/100 random 20-dimensional concave quadratics solved to "
        f"gradient norm 1e-8 within 200 iterations (worst {worst_norm:.2e})",
    )


def test_criterion_10_nonlinear_regression_variance(criterion_verdict):
    start = time.perf_counter()
    result = spectrum_mse_benchmark(n_splits=10, seed=0)
    elapsed = time.perf_counter() - start
    std_fit = result["std_fit"]
    std_lap = result["std_laplace"]
    passed = std_fit <= std_lap
    criterion_verdict(
        10,
        passed,
        f"test-MSE standard deviation across 10 splits: {std_fit:.6f} "
        f"(proposed) <= {std_lap:.6f} (laplace) in {elapsed:.1f}s",
    )
