"""Tests for the data-generating process, replicate runner and metric aggregation.

Checks marked ``slow`` run hundreds of replicates and are deselected unless ``-m slow`` is given.
"""

import math

import numpy as np
import pytest
from scipy.special import expit

from propp.borrowing.conjugate import fit_ignore
from propp.errors import InputError
from propp.simulation.methods import METHODS, ReplicateContext, WangMethod, get_method
from propp.simulation.runner import (
    ReplicateResult,
    replicate_seed,
    run_grid,
    run_replicate,
    summarize_replicates,
)
from propp.simulation.scenarios import (
    DEFAULT_GRID,
    DEFAULT_METHODS,
    Scenario,
    ScenarioConfig,
    Setting,
    generate_dataset,
    superfluous_beta,
    true_trial_rate,
)


def _rows_by(rows):
    return {(r.method, r.grid_value): r for r in rows}


class TestScenarioConfig:
    @pytest.mark.parametrize("setting,sizes", [
        ("equal", (400, 400, 5)),
        ("large-external", (400, 2000, 5)),
        ("large-trial", (400, 200, 5)),
        ("many-covariates", (400, 400, 10)),
    ])
    def test_setting_sizes(self, setting, sizes):
        cfg = ScenarioConfig.build("mixture", setting)
        assert (cfg.n_trial, cfg.n_external, cfg.k) == sizes
        assert len(cfg.beta) == cfg.k

    def test_scenario_defaults(self):
        drift = ScenarioConfig.build("drift")
        assert drift.beta == (0.0,) * 5 and drift.psi == 1.0
        assert drift.grid_variable == "eta"
        mixture = ScenarioConfig.build(Scenario.MIXTURE, Setting.EQUAL)
        assert mixture.beta == (0.1,) * 5 and mixture.psi == 0.5
        assert mixture.grid_variable == "mu_e"
        assert ScenarioConfig.build("nomixture").psi == 0.0

    def test_sizes_fixed_by_setting(self):
        with pytest.raises(InputError):
            ScenarioConfig.build("drift", "equal", n_external=1000)

    def test_unknown_names(self):
        with pytest.raises(InputError):
            ScenarioConfig.build("shift")

    def test_superfluous_keeps_sum(self):
        cfg = ScenarioConfig.build("superfluous", n_superfluous=3)
        assert cfg.beta[:3] == (0.0, 0.0, 0.0)
        assert cfg.beta[3:] == pytest.approx((0.25, 0.25))
        assert sum(cfg.beta) == pytest.approx(0.5)
        assert ScenarioConfig.build("superfluous").n_superfluous == 1

    def test_superfluous_many_covariates(self):
        beta = superfluous_beta((0.1,) * 10, 4)
        assert sum(beta) == pytest.approx(1.0)
        assert beta[4:] == pytest.approx((1.0 / 6,) * 6)

    def test_hashable_and_at(self):
        cfg = ScenarioConfig.build("drift")
        assert hash(cfg) == hash(ScenarioConfig.build("drift"))
        assert cfg.at(0.25).eta == 0.25
        assert ScenarioConfig.build("mixture").at(-0.5).mu_e == -0.5

    def test_default_grid(self):
        assert len(DEFAULT_GRID) == 9
        assert DEFAULT_GRID[0] == -0.5 and DEFAULT_GRID[-1] == 0.5
        assert DEFAULT_GRID[1] == pytest.approx(-0.375)


class TestGenerateDataset:
    def test_layout(self):
        cfg = ScenarioConfig.build("mixture", "large-trial")
        data = generate_dataset(cfg, 0.0, np.random.default_rng(0))
        assert (data.n_trial, data.n_external, data.k) == (400, 200, 5)
        assert np.all(data.source[:400] == 1) and np.all(data.source[400:] == 0)

    def test_null_rates(self):
        cfg = ScenarioConfig.build("drift")
        data = generate_dataset(cfg, 0.0, np.random.default_rng(1))
        se = math.sqrt(0.25 / 400)
        assert abs(data.outcome[data.is_trial].mean() - 0.5) < 3 * se
        assert abs(data.outcome[~data.is_trial].mean() - 0.5) < 3 * se

    def test_drift_shifts_trial_only(self):
        cfg = ScenarioConfig.build("drift")
        data = generate_dataset(cfg, 0.5, np.random.default_rng(2))
        se = math.sqrt(0.25 / 400)
        assert abs(data.outcome[data.is_trial].mean() - expit(0.5)) < 3 * se
        assert abs(data.outcome[~data.is_trial].mean() - 0.5) < 3 * se

    def test_mixture_covariate_mean(self):
        cfg = ScenarioConfig.build("mixture", "large-external")
        data = generate_dataset(cfg, -0.5, np.random.default_rng(3))
        ext_means = data.covariates[~data.is_trial].mean(axis=0)
        np.testing.assert_allclose(ext_means, -0.25, atol=0.08)

    def test_reproducible(self):
        cfg = ScenarioConfig.build("nomixture")
        a = generate_dataset(cfg, 0.25, np.random.default_rng(9))
        b = generate_dataset(cfg, 0.25, np.random.default_rng(9))
        assert a.same_content(b)


class TestTrueTrialRate:
    def test_null(self):
        assert true_trial_rate(ScenarioConfig.build("drift"), 0.0) == 0.5

    def test_drift(self):
        assert true_trial_rate(ScenarioConfig.build("drift"), 0.5) == pytest.approx(0.62246, abs=1e-5)

    def test_symmetric_predictor(self):
        cfg = ScenarioConfig.build("mixture")
        assert true_trial_rate(cfg, 0.3) == pytest.approx(0.5, abs=1e-12)

    def test_shifted_mean(self):
        # βᵀX ~ Normal(0.5, 0.05): close to expit(0.5) with a small curvature correction
        cfg = ScenarioConfig.build("mixture", mu0=1.0)
        rate = true_trial_rate(cfg, 0.0)
        assert rate == pytest.approx(expit(0.5), abs=0.01)


class TestMethods:
    def test_registry(self):
        assert tuple(METHODS) == DEFAULT_METHODS
        assert WangMethod(0.2).name == "wang20"
        with pytest.raises(InputError):
            get_method("bayes")

    def test_seed_per_method(self):
        cfg = ScenarioConfig.build("drift")
        ctx = ReplicateContext(generate_dataset(cfg, 0.0, np.random.default_rng(0)), seed=4)
        assert ctx.seed_for("mpp") != ctx.seed_for("propp")
        assert ctx.seed_for("mpp") == ctx.seed_for("mpp")


class TestRunReplicate:
    def test_ignore_is_conjugate_mean(self):
        cfg = ScenarioConfig.build("drift", methods=("ignore",), seed=5)
        (result,) = run_replicate(cfg, 0.125, 3)
        data_seed, _ = replicate_seed(cfg, 0.125, 3).generate_state(2)
        data = generate_dataset(cfg, 0.125, np.random.default_rng(data_seed))
        assert result.estimate == fit_ignore(data).mean
        assert not result.failed

    def test_deterministic(self):
        cfg = ScenarioConfig.build("mixture", methods=("pool", "mpp", "wang10"), n_samples=500, seed=8)
        assert run_replicate(cfg, 0.25, 0) == run_replicate(cfg, 0.25, 0)

    def test_propp_close_to_mpp_on_drift(self):
        cfg = ScenarioConfig.build("drift", methods=("mpp", "propp"), seed=13)
        for index in range(5):
            mpp, propp = run_replicate(cfg, 0.0, index)
            sd = (mpp.q975 - mpp.q025) / (2 * 1.96)
            assert abs(propp.estimate - mpp.estimate) < 0.5 * sd

    def test_failures_are_recorded(self):
        # Externals far from the trial leave strata without external patients
        cfg = ScenarioConfig.build("nomixture", "large-trial", methods=("ignore", "wang10"), seed=2)
        results = run_replicate(cfg, 3.0, 0)
        assert not results[0].failed
        assert results[1].failed and results[1].estimate is None


class TestSummarize:
    def test_exact_estimator(self):
        results = [ReplicateResult("stub", 0.0, i, 0.5, 0.45, 0.55) for i in range(10)]
        row = summarize_replicates("stub", 0.0, 0.5, results)
        assert row.rmse == 0.0 and row.type1 == 0.0 and row.failures == 0

    def test_rmse_arithmetic(self):
        results = [
            ReplicateResult("m", 0.0, 0, 0.4, 0.3, 0.45),
            ReplicateResult("m", 0.0, 1, 0.6, 0.52, 0.7),
        ]
        row = summarize_replicates("m", 0.0, 0.5, results)
        assert row.rmse == pytest.approx(0.1)
        assert row.type1 == 1.0

    def test_failures_excluded_but_counted(self):
        results = [
            ReplicateResult("m", 0.0, 0, 0.5, 0.4, 0.6),
            ReplicateResult("m", 0.0, 1, error="strata empty"),
        ]
        row = summarize_replicates("m", 0.0, 0.5, results)
        assert row.failures == 1 and row.replicates == 1
        assert row.rmse == 0.0

    def test_all_failed(self):
        row = summarize_replicates("m", 0.0, 0.5, [ReplicateResult("m", 0.0, 0, error="x")])
        assert math.isnan(row.rmse) and row.failures == 1

    def test_order_independent(self):
        rng = np.random.default_rng(0)
        results = [
            ReplicateResult("m", 0.0, i, e, e - 0.05, e + 0.05)
            for i, e in enumerate(rng.uniform(0.4, 0.6, 200))
        ]
        forward = summarize_replicates("m", 0.0, 0.5, results)
        backward = summarize_replicates("m", 0.0, 0.5, results[::-1])
        assert forward == backward


class TestRunGrid:
    def test_row_order(self):
        cfg = ScenarioConfig.build("drift", methods=("ignore", "pool"), replicates=3, seed=1)
        rows = run_grid(cfg, [0.25, -0.25])
        assert [(r.grid_value, r.method) for r in rows] == [
            (0.25, "ignore"), (0.25, "pool"), (-0.25, "ignore"), (-0.25, "pool"),
        ]

    def test_grid_point_independence(self):
        cfg = ScenarioConfig.build("drift", methods=("ignore", "pool"), replicates=20, seed=4)
        both = _rows_by(run_grid(cfg, [0.0, 0.25]))
        single = _rows_by(run_grid(cfg, [0.25]))
        assert both[("pool", 0.25)] == single[("pool", 0.25)]
        assert both[("ignore", 0.25)] == single[("ignore", 0.25)]

    def test_workers_do_not_change_results(self):
        cfg = ScenarioConfig.build("mixture", methods=("ignore", "pool"), replicates=6, seed=6)
        assert run_grid(cfg, [0.0, 0.5], workers=2) == run_grid(cfg, [0.0, 0.5], workers=1)

    def test_ignore_rmse_flat_across_grid(self):
        # The external covariate mean never touches the trial-only estimate
        cfg = ScenarioConfig.build("mixture", methods=("ignore",), replicates=200, seed=12)
        rmse = np.array([r.rmse for r in run_grid(cfg, [-0.5, 0.0, 0.5])])
        assert np.all(np.abs(rmse - rmse.mean()) <= 0.15 * rmse.mean())

    def test_smoke_all_methods(self):
        cfg = ScenarioConfig.build("drift", replicates=2, n_samples=1000, seed=3)
        rows = run_grid(cfg, [0.0])
        assert len(rows) == len(DEFAULT_METHODS)
        assert all(math.isfinite(r.rmse) and 0.0 <= r.type1 <= 1.0 for r in rows)

    def test_empty_grid(self):
        with pytest.raises(InputError):
            run_grid(ScenarioConfig.build("drift"), [])


@pytest.mark.slow
class TestOperatingCharacteristics:
    def test_drift_equal(self):
        cfg = ScenarioConfig.build(
            "drift", "equal", methods=("ignore", "pool", "mpp", "propp"),
            replicates=500, n_samples=4000, seed=2024,
        )
        rows = _rows_by(run_grid(cfg, [0.0, 0.375]))

        assert rows[("pool", 0.0)].rmse <= 0.75 * rows[("ignore", 0.0)].rmse
        assert rows[("pool", 0.375)].rmse > rows[("ignore", 0.375)].rmse
        assert rows[("pool", 0.375)].type1 > 0.10
        assert 0.02 <= rows[("ignore", 0.375)].type1 <= 0.08
        for g in (0.0, 0.375):
            # 99% binomial band around the nominal 5% at 500 replicates
            assert 0.025 <= rows[("ignore", g)].type1 <= 0.075
            mpp, propp = rows[("mpp", g)].rmse, rows[("propp", g)].rmse
            assert abs(propp - mpp) / mpp < 0.10

    def test_large_external_protection(self):
        cfg = ScenarioConfig.build(
            "drift", "large-external", methods=("mpp", "propp"),
            replicates=500, n_samples=4000, seed=2025,
        )
        rows = _rows_by(run_grid(cfg, [0.25]))
        assert rows[("propp", 0.25)].type1 < rows[("mpp", 0.25)].type1

    def test_mixture_ordering(self):
        cfg = ScenarioConfig.build(
            "mixture", "equal", methods=("ignore", "mpp", "propp"),
            replicates=500, n_samples=4000, seed=2026,
        )
        rows = _rows_by(run_grid(cfg, [0.0]))
        propp = rows[("propp", 0.0)].rmse
        assert propp < rows[("ignore", 0.0)].rmse
        assert abs(propp - rows[("mpp", 0.0)].rmse) / rows[("mpp", 0.0)].rmse < 0.15
