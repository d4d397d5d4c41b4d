import csv
import io

import numpy as np
import pytest
from scipy import stats

from tvstable import analysis, whittle
from tvstable.analysis import (
    McResult,
    aggregate,
    error_metrics,
    fit_errors,
    format_table,
    replication_seeds,
    residual_moments,
    run_mc,
    stabilized_pp,
    variogram,
)
from tvstable.scenarios import ALIASES, PRESETS, Scenario, preset, preset_names
from tvstable.stable import StableParams, sample
from tvstable.tvarma import TvArmaModel, simulate


@pytest.fixture(scope="module")
def tiny():
    return preset("table1", T=200, R=3, S=3)


@pytest.fixture(scope="module")
def tiny_result(tiny):
    return run_mc(tiny, 99)


class TestAggregate:
    def test_moments(self, rng):
        rows = rng.standard_normal((50, 2))
        agg = aggregate(rows)
        assert agg["n"] == 50
        assert np.allclose(agg["mean"], rows.mean(axis=0))
        assert np.allclose(agg["se"], rows.std(axis=0, ddof=1))
        assert np.allclose(agg["kurtosis"], stats.kurtosis(rows, axis=0) + 3)
        assert np.allclose(agg["skewness"], stats.skew(rows, axis=0))

    def test_single_row(self):
        agg = aggregate(np.array([[1.0, 2.0]]))
        assert agg["se"] is None and agg["kurtosis"] is None

    def test_empty(self):
        agg = aggregate(np.empty((0, 3)))
        assert agg["n"] == 0 and np.all(np.isnan(agg["mean"]))


class TestScenarios:
    def test_presets_are_consistent(self):
        for name in preset_names():
            sc = preset(name)
            assert sc.R == 200 and sc.S == 50
            assert sc.template.alpha_free == (sc.methods == ("indirect",))
        assert preset("table2").id == "table1"
        assert set(ALIASES.values()) <= set(PRESETS)

    def test_full_scale(self):
        sc = preset("table3", full_scale=True, T=1000)
        assert (sc.R, sc.S, sc.T) == (1000, 100, 1000)

    def test_unknown_preset(self):
        with pytest.raises(KeyError):
            preset("table99")

    def test_validation(self):
        base = PRESETS["table1"]
        with pytest.raises(ValueError):
            base.with_(theta_true=(0.1, 0.2))
        with pytest.raises(ValueError):
            base.with_(methods=("mle",))
        with pytest.raises(ValueError):
            base.with_(T=2)


class TestMonteCarlo:
    def test_seeds_are_independent_of_schedule(self):
        a, s1 = replication_seeds(7, 3)
        b, s2 = replication_seeds(7, 3)
        assert s1 == s2 and np.array_equal(a.generate_state(4), b.generate_state(4))
        assert replication_seeds(7, 4)[1] != s1

    def test_shapes(self, tiny_result):
        assert set(tiny_result.methods) == {"indirect", "aux", "bwe"}
        assert tiny_result.methods["indirect"].values.shape == (3, 3)
        assert tiny_result.methods["aux"].names == ("ar1_0", "ar1_1", "gamma_0")

    def test_reproducible(self, tiny, tiny_result):
        again = run_mc(tiny, 99)
        assert again.rows_csv() == tiny_result.rows_csv()
        assert again.to_json() == tiny_result.to_json()

    def test_replication_prefix_is_stable(self, tiny, tiny_result):
        shorter = run_mc(tiny.with_(R=2), 99)
        for m in shorter.methods:
            assert np.array_equal(shorter.methods[m].values, tiny_result.methods[m].values[:2])

    def test_failures_are_recorded(self, tiny, monkeypatch):
        calls = {"n": 0}
        real = whittle.bwe_fit

        def flaky(x, template, *a, **k):
            calls["n"] += 1
            if calls["n"] == 2:
                raise FloatingPointError("boom")
            return real(x, template, *a, **k)

        monkeypatch.setattr(analysis.whittle, "bwe_fit", flaky)
        res = run_mc(tiny.with_(methods=("bwe",)), 99)
        rows = res.methods["bwe"]
        assert rows.n_failed == 1 and "FloatingPointError: boom" in rows.errors[1]
        assert np.all(np.isnan(rows.values[1])) and not rows.converged[1]
        assert res.summary("bwe")["n"] == 2
        assert res.to_dict()["methods"]["bwe"]["failed"] == 1

    def test_parallel_matches_serial(self, tiny, tiny_result):
        par = run_mc(tiny, 99, n_jobs=2)
        assert par.rows_csv() == tiny_result.rows_csv()

    def test_progress_callback(self, tiny):
        seen = []
        run_mc(tiny.with_(R=2, methods=("bwe",)), 1, progress=seen.append)
        assert seen == [1, 2]

    def test_rows_csv(self, tiny_result, tmp_path):
        path = tmp_path / "rows.csv"
        tiny_result.write_rows(path)
        rows = list(csv.DictReader(open(path)))
        assert len(rows) == 3 * (3 + 3 + 3)
        assert {r["method"] for r in rows} == {"indirect", "aux", "bwe"}

    def test_format_table(self, tiny_result):
        text = format_table([tiny_result])
        assert "Indirect (model of interest)" in text and "BWE" in text
        assert "ar1_0" in text and "(" in text
        moments = format_table([tiny_result], moments=True)
        assert "kur" in moments and "skw" in moments
        with pytest.raises(ValueError):
            format_table([])


class TestDiagnostics:
    def test_gaussian_moments(self, rng):
        m = residual_moments(rng.standard_normal(20_000))
        assert abs(m.kurtosis - 3.0) < 0.15 and abs(m.skewness) < 0.05
        assert m.jb_pvalue > 0.001

    def test_heavy_tails_flagged(self, rng):
        m = residual_moments(sample(StableParams(1.5), rng, size=5000))
        assert m.kurtosis > 10 and m.jb_pvalue < 1e-6

    @pytest.mark.parametrize("e", [np.ones(50), np.arange(5.0), np.r_[np.arange(30.0), np.nan]])
    def test_moment_input_checks(self, e):
        with pytest.raises(ValueError):
            residual_moments(e)

    def test_pp_plot_on_true_law(self, rng, tmp_path):
        law = StableParams(1.34, 0.0, 1.0)
        pp = stabilized_pp(sample(law, rng, size=3000), law, n_ref=200_000)
        assert pp.max_deviation < 0.03
        assert np.all(np.diff(pp.r) > 0) and np.all(np.diff(pp.s) >= 0)
        pp.write_csv(tmp_path / "pp.csv")
        assert sum(1 for _ in open(tmp_path / "pp.csv")) == 3001

    def test_pp_plot_detects_wrong_law(self, rng):
        pp = stabilized_pp(sample(StableParams(1.34), rng, size=3000), StableParams(2.0), n_ref=200_000)
        assert pp.max_deviation > 0.05

    def test_variogram_oracle(self):
        x = np.array([0.0, 1.0, 3.0, 6.0])
        assert np.allclose(variogram(x, 2), [(1 + 4 + 9) / 6, (9 + 25) / 4])
        with pytest.raises(ValueError):
            variogram(x, 4)

    def test_white_noise_variogram_is_flat(self, rng):
        v = variogram(rng.standard_normal(20_000), 10)
        assert np.allclose(v, 1.0, atol=0.05)

    def test_error_metrics(self):
        m = error_metrics([3.0, -4.0])
        assert m.as_dict() == {"MSE": 12.5, "RMSE": pytest.approx(12.5**0.5), "MAE": 3.5}
        with pytest.raises(ValueError):
            error_metrics([])

    def test_fit_errors_recover_innovations(self, rng):
        model = TvArmaModel.from_coeffs(ar=[[-0.3, 0.8]], gamma=[1.0, 0.5], alpha=2.0)
        x = simulate(model, 5000, rng=rng)
        m = fit_errors(x, model)
        # gamma(u)^2 averages to 1 + 0.5 + 0.25/3 over [0, 1]
        assert m.mse == pytest.approx(1.0 + 0.5 + 0.25 / 3, rel=0.06)
        wrong = fit_errors(x, TvArmaModel.from_coeffs(gamma=[1.0, 0.5], alpha=2.0))
        assert wrong.mse > m.mse

    def test_fit_errors_template_requires_theta(self):
        tmpl = PRESETS["table1"].template
        with pytest.raises(ValueError):
            fit_errors(np.ones(10), tmpl)


class TestDiagnosticOracles:
    def test_large_gaussian_moments(self):
        m = residual_moments(np.random.default_rng(8).standard_normal(100_000))
        assert -0.03 <= m.skewness <= 0.03 and 2.95 <= m.kurtosis <= 3.05

    def test_two_point_moments(self):
        m = residual_moments(np.tile([1.0, -1.0], 50))
        assert m.skewness == pytest.approx(0.0, abs=1e-12) and m.kurtosis == pytest.approx(1.0)

    def test_pp_midpoint(self):
        pp = stabilized_pp([0.0], StableParams(1.5))
        assert pp.r[0] == pytest.approx(0.5) and pp.s[0] == pytest.approx(0.5, abs=2e-3)

    def test_pp_gaussian_data_against_cauchy(self, rng):
        assert stabilized_pp(rng.standard_normal(5000), StableParams(1.0)).max_deviation > 0.05

    def test_constant_variogram(self):
        assert np.all(variogram(np.full(50, 2.0), 5) == 0.0)

    def test_large_sample_variogram(self):
        v = variogram(np.random.default_rng(9).standard_normal(100_000), 10)
        assert np.all(np.abs(v - 1.0) < 0.1) and np.all(v >= 0)

    def test_error_metric_oracles(self):
        assert error_metrics(np.zeros(5)).as_dict() == {"MSE": 0.0, "RMSE": 0.0, "MAE": 0.0}
        m = error_metrics(0.3 * np.tile([1.0, -1.0], 10))
        assert m.mse == pytest.approx(0.09) and m.mae == pytest.approx(0.3)

    def test_single_replication(self):
        agg = aggregate(np.array([[0.1, 0.2, 0.3]]))
        assert agg["n"] == 1 and np.allclose(agg["mean"], [0.1, 0.2, 0.3]) and agg["se"] is None

    def test_r1_run(self):
        res = run_mc(preset("table1", T=150, R=1, S=2), 3)
        d = res.to_dict()["methods"]["indirect"]
        assert d["used"] == 1 and d["se"] is None
