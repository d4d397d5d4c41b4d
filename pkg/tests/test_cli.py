import csv
import json
import shutil
import subprocess

import numpy as np
import pytest
import yaml

from tvstable import cli
from tvstable.config import read_series, write_series
from tvstable.stable import StableParams, sample
from tvstable.tvarma import TvArmaModel, simulate

DRIFTING_AR1 = {"ar": [[-0.2, 0.6]], "gamma": 1.0, "alpha": 1.7}


def write_cfg(path, command, **body):
    path.write_text(yaml.safe_dump({"schema": "tvstable/1", "command": command, "seed": 7, **body}))
    return str(path)


def read_csv(path):
    return list(csv.DictReader(open(path)))


@pytest.fixture(scope="module")
def series_file(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    x = simulate(TvArmaModel.from_coeffs(ar=[[-0.3, 0.8]], alpha=1.34), 1000, rng=5)
    write_series(d / "x.csv", x)
    return str(d / "x.csv")


class TestSimulate:
    def test_drifting_ar1_config(self, tmp_path):
        cfg = write_cfg(tmp_path / "sim.yaml", "simulate", model=DRIFTING_AR1, T=1000)
        assert cli.main(["simulate", cfg, "-o", str(tmp_path / "out")]) == 0
        x = read_series(tmp_path / "out" / "series.csv")
        assert x.size == 1000
        meta = json.loads((tmp_path / "out" / "series.meta.json").read_text())
        assert meta["seed"] == 7 and meta["model"] == DRIFTING_AR1 and "version" in meta
        man = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert set(man["outputs"]) == {"series.csv", "series.meta.json"}

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = write_cfg(tmp_path / "sim.yaml", "simulate", model=DRIFTING_AR1, T=300)
        for name in ("a", "b"):
            assert cli.main(["simulate", cfg, "-o", str(tmp_path / name)]) == 0
        for f in ("series.csv", "series.meta.json", "manifest.json"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_seed_override(self, tmp_path):
        cfg = write_cfg(tmp_path / "sim.yaml", "simulate", model=DRIFTING_AR1, T=50)
        cli.main(["simulate", cfg, "-o", str(tmp_path / "a")])
        cli.main(["simulate", cfg, "-o", str(tmp_path / "b"), "--seed", "8"])
        assert not np.array_equal(read_series(tmp_path / "a" / "series.csv"), read_series(tmp_path / "b" / "series.csv"))
        assert json.loads((tmp_path / "b" / "manifest.json").read_text())["seed"] == 8

    def test_validation_exit_codes(self, tmp_path):
        cfg = write_cfg(tmp_path / "sim.yaml", "simulate", model=DRIFTING_AR1, T=0)
        assert cli.main(["simulate", cfg, "-o", str(tmp_path / "o")]) == 1
        good = write_cfg(tmp_path / "ok.yaml", "simulate", model=DRIFTING_AR1, T=10)
        assert cli.main(["simulate", good, "-o", str(tmp_path / "o"), "--seed", "-1"]) == 1
        assert cli.main(["simulate", good]) == 1
        assert cli.main(["frobnicate"]) == 1

    def test_missing_config_is_io_error(self, tmp_path):
        assert cli.main(["simulate", str(tmp_path / "nope.yaml"), "-o", str(tmp_path / "o")]) == 2

    def test_internal_error(self, tmp_path, monkeypatch):
        def broken(*a, **k):
            raise RuntimeError("unexpected")

        monkeypatch.setattr(cli, "simulate", broken)
        cfg = write_cfg(tmp_path / "sim.yaml", "simulate", model=DRIFTING_AR1, T=10)
        assert cli.main(["simulate", cfg, "-o", str(tmp_path / "o")]) == 4


class TestEstimate:
    TVAR4 = {"p": 4, "ar_degree": 1, "gamma_degree": 1}

    def test_free_alpha_tvar4_has_eleven_parameters(self, tmp_path, series_file):
        cfg = write_cfg(
            tmp_path / "e.yaml",
            "estimate",
            method="indirect",
            template={**self.TVAR4, "alpha": None},
            indirect={"S": 2, "max_iter": 3},
        )
        code = cli.main(["estimate", cfg, "-d", series_file, "-o", str(tmp_path / "o")])
        res = json.loads((tmp_path / "o" / "result.json").read_text())
        assert code == 3 and res["converged"] is False
        names = res["free_parameters"]
        assert len(names) == 11 and "alpha" in names
        assert names[-2:] == ["gamma_0", "gamma_1"]
        assert len(read_series(tmp_path / "o" / "residuals.csv")) == 1000

    def test_known_alpha_drops_it(self, tmp_path, series_file):
        cfg = write_cfg(
            tmp_path / "e.yaml",
            "estimate",
            method="indirect",
            template={**self.TVAR4, "alpha": 1.34, "beta": 0.0},
            indirect={"S": 2, "max_iter": 3},
        )
        cli.main(["estimate", cfg, "-d", series_file, "-o", str(tmp_path / "o")])
        names = json.loads((tmp_path / "o" / "result.json").read_text())["free_parameters"]
        assert len(names) == 10 and "alpha" not in names

    def test_indirect_converges(self, tmp_path, series_file):
        cfg = write_cfg(tmp_path / "e.yaml", "estimate", method="indirect", template={"alpha": 1.34}, indirect={"S": 5})
        assert cli.main(["estimate", cfg, "-d", series_file, "-o", str(tmp_path / "o")]) == 0
        res = json.loads((tmp_path / "o" / "result.json").read_text())
        assert res["method"] == "indirect" and res["seed"] == 7
        assert abs(res["theta"]["ar1_1"] - 0.8) < 0.35

    def test_bwe_and_auxiliary(self, tmp_path, series_file):
        for method in ("bwe", "auxiliary"):
            cfg = write_cfg(tmp_path / f"{method}.yaml", "estimate", method=method, template={"alpha": 1.5})
            out = tmp_path / method
            assert cli.main(["estimate", cfg, "-d", series_file, "-o", str(out)]) == 0
            res = json.loads((out / "result.json").read_text())
            assert res["method"] == method and res["free_parameters"] == ["ar1_0", "ar1_1", "gamma_0"]
            assert "residuals.csv" in json.loads((out / "manifest.json").read_text())["outputs"]

    def test_theta0_length_checked(self, tmp_path, series_file):
        cfg = write_cfg(tmp_path / "e.yaml", "estimate", method="indirect", template={"alpha": 1.5}, indirect={"theta0": [0.1]})
        assert cli.main(["estimate", cfg, "-d", series_file, "-o", str(tmp_path / "o")]) == 1

    def test_missing_input(self, tmp_path):
        cfg = write_cfg(tmp_path / "e.yaml", "estimate", method="bwe", template={})
        assert cli.main(["estimate", cfg, "-d", str(tmp_path / "none.csv"), "-o", str(tmp_path / "o")]) == 2

    def test_rerun_is_byte_identical(self, tmp_path, series_file):
        cfg = write_cfg(tmp_path / "e.yaml", "estimate", method="indirect", template={"alpha": 1.34}, indirect={"S": 3, "max_iter": 20})
        codes = [cli.main(["estimate", cfg, "-d", series_file, "-o", str(tmp_path / n)]) for n in ("a", "b")]
        assert codes[0] == codes[1]
        for f in ("result.json", "residuals.csv", "manifest.json"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


class TestMc:
    def test_table1_preset_layout(self, tmp_path):
        cfg = write_cfg(tmp_path / "mc.yaml", "mc", preset="table1", T=[200, 300, 400], R=2, S=2)
        assert cli.main(["mc", cfg, "-o", str(tmp_path / "o")]) == 0
        table = (tmp_path / "o" / "table.txt").read_text()
        indirect_block = table.split("Indirect (model of interest)")[1].split("Auxiliary model")[0]
        t_rows = [ln for ln in indirect_block.splitlines() if ln.strip().split(" ")[0] in {"200", "300", "400"}]
        se_rows = [ln for ln in indirect_block.splitlines() if ln.strip().startswith("(")]
        assert len(t_rows) == 3 and len(se_rows) == 3
        summary = json.loads((tmp_path / "o" / "summary.json").read_text())
        assert [s["T"] for s in summary] == [200, 300, 400]
        assert all((tmp_path / "o" / f"rows_T{T}.csv").exists() for T in (200, 300, 400))
        assert "kur" in (tmp_path / "o" / "moments.txt").read_text()

    def test_table7_has_im_and_am_blocks(self, tmp_path):
        cfg = write_cfg(tmp_path / "mc.yaml", "mc", preset="table7", T=200, R=1, S=2)
        assert cli.main(["mc", cfg, "-o", str(tmp_path / "o")]) == 0
        table = (tmp_path / "o" / "table.txt").read_text()
        assert "Indirect (model of interest)" in table and "Auxiliary model" in table
        assert "alpha" in table and "nu" in table and "BWE" not in table

    def test_custom_scenario(self, tmp_path):
        cfg = write_cfg(
            tmp_path / "mc.yaml",
            "mc",
            scenario={"id": "white", "template": {"p": 0, "alpha": 1.5}, "theta": [1.0], "methods": ["bwe"]},
            T=200,
            R=3,
        )
        assert cli.main(["mc", cfg, "-o", str(tmp_path / "o")]) == 0
        assert json.loads((tmp_path / "o" / "summary.json").read_text())[0]["scenario"] == "white"

    @pytest.mark.parametrize(
        "body",
        [
            {"preset": "table1", "R": 0},
            {"preset": "table42"},
            {"scenario": {"template": {}, "theta": [1.0]}},
        ],
    )
    def test_invalid(self, tmp_path, body):
        cfg = write_cfg(tmp_path / "mc.yaml", "mc", **body)
        assert cli.main(["mc", cfg, "-o", str(tmp_path / "o")]) == 1


class TestDiagnose:
    def test_well_specified_residuals(self, tmp_path):
        e = sample(StableParams(1.34), np.random.default_rng(3), size=5000)
        write_series(tmp_path / "e.csv", e, name="residual")
        cfg = write_cfg(tmp_path / "d.yaml", "diagnose", stable={"alpha": 1.34}, variogram={"max_lag": 10})
        assert cli.main(["diagnose", cfg, "-d", str(tmp_path / "e.csv"), "-o", str(tmp_path / "o")]) == 0
        diag = json.loads((tmp_path / "o" / "diagnostics.json").read_text())
        assert diag["residuals"]["pp_max_deviation"] < 0.02
        assert len(read_csv(tmp_path / "o" / "variogram.csv")) == 10
        assert len(read_csv(tmp_path / "o" / "pp_residuals.csv")) == 5000

    def test_model_comparison(self, tmp_path, series_file):
        models = [
            {"name": "tvar1", "model": {"ar": [[-0.3, 0.8]], "gamma": 1.0, "alpha": 1.34}},
            {"name": "white", "model": {"gamma": 1.0, "alpha": 1.34}},
        ]
        cfg = write_cfg(tmp_path / "d.yaml", "diagnose", models=models, n_ref=100000)
        assert cli.main(["diagnose", cfg, "-d", series_file, "-o", str(tmp_path / "o")]) == 0
        rows = read_csv(tmp_path / "o" / "fit_errors.csv")
        assert list(rows[0]) == ["model", "MSE", "RMSE", "MAE"]
        mse = {r["model"]: float(r["MSE"]) for r in rows}
        assert mse["tvar1"] < mse["white"]
        assert (tmp_path / "o" / "pp_tvar1.csv").exists() and (tmp_path / "o" / "pp_white.csv").exists()

    def test_empty_file(self, tmp_path):
        (tmp_path / "e.csv").write_text("")
        cfg = write_cfg(tmp_path / "d.yaml", "diagnose")
        assert cli.main(["diagnose", cfg, "-d", str(tmp_path / "e.csv"), "-o", str(tmp_path / "o")]) == 2


class TestPredict:
    def run(self, tmp_path, model, h, x):
        write_series(tmp_path / "x.csv", x)
        cfg = write_cfg(tmp_path / "p.yaml", "predict", model=model, h=h)
        code = cli.main(["predict", cfg, "-d", str(tmp_path / "x.csv"), "-o", str(tmp_path / "o")])
        rows = read_csv(tmp_path / "o" / "forecasts.csv") if code == 0 else []
        return code, rows

    def test_tvma1(self, tmp_path):
        model = {"ma": [[0.35, -0.6]], "gamma": 1.0, "alpha": 1.5}
        x = simulate(TvArmaModel.from_coeffs(ma=[[0.35, -0.6]], alpha=1.5), 300, rng=1)
        code, rows = self.run(tmp_path, model, 3, x)
        assert code == 0 and [r["horizon"] for r in rows] == ["1", "2", "3"]
        assert float(rows[0]["forecast"]) != 0.0
        assert all(float(r["forecast"]) == 0.0 for r in rows[1:])

    def test_ar1_dispersion_nondecreasing(self, tmp_path):
        model = {"ar": [[-0.3, 0.8]], "gamma": 1.0, "alpha": 1.9}
        x = simulate(TvArmaModel.from_coeffs(ar=[[-0.3, 0.8]], alpha=1.9), 500, rng=2)
        code, rows = self.run(tmp_path, model, 5, x)
        d = [float(r["dispersion"]) for r in rows]
        assert code == 0 and all(b >= a for a, b in zip(d, d[1:]))

    def test_zero_horizon(self, tmp_path):
        code, _ = self.run(tmp_path, {"gamma": 1.0, "alpha": 1.5}, 0, np.ones(20))
        assert code == 1

    def test_skewed_model_rejected(self, tmp_path):
        code, _ = self.run(tmp_path, {"gamma": 1.0, "alpha": 1.5, "beta": 0.5}, 2, np.ones(20))
        assert code == 1


@pytest.mark.skipif(shutil.which("tvstable") is None, reason="console script not installed")
def test_console_script():
    out = subprocess.run(["tvstable", "--version"], capture_output=True, text=True, check=True)
    assert out.stdout.strip().startswith("tvstable ")
