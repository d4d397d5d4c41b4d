"""Monte Carlo harness and residual diagnostics.

Replication ``r`` of a run with master seed ``m`` draws its data from
``SeedSequence([m, r])`` and its indirect-inference streams from a child of
that sequence, so results do not depend on how replications are scheduled.
"""

from __future__ import annotations

import csv
import io
import json
import math
import traceback
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import indirect, whittle
from .params import ModelTemplate
from .scenarios import Scenario
from .stable import StableParams, empirical_cdf
from .tvarma import TvArmaModel, innovations_from_path, simulate

__all__ = [
    "MethodRows",
    "McResult",
    "replication_seeds",
    "run_replication",
    "run_mc",
    "aggregate",
    "format_table",
    "ResidualMoments",
    "residual_moments",
    "PPResult",
    "stabilized_pp",
    "variogram",
    "ErrorMetrics",
    "error_metrics",
    "fit_errors",
]


# ---------------------------------------------------------------- Monte Carlo


@dataclass
class MethodRows:
    """Per-replication estimates of one method; failed rows hold NaN."""

    names: tuple[str, ...]
    values: np.ndarray
    converged: np.ndarray
    errors: list[str | None]

    @property
    def n_failed(self) -> int:
        return sum(e is not None for e in self.errors)

    @property
    def n_nonconverged(self) -> int:
        return int(np.sum(~self.converged))

    def usable(self, converged_only: bool) -> np.ndarray:
        ok = np.all(np.isfinite(self.values), axis=1)
        if converged_only:
            ok &= self.converged
        return self.values[ok]


def aggregate(rows: np.ndarray) -> dict[str, np.ndarray | None]:
    """Mean, replication SD (ddof=1), skewness and raw kurtosis per column.

    SD, skewness and kurtosis are None with fewer than two rows.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    n = rows.shape[0]
    if n == 0:
        nan = np.full(rows.shape[1], np.nan)
        return {"n": 0, "mean": nan, "se": None, "skewness": None, "kurtosis": None}
    out = {"n": n, "mean": rows.mean(axis=0), "se": None, "skewness": None, "kurtosis": None}
    if n >= 2:
        out["se"] = rows.std(axis=0, ddof=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            out["skewness"] = stats.skew(rows, axis=0)
            out["kurtosis"] = stats.kurtosis(rows, axis=0, fisher=True) + 3.0
    return out


# BWE aggregates drop non-converged replications; the others keep every finite row.
_CONVERGED_ONLY = {"indirect": False, "aux": False, "bwe": True}


@dataclass
class McResult:
    scenario: Scenario
    master_seed: int
    methods: dict[str, MethodRows] = field(default_factory=dict)

    def summary(self, method: str) -> dict:
        rows = self.methods[method]
        return aggregate(rows.usable(_CONVERGED_ONLY.get(method, False)))

    def to_dict(self) -> dict:
        sc = self.scenario
        out = {
            "scenario": sc.id,
            "title": sc.title,
            "T": sc.T,
            "R": sc.R,
            "S": sc.S,
            "master_seed": self.master_seed,
            "true": sc.theta_vector.as_dict(),
            "methods": {},
        }
        for name, rows in self.methods.items():
            agg = self.summary(name)
            block = {"used": int(agg["n"]), "failed": rows.n_failed, "not_converged": rows.n_nonconverged}
            for key in ("mean", "se", "skewness", "kurtosis"):
                v = agg[key]
                block[key] = None if v is None else {n: _num(x) for n, x in zip(rows.names, v)}
            out["methods"][name] = block
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write_rows(self, path) -> None:
        """Raw per-replication estimates: one CSV line per (replication, method)."""
        with open(Path(path), "w", newline="") as fh:
            fh.write(self.rows_csv())

    def rows_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["replication", "method", "converged", "parameter", "value", "error"])
        for name, rows in self.methods.items():
            for r in range(rows.values.shape[0]):
                err = rows.errors[r] or ""
                for pname, v in zip(rows.names, rows.values[r]):
                    w.writerow([r, name, int(rows.converged[r]), pname, repr(float(v)), err])
        return buf.getvalue()


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def replication_seeds(master_seed: int, r: int) -> tuple[np.random.SeedSequence, int]:
    """(data seed sequence, integer seed for the indirect-inference draws)."""
    root = np.random.SeedSequence([int(master_seed), int(r)])
    data_ss, sim_ss = root.spawn(2)
    return data_ss, int(sim_ss.generate_state(1, np.uint64)[0])


def _method_names(scenario: Scenario) -> dict[str, tuple[str, ...]]:
    from .params import AuxModelSpec

    names = {}
    tmpl = scenario.template
    if "indirect" in scenario.methods:
        names["indirect"] = tmpl.names
        names["aux"] = AuxModelSpec.for_template(tmpl).names
    if "bwe" in scenario.methods:
        lay = tmpl.layout
        names["bwe"] = tuple(lay.ar_names + lay.ma_names + lay.gamma_names)
    return names


def run_replication(scenario: Scenario, master_seed: int, r: int) -> dict:
    """Simulate one data set and run each requested estimator.

    Returns method -> (values or None, converged, error message or None).
    Estimator failures are caught and reported, never raised.
    """
    data_ss, sim_seed = replication_seeds(master_seed, r)
    model = scenario.template.build(scenario.theta_true)
    out: dict[str, tuple] = {}
    try:
        x = simulate(model, scenario.T, burn_in=scenario.burn_in, rng=np.random.default_rng(data_ss))
    except Exception as exc:  # noqa: BLE001 - recorded per replication
        msg = f"simulation: {type(exc).__name__}: {exc}"
        return {m: (None, False, msg) for m in _method_names(scenario)}
    if "indirect" in scenario.methods:
        cfg = indirect.IndirectConfig(S=scenario.S, burn_in=scenario.burn_in, seed=sim_seed)
        try:
            res = indirect.estimate(x, cfg, scenario.template)
            out["indirect"] = (res.theta.values, res.converged, None)
            out["aux"] = (res.lam_hat.values, True, None)
        except Exception as exc:  # noqa: BLE001
            msg = _describe(exc)
            out["indirect"] = (None, False, msg)
            out["aux"] = (None, False, msg)
    if "bwe" in scenario.methods:
        try:
            res = whittle.bwe_fit(x, scenario.template)
            out["bwe"] = (res.params.values, res.converged, None)
        except Exception as exc:  # noqa: BLE001
            out["bwe"] = (None, False, _describe(exc))
    return out


def _describe(exc: BaseException) -> str:
    last = traceback.extract_tb(exc.__traceback__)[-1:] if exc.__traceback__ else []
    where = f" at {Path(last[0].filename).name}:{last[0].lineno}" if last else ""
    return f"{type(exc).__name__}: {exc}{where}"


def run_mc(scenario: Scenario, master_seed: int, n_jobs: int = 1, progress=None) -> McResult:
    """Run ``scenario.R`` replications, optionally in parallel processes.

    ``progress`` is an optional callable receiving the number of finished
    replications (serial runs only).
    """
    if scenario.R < 1:
        raise ValueError("R must be at least 1")
    if n_jobs == 1:
        outs = []
        for r in range(scenario.R):
            outs.append(run_replication(scenario, master_seed, r))
            if progress is not None:
                progress(r + 1)
    else:
        from joblib import Parallel, delayed

        outs = Parallel(n_jobs=n_jobs)(
            delayed(run_replication)(scenario, master_seed, r) for r in range(scenario.R)
        )
    result = McResult(scenario, int(master_seed))
    for method, names in _method_names(scenario).items():
        vals = np.full((scenario.R, len(names)), np.nan)
        conv = np.zeros(scenario.R, dtype=bool)
        errs: list[str | None] = []
        for r, o in enumerate(outs):
            v, c, e = o[method]
            if v is not None:
                vals[r] = v
            conv[r] = c
            errs.append(e)
        result.methods[method] = MethodRows(names, vals, conv, errs)
    return result


_LABELS = {"indirect": "Indirect (model of interest)", "aux": "Auxiliary model", "bwe": "BWE"}


def format_table(results: list[McResult], moments: bool = False) -> str:
    """Plain-text table: one block per method, T rows, mean over (SE).

    With ``moments=True`` the rows show kurtosis and skewness instead.
    """
    if not results:
        raise ValueError("no results to format")
    sc = results[0].scenario
    lines = [f"{sc.id}: {sc.title}", f"true: " + ", ".join(f"{k}={v:g}" for k, v in sc.theta_vector.as_dict().items())]
    for method in results[0].methods:
        names = results[0].methods[method].names
        lines.append("")
        lines.append(_LABELS.get(method, method))
        header = ["T", ""] + list(names) if moments else ["T"] + list(names)
        rows = [header]
        for res in results:
            agg = res.summary(method)
            T = str(res.scenario.T)
            if moments:
                rows.append([T, "kur"] + _fmt_vec(agg["kurtosis"], len(names)))
                rows.append(["", "skw"] + _fmt_vec(agg["skewness"], len(names)))
            else:
                rows.append([T] + _fmt_vec(agg["mean"], len(names)))
                rows.append([""] + [f"({s})" for s in _fmt_vec(agg["se"], len(names))])
            mrows = res.methods[method]
            if mrows.n_nonconverged or mrows.n_failed:
                rows.append([f"  used {agg['n']} of {res.scenario.R} replications"])
        widths = [max(len(r[i]) for r in rows if i < len(r) and len(r) > 1) for i in range(len(header))]
        for r in rows:
            if len(r) == 1:
                lines.append(r[0])
            else:
                lines.append("  ".join(c.rjust(w) for c, w in zip(r, widths)))
    return "\n".join(lines) + "\n"


def _fmt_vec(v, n) -> list[str]:
    if v is None:
        return ["-"] * n
    return ["nan" if not math.isfinite(x) else f"{x:.4f}" for x in v]


# ---------------------------------------------------------------- diagnostics


@dataclass(frozen=True)
class ResidualMoments:
    skewness: float
    kurtosis: float
    jb_statistic: float
    jb_pvalue: float

    def as_dict(self) -> dict[str, float]:
        return {
            "skewness": self.skewness,
            "kurtosis": self.kurtosis,
            "jb_statistic": self.jb_statistic,
            "jb_pvalue": self.jb_pvalue,
        }


def residual_moments(e) -> ResidualMoments:
    """Sample skewness, raw kurtosis (Gaussian = 3) and the Jarque-Bera test."""
    e = np.asarray(e, dtype=float).ravel()
    if e.size < 20:
        raise ValueError("need at least 20 residuals")
    if not np.all(np.isfinite(e)):
        raise ValueError("residuals must be finite")
    if np.ptp(e) == 0.0:
        raise ValueError("residuals have zero variance")
    jb = stats.jarque_bera(e)
    return ResidualMoments(
        skewness=float(stats.skew(e)),
        kurtosis=float(stats.kurtosis(e, fisher=False)),
        jb_statistic=float(jb.statistic),
        jb_pvalue=float(jb.pvalue),
    )


@dataclass
class PPResult:
    r: np.ndarray
    s: np.ndarray
    max_deviation: float

    def write_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r", "s"])
            for a, b in zip(self.r, self.s):
                w.writerow([repr(float(a)), repr(float(b))])


def stabilized_pp(e, params: StableParams, n_ref: int = 1_000_000) -> PPResult:
    """Stabilized probability plot of ``e`` against the stable law ``params``.

    s_i = (2/pi) arcsin(sqrt(F(y_(i)))) and r_i = (2/pi) arcsin(sqrt((i - 1/2)/n)),
    with F the simulation-defined CDF of :func:`empirical_cdf`.
    """
    y = np.sort(np.asarray(e, dtype=float).ravel())
    n = y.size
    if n == 0:
        raise ValueError("no residuals")
    F = empirical_cdf(params, n_ref)(y)
    s = (2.0 / np.pi) * np.arcsin(np.sqrt(np.clip(F, 0.0, 1.0)))
    r = (2.0 / np.pi) * np.arcsin(np.sqrt((np.arange(1, n + 1) - 0.5) / n))
    return PPResult(r, s, float(np.max(np.abs(s - r))))


def variogram(x, max_lag: int) -> np.ndarray:
    """V(h) = sum_{t=1}^{n-h} (x_{t+h} - x_t)^2 / (2 (n - h)), h = 1..max_lag."""
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if not 1 <= max_lag < n:
        raise ValueError("max_lag must lie in [1, len(x))")
    return np.array([np.mean((x[h:] - x[:-h]) ** 2) / 2.0 for h in range(1, max_lag + 1)])


@dataclass(frozen=True)
class ErrorMetrics:
    mse: float
    rmse: float
    mae: float

    def as_dict(self) -> dict[str, float]:
        return {"MSE": self.mse, "RMSE": self.rmse, "MAE": self.mae}


def error_metrics(residuals) -> ErrorMetrics:
    res = np.asarray(residuals, dtype=float).ravel()
    if res.size == 0:
        raise ValueError("no residuals")
    mse = float(np.mean(res**2))
    return ErrorMetrics(mse, math.sqrt(mse), float(np.mean(np.abs(res))))


def fit_errors(x, model: TvArmaModel | ModelTemplate, theta=None) -> ErrorMetrics:
    """MSE, RMSE and MAE of the one-step in-sample prediction errors.

    The errors are the conditional-inversion residuals in data units,
    gamma(t/T) * eps_hat_t.
    """
    if isinstance(model, ModelTemplate):
        if theta is None:
            raise ValueError("theta is required with a model template")
        model = model.build(theta)
    x = np.asarray(x, dtype=float)
    eps = innovations_from_path(model, x)
    u = np.arange(1, x.size + 1) / x.size
    return error_metrics(model.gamma(u) * eps)
