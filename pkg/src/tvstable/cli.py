"""Command-line front end: ``tvstable {simulate,estimate,mc,diagnose,predict}``.

Structured settings live in a YAML config; flags only carry paths, a seed
override, the worker count and verbosity. Exit codes: 0 success,
1 invalid config or arguments, 2 input/output failure, 3 estimator flagged
(not converged; results are still written), 4 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, auxfit, indirect, whittle
from .config import (
    ConfigError,
    load_config,
    model_from_config,
    read_series,
    stable_from_config,
    template_from_config,
    write_columns,
    write_json,
    write_manifest,
    write_series,
)
from .params import AuxModelSpec, ModelTemplate
from .scenarios import ALIASES, PRESETS, TABLE_T, Scenario, preset
from .stable import StableParams, ecf_estimate
from .tvarma import NotRegularError, innovations_from_path, predict, simulate

log = logging.getLogger("tvstable")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_FLAGGED, EXIT_INTERNAL = 0, 1, 2, 3, 4


class InputError(Exception):
    """An input file is missing or unreadable."""


def _read_input(path) -> np.ndarray:
    if path is None:
        raise ConfigError("--data is required for this command")
    try:
        return read_series(path)
    except (OSError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def _prepare(args, command: str) -> tuple[dict, Path]:
    try:
        cfg = load_config(args.config, command)
    except OSError as exc:
        raise InputError(f"cannot read config: {exc}") from exc
    if args.seed is not None:
        cfg = {**cfg, "seed": args.seed}
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory: {exc}") from exc
    return cfg, out


# ---------------------------------------------------------------- commands


def cmd_simulate(args) -> int:
    cfg, out = _prepare(args, "simulate")
    model = model_from_config(cfg["model"])
    x = simulate(model, cfg["T"], burn_in=cfg.get("burn_in", 500), rng=np.random.default_rng(cfg["seed"]))
    write_series(out / "series.csv", x)
    write_json(
        out / "series.meta.json",
        {"model": cfg["model"], "T": cfg["T"], "burn_in": cfg.get("burn_in", 500), "seed": cfg["seed"], "version": __version__},
    )
    write_manifest(out, "simulate", cfg, args.config, seed=cfg["seed"])
    log.info("wrote %d observations to %s", x.size, out / "series.csv")
    return EXIT_OK


def _residual_template(template: ModelTemplate) -> ModelTemplate:
    """Same curves with alpha pinned, so fitted curves can drive the inversion."""
    return ModelTemplate(template.layout, alpha=2.0 if template.alpha_free else template.alpha, beta=0.0)


def _curve_values(template: ModelTemplate, params) -> np.ndarray:
    """Drop alpha/nu from a parameter vector, leaving AR, MA and gamma coefficients."""
    return np.array([v for n, v in zip(params.names, params.values) if n not in ("alpha", "nu")])


def cmd_estimate(args) -> int:
    cfg, out = _prepare(args, "estimate")
    x = _read_input(args.data)
    template = template_from_config(cfg["template"])
    method = cfg["method"]
    if method == "indirect":
        opts = cfg.get("indirect", {})
        icfg = indirect.IndirectConfig(
            S=opts.get("S", 50),
            burn_in=opts.get("burn_in", 500),
            seed=cfg["seed"],
            max_iter=opts.get("max_iter", 500),
            alpha0=opts.get("alpha0", 1.5),
        )
        theta0 = None
        if "theta0" in opts:
            if len(opts["theta0"]) != len(template.names):
                raise ConfigError(f"indirect/theta0 needs {len(template.names)} values {template.names}")
            theta0 = template.vector(opts["theta0"])
        res = indirect.estimate(x, icfg, template, theta0=theta0)
        doc = res.to_dict()
        converged = res.converged
        curves = _curve_values(template, res.theta)
    elif method == "bwe":
        opts = cfg.get("bwe", {})
        bcfg = whittle.BweConfig(N=opts.get("N"), shift=opts.get("shift"), max_iter=opts.get("max_iter", 500))
        res = whittle.bwe_fit(x, template, bcfg)
        doc = res.to_dict()
        converged = res.converged
        curves = res.params.values
    else:
        spec = AuxModelSpec.for_template(template)
        res = auxfit.fit(spec, x)
        doc = {
            "method": "auxiliary",
            "lambda": res.params.as_dict(),
            "objective": res.value,
            "converged": res.converged,
            "effectively_gaussian": res.effectively_gaussian,
            "iterations": res.n_iter,
            "evaluations": res.n_eval,
            "message": res.message,
        }
        converged = res.converged
        curves = _curve_values(template, res.params)
    doc["free_parameters"] = list(doc["theta"] if "theta" in doc else doc["lambda"])
    doc["seed"] = cfg["seed"]
    write_json(out / "result.json", doc)
    model = _residual_template(template).build(curves)
    eps = innovations_from_path(model, x, check=False)
    write_series(out / "residuals.csv", eps, name="residual")
    write_manifest(out, "estimate", cfg, args.config, inputs=[args.data])
    if not converged:
        log.warning("estimator did not converge: %s", doc.get("message", ""))
        return EXIT_FLAGGED
    return EXIT_OK


def _scenarios_from_config(cfg: dict) -> list[Scenario]:
    overrides = {k: cfg[k] for k in ("R", "S", "burn_in") if k in cfg}
    if "preset" in cfg:
        name = cfg["preset"]
        if name not in PRESETS and name not in ALIASES:
            raise ConfigError(f"unknown preset {name!r}")
        base = preset(name, full_scale=cfg.get("full_scale", False), **overrides)
    else:
        sc = cfg["scenario"]
        template = template_from_config(sc["template"])
        try:
            base = Scenario(
                sc.get("id", "custom"),
                template,
                tuple(sc["theta"]),
                methods=tuple(sc.get("methods", ("indirect", "bwe"))),
                title=sc.get("title", ""),
                **overrides,
            )
        except ValueError as exc:
            raise ConfigError(f"scenario: {exc}") from exc
    Ts = cfg.get("T", list(TABLE_T))
    Ts = [Ts] if isinstance(Ts, int) else list(Ts)
    try:
        return [base.with_(T=T) for T in Ts]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_mc(args) -> int:
    cfg, out = _prepare(args, "mc")
    scenarios = _scenarios_from_config(cfg)
    results = []
    for sc in scenarios:
        log.info("scenario %s, T=%d, R=%d, S=%d", sc.id, sc.T, sc.R, sc.S)
        res = analysis.run_mc(sc, cfg["seed"], n_jobs=args.jobs)
        res.write_rows(out / f"rows_T{sc.T}.csv")
        results.append(res)
    write_json(out / "summary.json", [r.to_dict() for r in results])
    (out / "table.txt").write_text(analysis.format_table(results))
    (out / "moments.txt").write_text(analysis.format_table(results, moments=True))
    write_manifest(out, "mc", cfg, args.config)
    return EXIT_OK


def _stable_law(cfg: dict, e: np.ndarray) -> StableParams:
    spec = cfg.get("stable", "ecf")
    if spec == "ecf":
        return ecf_estimate(e)
    return stable_from_config(spec)


def cmd_diagnose(args) -> int:
    cfg, out = _prepare(args, "diagnose")
    x = _read_input(args.data)
    n_ref = cfg.get("n_ref", 1_000_000)
    summary: dict = {}
    if "models" in cfg:
        sets = []
        names, mse, rmse, mae = [], [], [], []
        for entry in cfg["models"]:
            model = model_from_config(entry["model"])
            eps = innovations_from_path(model, x)
            sets.append((entry["name"], eps))
            m = analysis.fit_errors(x, model)
            names.append(entry["name"])
            mse.append(m.mse)
            rmse.append(m.rmse)
            mae.append(m.mae)
        write_columns(out / "fit_errors.csv", ["model", "MSE", "RMSE", "MAE"], [names, mse, rmse, mae])
    else:
        sets = [("residuals", x)]
    for name, e in sets:
        law = _stable_law(cfg, e)
        mom = analysis.residual_moments(e)
        pp = analysis.stabilized_pp(e, law, n_ref=n_ref)
        pp.write_csv(out / f"pp_{name}.csv")
        summary[name] = {
            "moments": mom.as_dict(),
            "stable_law": {"alpha": law.alpha, "beta": law.beta, "sigma": law.sigma, "mu": law.mu},
            "pp_max_deviation": pp.max_deviation,
        }
    vcfg = cfg.get("variogram", {})
    series = np.diff(x) if vcfg.get("difference", False) else x
    max_lag = min(vcfg.get("max_lag", 50), series.size - 1)
    if max_lag < 1:
        raise ConfigError("series too short for a variogram")
    v = analysis.variogram(series, max_lag)
    write_columns(out / "variogram.csv", ["lag", "value"], [np.arange(1, max_lag + 1), v])
    write_json(out / "diagnostics.json", summary)
    write_manifest(out, "diagnose", cfg, args.config, inputs=[args.data])
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg, out = _prepare(args, "predict")
    x = _read_input(args.data)
    model = model_from_config(cfg["model"])
    f, d = predict(model, x, cfg["h"], J=cfg.get("J", 200))
    write_columns(out / "forecasts.csv", ["horizon", "forecast", "dispersion"], [np.arange(1, f.size + 1), f, d])
    write_manifest(out, "predict", cfg, args.config, inputs=[args.data])
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tvstable", description="Stable tvARMA simulation and estimation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "simulate": (cmd_simulate, "simulate a series from a model config", False),
        "estimate": (cmd_estimate, "estimate a model from a series", True),
        "mc": (cmd_mc, "run a Monte Carlo scenario or preset", False),
        "diagnose": (cmd_diagnose, "residual diagnostics and fit errors", True),
        "predict": (cmd_predict, "minimum-dispersion forecasts", True),
    }
    for name, (func, help_text, needs_data) in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="YAML config file")
        p.add_argument("-o", "--out", required=True, help="output directory")
        if needs_data:
            p.add_argument("-d", "--data", required=True, help="input CSV (header row, one column)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        if name == "mc":
            p.add_argument("-j", "--jobs", type=int, default=1, help="parallel replications")
        p.add_argument("-v", "--verbose", action="count", default=0)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.seed is not None and args.seed < 0:
        print("error: seed must be non-negative", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, NotRegularError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
