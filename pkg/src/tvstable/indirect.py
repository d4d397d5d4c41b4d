"""Indirect inference for stable tvARMA models through a Student-t twin.

Step 1 fits the t model to the data (lambda_hat). For a candidate theta the
binding function simulates S paths of the stable model from frozen uniform and
exponential draws, fits the t model to the pooled paths (lambda_S(theta)) and
Step 4 minimizes Q(theta) = d' Omega d, d = lambda_hat - lambda_S(theta), with
a Nelder-Mead simplex.

The (U, W) pairs behind the stable innovations are drawn once per estimate and
reused for every theta (common random numbers), so Q is a deterministic and,
away from alpha = 1, smooth function of theta.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._simplex import nelder_mead
from .auxfit import AuxFitResult, fit
from .params import AuxModelSpec, ModelTemplate, ParamVector
from .stable import draw_uniforms, stable_transform
from .tvarma import INNOVATION_SIGMA, SimulationError, simulate_from_innovations

__all__ = [
    "PENALTY",
    "IndirectConfig",
    "IndirectResult",
    "Binding",
    "binding",
    "initial_theta",
    "estimate",
    "estimate_unknown_alpha",
]

PENALTY = 1e12


@dataclass(frozen=True)
class IndirectConfig:
    """Settings of one indirect-inference run.

    ``seed`` fixes the S innovation streams for the whole run. ``omega`` is
    the weighting matrix (identity when None).
    """

    S: int = 50
    burn_in: int = 500
    seed: int = 0
    omega: np.ndarray | None = None
    max_iter: int = 500
    xatol: float = 1e-4
    fatol: float = 1e-10
    alpha0: float = 1.5
    aux_method: str = "lbfgs"

    def __post_init__(self):
        if self.S < 1:
            raise ValueError("S must be at least 1")
        if self.burn_in < 0:
            raise ValueError("burn_in must be non-negative")


@dataclass
class IndirectResult:
    theta: ParamVector
    lam_hat: ParamVector
    lam_sim: ParamVector | None
    Q: float
    n_iter: int
    n_eval: int
    converged: bool
    message: str
    seed: int
    S: int
    wall_time: float = 0.0
    trace: list[tuple[np.ndarray, float]] = field(default_factory=list, repr=False)

    def to_dict(self, include_timing: bool = False, include_trace: bool = False) -> dict:
        """Plain-data form with stable key names (timing excluded unless asked)."""
        out = {
            "method": "indirect",
            "theta": self.theta.as_dict(),
            "lambda_hat": self.lam_hat.as_dict(),
            "lambda_sim": None if self.lam_sim is None else self.lam_sim.as_dict(),
            "Q": self.Q,
            "iterations": self.n_iter,
            "evaluations": self.n_eval,
            "converged": self.converged,
            "message": self.message,
            "seed": self.seed,
            "S": self.S,
        }
        if include_timing:
            out["wall_time"] = self.wall_time
        if include_trace:
            out["trace"] = [
                {"theta": [float(v) for v in th], "Q": float(q)} for th, q in self.trace
            ]
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(**kwargs), indent=2, sort_keys=True)


def _check_dims(template: ModelTemplate, aux: AuxModelSpec) -> None:
    if template.layout != aux.layout:
        raise ValueError("model template and auxiliary spec must share one curve layout")
    if template.alpha_free != aux.nu_free:
        raise ValueError("dim(theta) must equal dim(lambda): free alpha pairs with free nu")


class Binding:
    """lambda_S(theta) for fixed innovation draws.

    Args:
        template: parametric stable model.
        aux: paired t model.
        T: path length.
        cfg: run settings (S, burn-in, seed).
        init: starting point for every auxiliary fit; using one fixed start keeps
            the map a function of theta alone.
    """

    def __init__(self, template: ModelTemplate, aux: AuxModelSpec, T: int, cfg: IndirectConfig, init: ParamVector):
        _check_dims(template, aux)
        self.template = template
        self.aux = aux
        self.T = int(T)
        self.cfg = cfg
        self.init = init
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
        self.u, self.w = draw_uniforms(rng, (cfg.S, cfg.burn_in + self.T + template.layout.q))
        self._eps_cache: tuple[float, np.ndarray] | None = None

    def innovations(self, alpha: float) -> np.ndarray:
        if self._eps_cache is not None and self._eps_cache[0] == alpha:
            return self._eps_cache[1]
        beta = self.template.beta
        eps = INNOVATION_SIGMA * stable_transform(alpha, beta, self.u, self.w)
        if abs(alpha - 1.0) < 1e-8:
            eps = eps + (2.0 / math.pi) * beta * INNOVATION_SIGMA * math.log(INNOVATION_SIGMA)
        self._eps_cache = (alpha, eps)
        return eps

    def simulate(self, theta) -> np.ndarray:
        model = self.template.build(theta)
        eps = self.innovations(model.alpha)
        return simulate_from_innovations(model, self.T, eps, self.cfg.burn_in)

    def fit(self, theta) -> AuxFitResult | None:
        """Auxiliary fit on the simulated stack, or None when theta is unusable."""
        if self.template.box_distance(theta) > 0.0:
            return None
        try:
            paths = self.simulate(theta)
        except (SimulationError, ValueError):
            return None
        if np.max(np.abs(paths)) > 1e150:
            return None
        try:
            res = fit(self.aux, paths, init=self.init, method=self.cfg.aux_method)
        except ValueError:
            return None
        if not np.isfinite(res.value) or res.value >= 1e10:
            return None
        return res

    def __call__(self, theta) -> ParamVector | None:
        res = self.fit(theta)
        return None if res is None else res.params


def binding(
    theta,
    cfg: IndirectConfig,
    template: ModelTemplate,
    aux: AuxModelSpec,
    T: int,
    init: ParamVector | None = None,
) -> ParamVector:
    """One-shot lambda_S(theta); raises if theta is infeasible or explosive."""
    if init is None:
        vals = theta.values if isinstance(theta, ParamVector) else np.asarray(theta, dtype=float)
        init = _lambda_start(template, aux, vals)
    out = Binding(template, aux, T, cfg, init)(theta)
    if out is None:
        raise ValueError("theta is infeasible or produces explosive paths")
    return out


def _lambda_start(template: ModelTemplate, aux: AuxModelSpec, theta_vals) -> ParamVector:
    vals = np.array(theta_vals, dtype=float)
    if aux.nu_free:
        vals[template.names.index("alpha")] = 3.0
    return aux.vector(vals)


def initial_theta(template: ModelTemplate, lam_hat: ParamVector, alpha0: float = 1.5) -> ParamVector:
    """Map lambda_hat onto theta coordinate by coordinate; alpha starts at ``alpha0``."""
    vals = []
    for name in template.names:
        vals.append(alpha0 if name == "alpha" else lam_hat[name])
    return template.vector(vals)


def estimate(
    x,
    cfg: IndirectConfig,
    template: ModelTemplate,
    aux: AuxModelSpec | None = None,
    theta0: ParamVector | None = None,
) -> IndirectResult:
    """Indirect-inference estimate of ``template``'s parameters from series ``x``."""
    start = time.perf_counter()
    aux = AuxModelSpec.for_template(template) if aux is None else aux
    _check_dims(template, aux)
    x = np.asarray(x, dtype=float)
    T = x.size
    lam_fit = fit(aux, x, method=cfg.aux_method)
    lam_hat = lam_fit.params
    if theta0 is None:
        theta0 = initial_theta(template, lam_hat, cfg.alpha0)
    if template.box_distance(theta0) > 0.0:
        raise ValueError("theta0 is outside the feasible region")
    bind = Binding(template, aux, T, cfg, lam_hat)
    omega = np.eye(len(lam_hat)) if cfg.omega is None else np.asarray(cfg.omega, dtype=float)
    target = lam_hat.values
    trace: list[tuple[np.ndarray, float]] = []
    sims: dict[bytes, np.ndarray] = {}

    def q_of(th):
        th = np.asarray(th, dtype=float)
        dist = template.box_distance(th)
        lam_s = None if dist > 0.0 else bind(th)
        if lam_s is None:
            val = PENALTY + (dist if np.isfinite(dist) else 1e6)
        else:
            d = target - lam_s.values
            val = float(d @ omega @ d)
            sims[th.tobytes()] = lam_s.values
        trace.append((th.copy(), val))
        return val

    res = nelder_mead(q_of, theta0.values, cfg.max_iter, cfg.xatol, cfg.fatol)
    best = min(trace, key=lambda r: r[1])
    theta_hat, q_best = best
    lam_sim_vals = sims.get(theta_hat.tobytes())
    converged = bool(res.success) and q_best < PENALTY
    return IndirectResult(
        theta=template.vector(theta_hat),
        lam_hat=lam_hat,
        lam_sim=None if lam_sim_vals is None else aux.vector(lam_sim_vals),
        Q=float(q_best),
        n_iter=int(res.nit),
        n_eval=int(res.nfev),
        converged=converged,
        message=str(res.message),
        seed=cfg.seed,
        S=cfg.S,
        wall_time=time.perf_counter() - start,
        trace=trace,
    )


def estimate_unknown_alpha(
    x,
    cfg: IndirectConfig,
    template: ModelTemplate,
    aux: AuxModelSpec | None = None,
    theta0: ParamVector | None = None,
) -> IndirectResult:
    """:func:`estimate` with alpha in theta and nu in lambda."""
    if not template.alpha_free:
        raise ValueError("template must leave alpha free")
    aux = AuxModelSpec.for_template(template) if aux is None else aux
    if not aux.nu_free:
        raise ValueError("auxiliary spec must leave nu free")
    return estimate(x, cfg, template, aux, theta0)
