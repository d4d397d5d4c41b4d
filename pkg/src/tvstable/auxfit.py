"""Conditional-likelihood fit of the Student-t tvARMA auxiliary model.

Residuals come from the conditional inversion recursion (zero pre-sample
values); each standardized residual e_t / gamma(t/T) is scored against a
standard t density with nu degrees of freedom, the scale entering only through
the log gamma(t/T) Jacobian. Stacked input (S series of equal length) is
scored by the mean loss over all S * T observations.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize, special

from . import _kernels
from .params import NU_BOX, AuxModelSpec, ParamVector

__all__ = [
    "NonFiniteLikelihood",
    "AuxFitResult",
    "neg_cond_loglik",
    "default_init",
    "fit",
]

_INFEASIBLE = 1e10


class NonFiniteLikelihood(FloatingPointError):
    """The residual recursion overflowed at the requested parameters."""


@dataclass
class AuxFitResult:
    """Outcome of :func:`fit`; ``params`` is the best point found even when not converged."""

    params: ParamVector
    value: float
    converged: bool
    n_iter: int
    n_eval: int
    message: str
    effectively_gaussian: bool = False
    trace: list[tuple[int, float, np.ndarray]] = field(default_factory=list, repr=False)

    def write_trace(self, path) -> None:
        """Dump the optimizer trace as CSV (iteration, objective, parameters...)."""
        with open(Path(path), "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["iteration", "objective", *self.params.names])
            for it, val, x in self.trace:
                writer.writerow([it, repr(float(val)), *(repr(float(v)) for v in x)])


def _as_stack(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise ValueError("expected one series or a 2-D stack of series")
    return np.ascontiguousarray(x)


def _upow(T: int, degree: int) -> np.ndarray:
    u = np.arange(1, T + 1) / T
    return np.ascontiguousarray(u[:, None] ** np.arange(degree + 1)[None, :])


def _t_const(nu: float) -> tuple[float, float]:
    """log-normalizer of the standard t density and its derivative in nu."""
    c = special.gammaln(0.5 * (nu + 1.0)) - special.gammaln(0.5 * nu) - 0.5 * math.log(nu * math.pi)
    dc = 0.5 * special.digamma(0.5 * (nu + 1.0)) - 0.5 * special.digamma(0.5 * nu) - 0.5 / nu
    return float(c), float(dc)


class _Objective:
    """Mean negative log-likelihood and gradient over a fixed data stack."""

    def __init__(self, spec: AuxModelSpec, x):
        self.spec = spec
        self.x = _as_stack(x)
        lay = spec.layout
        self.n_obs = self.x.size
        self.upow = _upow(self.x.shape[1], max(lay.ar_degree, lay.ma_degree, lay.gamma_degree))

    def evaluate(self, values, want_grad: bool = True):
        """Returns (status, value, grad); status 0 ok, 1 infeasible scale, 2 non-finite."""
        lay = self.spec.layout
        ar, ma, nu, gam = lay.split(values, self.spec.nu_free)
        if nu is None:
            nu = self.spec.nu
        grad_len = len(values)
        if not (np.all(np.isfinite(values)) and nu > 0.0):
            return 1, np.inf, np.zeros(grad_len)
        status, total, grad = _kernels.t_loss_grad(
            self.x,
            self.upow,
            np.ascontiguousarray(ar),
            np.ascontiguousarray(ma),
            np.ascontiguousarray(gam),
            float(nu),
            self.spec.nu_free,
            want_grad,
        )
        if status:
            return status, np.inf, np.zeros(grad_len)
        c, dc = _t_const(nu)
        value = total / self.n_obs - c
        grad = grad / self.n_obs
        if self.spec.nu_free:
            off = lay.p * (lay.ar_degree + 1) + lay.q * (lay.ma_degree + 1)
            grad[off] -= dc
        return 0, value, grad

    def __call__(self, values):
        status, value, grad = self.evaluate(np.asarray(values, dtype=float))
        if status:
            return _INFEASIBLE, np.zeros(len(values))
        return value, grad


def neg_cond_loglik(spec: AuxModelSpec, lam, x) -> float:
    """Mean negative conditional log-likelihood (1/(S T)) sum_t l_t(lambda).

    Raises
    ------
    ValueError
        If ``lam`` is outside the feasible region (nu <= 0.2, gamma not positive).
    NonFiniteLikelihood
        If the residual recursion overflows.
    """
    vals = lam.values if isinstance(lam, ParamVector) else np.asarray(lam, dtype=float)
    if len(vals) != len(spec.names):
        raise ValueError(f"expected {len(spec.names)} parameters, got {len(vals)}")
    if spec.nu_free:
        _, _, nu, _ = spec.layout.split(vals, True)
        if nu <= NU_BOX[0]:
            raise ValueError(f"nu must exceed {NU_BOX[0]}")
    status, value, _ = _Objective(spec, x).evaluate(vals, want_grad=False)
    if status == 1:
        raise ValueError("scale curve gamma(t/T) must be positive")
    if status == 2 or not math.isfinite(value):
        raise NonFiniteLikelihood("non-finite conditional likelihood")
    return float(value)


def default_init(spec: AuxModelSpec, x) -> ParamVector:
    """Zero dynamics, constant scale from the median absolute deviation, nu = 3."""
    x = _as_stack(x)
    med = np.median(x)
    scale = float(np.median(np.abs(x - med)))
    if scale <= 0.0:
        scale = float(np.std(x)) or 1.0
    lay = spec.layout
    vals = [0.0] * (len(lay.ar_names) + len(lay.ma_names))
    if spec.nu_free:
        vals.append(3.0)
    vals += [scale] + [0.0] * lay.gamma_degree
    return spec.vector(vals)


def _bounds(spec: AuxModelSpec):
    lay = spec.layout
    bounds = [(None, None)] * (len(lay.ar_names) + len(lay.ma_names))
    if spec.nu_free:
        bounds.append(NU_BOX)
    gam = [(None, None)] * (lay.gamma_degree + 1)
    if lay.gamma_degree == 0:
        gam = [(1e-10, None)]
    return bounds + gam


def _projected_grad(res, bounds) -> float:
    """Largest gradient component not blocked by an active bound."""
    g = np.array(res.jac, dtype=float)
    for i, (lo, hi) in enumerate(bounds):
        if (lo is not None and res.x[i] <= lo and g[i] > 0) or (hi is not None and res.x[i] >= hi and g[i] < 0):
            g[i] = 0.0
    return float(np.max(np.abs(g))) if g.size else 0.0


def fit(
    spec: AuxModelSpec,
    x,
    init: ParamVector | None = None,
    method: str = "lbfgs",
    max_iter: int = 1000,
    trace: bool = False,
) -> AuxFitResult:
    """Minimize the mean negative conditional log-likelihood.

    Args:
        spec: auxiliary model specification.
        x: one series, or an (S, T) stack whose log-likelihoods are pooled.
        init: starting point; :func:`default_init` when omitted.
        method: ``"lbfgs"`` (bounded quasi-Newton on the analytic gradient) or
            ``"nelder-mead"`` (derivative-free simplex).
        max_iter: iteration budget.
        trace: record (iteration, objective, parameters) at accepted steps.
    """
    obj = _Objective(spec, x)
    x0 = np.array((init if init is not None else default_init(spec, x)).values, dtype=float)
    if obj.evaluate(x0, want_grad=False)[0]:
        raise ValueError("initial point is infeasible")
    records: list[tuple[int, float, np.ndarray]] = []

    def callback(xk, *args):
        if trace:
            records.append((len(records) + 1, obj(xk)[0], np.array(xk)))

    if trace:
        records.append((0, obj(x0)[0], x0.copy()))
    if method == "lbfgs":
        res = optimize.minimize(
            obj,
            x0,
            jac=True,
            method="L-BFGS-B",
            bounds=_bounds(spec),
            callback=callback,
            options={"maxiter": max_iter, "ftol": 1e-14, "gtol": 1e-9, "maxcor": 20},
        )
        converged = bool(res.success)
        if not converged and res.nit < max_iter and _projected_grad(res, _bounds(spec)) > 1e-5:
            # Line-search breakdown away from a stationary point, typically a step
            # across gamma(u) = 0 when the scale curve sits close to zero. Breakdowns
            # at machine precision near the optimum are left alone.
            nm = optimize.minimize(
                lambda v: obj(v)[0],
                res.x,
                method="Nelder-Mead",
                callback=callback,
                options={"maxiter": max(max_iter, 200 * x0.size), "xatol": 1e-8, "fatol": 1e-12, "adaptive": True},
            )
            nm.nit += res.nit
            nm.nfev += res.nfev
            res, converged = nm, bool(nm.success)
    elif method == "nelder-mead":
        res = optimize.minimize(
            lambda v: obj(v)[0],
            x0,
            method="Nelder-Mead",
            callback=callback,
            options={"maxiter": max_iter, "xatol": 1e-8, "fatol": 1e-12, "adaptive": True},
        )
        converged = bool(res.success)
    else:
        raise ValueError(f"unknown method {method!r}")
    xbest = np.asarray(res.x, dtype=float)
    value = float(res.fun)
    if value >= _INFEASIBLE:
        converged = False
    eff_gauss = False
    if spec.nu_free:
        _, _, nu, _ = spec.layout.split(xbest, True)
        eff_gauss = nu >= NU_BOX[1] - 1e-6
    return AuxFitResult(
        params=spec.vector(xbest),
        value=value,
        converged=converged,
        n_iter=int(res.get("nit", 0)),
        n_eval=int(res.get("nfev", 0)),
        message=str(res.get("message", "")),
        effectively_gaussian=eff_gauss,
        trace=records,
    )
