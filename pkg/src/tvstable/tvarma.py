"""Time-varying ARMA(p, q) processes driven by alpha-stable innovations.

The model on the rescaled time grid u = t / T is

    sum_{j=0..p} a_j(t/T) X_{t-j} = sum_{k=0..q} b_k(t/T) g((t-k)/T) eps_t-k,

with a_0 = b_0 = 1, coefficient curves frozen at u = 0 for u < 0 and
eps_t ~ S_alpha(1/sqrt(2), beta, 0), so that alpha = 2 gives unit-variance
Gaussian noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .stable import StableParams, draw_uniforms, stable_transform

__all__ = [
    "INNOVATION_SIGMA",
    "NotRegularError",
    "SimulationError",
    "CoeffCurve",
    "TvArmaModel",
    "MaWeights",
    "simulate",
    "simulate_from_innovations",
    "innovation_draws",
    "green_function",
    "ma_weights",
    "frozen_ma_weights",
    "marginal_law",
    "innovations_from_path",
    "predict",
]

INNOVATION_SIGMA = 1.0 / math.sqrt(2.0)
_GRID = np.linspace(0.0, 1.0, 1001)


class NotRegularError(ValueError):
    """The MA(inf) or AR(inf) expansion does not decay at the requested tolerance."""


class SimulationError(FloatingPointError):
    """A simulated path overflowed (explosive coefficient curve)."""


@dataclass(frozen=True)
class CoeffCurve:
    """Polynomial curve c(u) = sum_k coeffs[k] u^k, held at c(0) for u < 0."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.coeffs))
        if not c:
            raise ValueError("a curve needs at least one coefficient")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def constant(cls, value: float) -> "CoeffCurve":
        return cls((value,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, u):
        u = np.maximum(np.asarray(u, dtype=float), 0.0)
        # Horner, highest power first
        out = np.zeros_like(u) + self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            out = out * u + c
        return out if out.ndim else float(out)


def _as_curve(c) -> CoeffCurve:
    return c if isinstance(c, CoeffCurve) else CoeffCurve(tuple(np.atleast_1d(c)))


@dataclass(frozen=True)
class TvArmaModel:
    """tvARMA(p, q) with polynomial AR, MA and scale curves and stable innovations.

    ``ar`` holds alpha_1..alpha_p in the sign convention of the defining
    recursion (so a stationary AR(1) with coefficient phi has alpha_1 = -phi),
    ``ma`` holds beta_1..beta_q and ``gamma`` the positive scale curve.
    """

    ar: tuple[CoeffCurve, ...]
    ma: tuple[CoeffCurve, ...]
    gamma: CoeffCurve
    innovation: StableParams

    def __post_init__(self):
        object.__setattr__(self, "ar", tuple(_as_curve(c) for c in self.ar))
        object.__setattr__(self, "ma", tuple(_as_curve(c) for c in self.ma))
        object.__setattr__(self, "gamma", _as_curve(self.gamma))
        inn = self.innovation
        if inn.mu != 0.0 or abs(inn.sigma - INNOVATION_SIGMA) > 1e-15:
            raise ValueError("innovations must be S_alpha(1/sqrt(2), beta, 0)")
        if np.any(self.gamma(_GRID) <= 0.0):
            raise ValueError("scale curve gamma(u) must be positive on [0, 1]")

    @classmethod
    def from_coeffs(
        cls,
        ar: Sequence = (),
        ma: Sequence = (),
        gamma=1.0,
        alpha: float = 2.0,
        beta: float = 0.0,
    ) -> "TvArmaModel":
        """Build a model from plain coefficient lists, e.g. ``ar=[[-0.2, 0.6]]``."""
        return cls(
            ar=tuple(_as_curve(c) for c in ar),
            ma=tuple(_as_curve(c) for c in ma),
            gamma=_as_curve(gamma),
            innovation=StableParams(alpha, beta, INNOVATION_SIGMA, 0.0),
        )

    @property
    def p(self) -> int:
        return len(self.ar)

    @property
    def q(self) -> int:
        return len(self.ma)

    @property
    def alpha(self) -> float:
        return self.innovation.alpha

    def ar_values(self, u) -> np.ndarray:
        """(p, len(u)) matrix of AR curve values."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if not self.ar:
            return np.zeros((0, u.size))
        return np.vstack([c(u) for c in self.ar])

    def ma_values(self, u) -> np.ndarray:
        """(q, len(u)) matrix of MA curve values."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if not self.ma:
            return np.zeros((0, u.size))
        return np.vstack([c(u) for c in self.ma])


@dataclass(frozen=True)
class MaWeights:
    """Truncated MA(inf) weights a_{t,T}(0..J) with a tail-sum bound."""

    t_index: int
    T: int
    weights: np.ndarray
    truncation_error_bound: float

    @property
    def J(self) -> int:
        return self.weights.size - 1


# ---------------------------------------------------------------------------
# simulation


def innovation_draws(model: TvArmaModel, n_paths: int, T: int, burn_in: int, rng):
    """Frozen (U, W) pairs sized for :func:`simulate_from_innovations`."""
    return draw_uniforms(rng, (n_paths, burn_in + T + model.q))


def simulate_from_innovations(model: TvArmaModel, T: int, eps: np.ndarray, burn_in: int = 500):
    """Filter standardized innovations through the model.

    Args:
        model: the process.
        T: number of returned observations X_1..X_T.
        eps: (S, burn_in + T + q) innovations; column c corresponds to time
            c - burn_in - q + 1.
        burn_in: number of discarded leading observations; during the burn-in
            every curve is evaluated at u = 0.

    Returns:
        (S, T) array of paths.
    """
    eps = np.atleast_2d(np.asarray(eps, dtype=float))
    q = model.q
    n = burn_in + T
    if eps.shape[1] != n + q:
        raise ValueError(f"expected {n + q} innovation columns, got {eps.shape[1]}")
    t_obs = np.arange(n) - burn_in + 1
    u_obs = np.maximum(t_obs, 0) / T
    t_eps = np.arange(n + q) - burn_in - q + 1
    u_eps = np.maximum(t_eps, 0) / T
    z = eps * model.gamma(u_eps)[None, :]
    x = _kernels.filter_paths(model.ar_values(u_obs), model.ma_values(u_obs), z)
    x = x[:, burn_in:]
    if not np.all(np.isfinite(x)):
        raise SimulationError("non-finite value in simulated path (explosive coefficient curve)")
    return x


def simulate(model: TvArmaModel, T: int, burn_in: int = 500, rng=None, size: int | None = None):
    """Simulate X_1..X_T (or ``size`` independent paths of it).

    The innovations eps_{-burn_in-q+1}..eps_T are drawn i.i.d. from the model's
    stable law; identical ``rng`` states give bit-identical paths.
    """
    if T < 1:
        raise ValueError("T must be positive")
    if burn_in < 0:
        raise ValueError("burn_in must be non-negative")
    rng = np.random.default_rng(rng)
    n_paths = 1 if size is None else int(size)
    u, w = innovation_draws(model, n_paths, T, burn_in, rng)
    inn = model.innovation
    eps = inn.sigma * stable_transform(inn.alpha, inn.beta, u, w)
    if abs(inn.alpha - 1.0) < 1e-8:
        eps = eps + (2.0 / math.pi) * inn.beta * inn.sigma * math.log(inn.sigma)
    x = simulate_from_innovations(model, T, eps, burn_in)
    return x[0] if size is None else x


# ---------------------------------------------------------------------------
# Green's functions and MA(inf) weights


def _green_row(coef: np.ndarray) -> np.ndarray:
    """First-row products of companion matrices.

    ``coef[l]`` holds the operator coefficients at time t - l; returns
    g[m] = [A(t) A(t-1) ... A(t-m+1)]_{11} for m = 0..len(coef).
    """
    m_steps, p = coef.shape
    g = np.zeros(m_steps + 1)
    g[0] = 1.0
    if p == 0:
        return g
    row = np.zeros(p)
    row[0] = 1.0
    for ell in range(m_steps):
        lead = row[0]
        new = np.empty(p)
        new[:-1] = row[1:] - lead * coef[ell, :-1]
        new[-1] = -lead * coef[ell, -1]
        row = new
        g[ell + 1] = row[0]
    return g


def green_function(model: TvArmaModel, t: int, s: int, T: int) -> float:
    """One-sided Green's function g(t, s) of the AR operator.

    Computed as the (1,1) entry of the ordered product of companion matrices
    at times t, t-1, ..., s+1, which equals Psi(t) Psi(s)^{-1} without forming
    an inverse.
    """
    if s > t:
        raise ValueError("g(t, s) is defined for s <= t")
    times = t - np.arange(t - s)
    coef = model.ar_values(times / T).T
    return float(_green_row(coef)[-1])


def _tail_bound(w: np.ndarray, window: int = 20) -> tuple[float, float]:
    """Geometric extrapolation of sum_{j>J} |w_j| from the decay of the envelope."""
    absw = np.abs(w)
    env = np.maximum.accumulate(absw[::-1])[::-1]
    J = w.size - 1
    L = min(window, J // 2)
    if L < 1 or env[J] == 0.0:
        return 0.0, 0.0
    if env[J - L] == 0.0:
        return 0.0, 0.0
    ratio = (env[J] / env[J - L]) ** (1.0 / L)
    if ratio >= 1.0:
        return math.inf, ratio
    return env[J] * ratio / (1.0 - ratio), ratio


def ma_weights(model: TvArmaModel, t: int, T: int, J: int = 200, tol: float | None = 1e-10) -> MaWeights:
    """MA(inf) weights a_{t,T}(j), j = 0..J.

    a(j) = gamma((t-j)/T) * sum_{k=0..min(j,q)} b_k((t-j+k)/T) g(t, t-j+k),
    with b_0 = 1.

    Raises
    ------
    NotRegularError
        If the weights do not decay, or the extrapolated tail exceeds ``tol``.
    """
    steps = t - np.arange(J)
    coef = model.ar_values(steps / T).T
    g = _green_row(coef)  # g[m] = g(t, t-m)
    j = np.arange(J + 1)
    acc = g.copy()
    for k, curve in enumerate(model.ma, start=1):
        m = j - k
        valid = m >= 0
        bk = curve((t - j[valid] + k) / T)
        acc[valid] += bk * g[m[valid]]
    w = model.gamma((t - j) / T) * acc
    bound, ratio = _tail_bound(w)
    if not math.isfinite(bound):
        raise NotRegularError(
            f"not AR-regular at requested tolerance: weights at t={t} do not decay (tail ratio {ratio:.4f})"
        )
    if tol is not None and bound > tol:
        raise NotRegularError(
            f"not AR-regular at requested tolerance: tail bound {bound:.3e} exceeds {tol:.1e} at J={J}"
        )
    return MaWeights(t_index=int(t), T=int(T), weights=w, truncation_error_bound=float(bound))


def frozen_ma_weights(model: TvArmaModel, u: float, J: int = 200) -> np.ndarray:
    """Weights a(u, j) of the stationary ARMA with all curves frozen at ``u``."""
    ar = model.ar_values([u])[:, 0]
    g = _green_row(np.tile(ar, (J, 1)))
    acc = g.copy()
    for k, curve in enumerate(model.ma, start=1):
        acc[k:] += curve(u) * g[: J + 1 - k]
    return model.gamma(u) * acc


def marginal_law(weights: MaWeights, innovation: StableParams) -> StableParams:
    """Stable law of sum_j a(j) eps_{t-j}: S_alpha(sigma*, beta*, 0).

    sigma* = sigma * (sum |a|^alpha)^(1/alpha) and
    beta* = beta * sum sign(a)|a|^alpha / sum |a|^alpha.
    """
    a = np.asarray(weights.weights if isinstance(weights, MaWeights) else weights, dtype=float)
    alpha = innovation.alpha
    mag = np.abs(a) ** alpha
    total = mag.sum()
    if total <= 0.0:
        raise ValueError("all weights are zero")
    sigma = innovation.sigma * total ** (1.0 / alpha)
    beta = innovation.beta * float(np.sum(np.sign(a) * mag) / total)
    return StableParams(alpha=alpha, beta=float(np.clip(beta, -1.0, 1.0)), sigma=float(sigma), mu=0.0)


# ---------------------------------------------------------------------------
# inversion and prediction


def _check_ma_regular(model: TvArmaModel, T: int, n: int, J: int = 200) -> None:
    if model.q == 0:
        return
    for t in sorted({n, max(1, n // 2), min(n, J)}):
        times = t - np.arange(min(J, t + J))
        coef = model.ma_values(times / T).T
        h = _green_row(coef)
        bound, ratio = _tail_bound(h)
        if not math.isfinite(bound):
            raise NotRegularError(
                f"MA curve is not invertible: inverse weights at t={t} do not decay (ratio {ratio:.4f})"
            )


def innovations_from_path(model: TvArmaModel, x, T: int | None = None, check: bool = True) -> np.ndarray:
    """Recover eps_1..eps_n from X_1..X_n by conditional inversion.

    Pre-sample X and eps are set to zero, so the error from the unknown
    initial values dies out geometrically under invertibility. ``T`` is the
    rescaling length (defaults to ``len(x)``).
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x2 = np.atleast_2d(x)
    n = x2.shape[1]
    T = n if T is None else int(T)
    u = np.arange(1, n + 1) / T
    gam = model.gamma(u)
    if np.any(gam <= 0.0):
        raise ValueError("gamma(t/T) must be positive")
    if check:
        _check_ma_regular(model, T, n)
    eps = _kernels.invert_paths(x2, model.ar_values(u), model.ma_values(u), gam)
    return eps[0] if single else eps


def predict(model: TvArmaModel, x, h: int, J: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """Minimum-dispersion forecasts for SaS innovations.

    ``x`` holds the observed X_1..X_{T'}; time is rescaled with T = T' + h so
    that the last forecast sits at u = 1.

    Returns:
        (forecasts, dispersions) for horizons 1..h, where the forecast is
        sum_{j>=0} a_{T'+l,T}(j+l) eps_{T'-j} and the dispersion of its error
        is sigma^alpha sum_{j<l} |a_{T'+l,T}(j)|^alpha.
    """
    if h < 1:
        raise ValueError("horizon must be at least 1")
    if model.innovation.beta != 0.0:
        raise ValueError("minimum-dispersion prediction requires symmetric (beta = 0) innovations")
    x = np.asarray(x, dtype=float)
    n = x.size
    T = n + h
    eps = innovations_from_path(model, x, T=T)
    alpha = model.alpha
    disp_scale = model.innovation.sigma**alpha
    n_use = min(J, n - 1)
    past = eps[n - 1 - np.arange(n_use + 1)]  # eps_{T'-j}, j = 0..n_use
    forecasts = np.empty(h)
    disps = np.empty(h)
    for ell in range(1, h + 1):
        a = ma_weights(model, n + ell, T, J=n_use + ell).weights
        forecasts[ell - 1] = np.dot(a[ell : ell + n_use + 1], past)
        disps[ell - 1] = disp_scale * np.sum(np.abs(a[:ell]) ** alpha)
    return forecasts, disps
