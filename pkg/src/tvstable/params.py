"""Flat parameter vectors and the templates that map them onto models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .stable import StableParams
from .tvarma import INNOVATION_SIGMA, CoeffCurve, TvArmaModel

__all__ = ["ParamVector", "CurveLayout", "ModelTemplate", "AuxModelSpec", "ALPHA_BOX", "NU_BOX"]

ALPHA_BOX = (0.2, 2.0)
NU_BOX = (0.2, 50.0)
_GRID = np.linspace(0.0, 1.0, 201)


@dataclass(frozen=True)
class ParamVector:
    """Named flat parameter vector (theta for the stable model, lambda for the t model)."""

    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        names = tuple(self.names)
        values = np.array(self.values, dtype=float).ravel()
        if len(names) != values.size:
            raise ValueError("names and values differ in length")
        values.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.names)

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self.names, self.values)}

    def with_values(self, values) -> "ParamVector":
        return ParamVector(self.names, values)

    @classmethod
    def from_dict(cls, d: Mapping[str, float], names: Iterable[str] | None = None) -> "ParamVector":
        names = tuple(d) if names is None else tuple(names)
        return cls(names, [d[n] for n in names])


@dataclass(frozen=True)
class CurveLayout:
    """Orders and polynomial degrees shared by the stable model and its t twin."""

    p: int = 1
    q: int = 0
    ar_degree: int = 1
    ma_degree: int = 1
    gamma_degree: int = 0

    def __post_init__(self):
        if min(self.p, self.q, self.ar_degree, self.ma_degree, self.gamma_degree) < 0:
            raise ValueError("orders and degrees must be non-negative")

    @property
    def ar_names(self) -> list[str]:
        return [f"ar{j}_{d}" for j in range(1, self.p + 1) for d in range(self.ar_degree + 1)]

    @property
    def ma_names(self) -> list[str]:
        return [f"ma{k}_{d}" for k in range(1, self.q + 1) for d in range(self.ma_degree + 1)]

    @property
    def gamma_names(self) -> list[str]:
        return [f"gamma_{d}" for d in range(self.gamma_degree + 1)]

    def split(self, values: np.ndarray, middle: bool):
        """Split a flat vector into (ar (p, da+1), ma (q, db+1), middle scalar or None, gamma)."""
        values = np.asarray(values, dtype=float)
        na = self.p * (self.ar_degree + 1)
        nb = self.q * (self.ma_degree + 1)
        ar = values[:na].reshape(self.p, self.ar_degree + 1)
        ma = values[na : na + nb].reshape(self.q, self.ma_degree + 1)
        pos = na + nb
        mid = None
        if middle:
            mid = float(values[pos])
            pos += 1
        gam = values[pos:]
        return ar, ma, mid, gam

    def gamma_min(self, gamma_coeffs) -> float:
        return float(np.min(CoeffCurve(tuple(gamma_coeffs))(_GRID)))


@dataclass(frozen=True)
class ModelTemplate:
    """Parametric stable tvARMA: curves from ``layout``; ``alpha=None`` makes alpha free."""

    layout: CurveLayout
    alpha: float | None = None
    beta: float = 0.0

    @property
    def alpha_free(self) -> bool:
        return self.alpha is None

    @property
    def names(self) -> tuple[str, ...]:
        lay = self.layout
        mid = ["alpha"] if self.alpha_free else []
        return tuple(lay.ar_names + lay.ma_names + mid + lay.gamma_names)

    def vector(self, values) -> ParamVector:
        return ParamVector(self.names, values)

    def build(self, theta) -> TvArmaModel:
        """Model at ``theta`` (a ParamVector or plain array in :attr:`names` order)."""
        vals = theta.values if isinstance(theta, ParamVector) else np.asarray(theta, dtype=float)
        ar, ma, alpha, gam = self.layout.split(vals, self.alpha_free)
        if alpha is None:
            alpha = self.alpha
        return TvArmaModel(
            ar=tuple(CoeffCurve(tuple(r)) for r in ar),
            ma=tuple(CoeffCurve(tuple(r)) for r in ma),
            gamma=CoeffCurve(tuple(gam)),
            innovation=StableParams(alpha, self.beta, INNOVATION_SIGMA, 0.0),
        )

    def theta_of(self, model: TvArmaModel) -> ParamVector:
        lay = self.layout
        shape_ok = (
            model.p == lay.p
            and model.q == lay.q
            and all(c.degree == lay.ar_degree for c in model.ar)
            and all(c.degree == lay.ma_degree for c in model.ma)
            and model.gamma.degree == lay.gamma_degree
        )
        if not shape_ok:
            raise ValueError("model does not match the template layout")
        vals = [c for curve in model.ar for c in curve.coeffs]
        vals += [c for curve in model.ma for c in curve.coeffs]
        if self.alpha_free:
            vals.append(model.alpha)
        vals += list(model.gamma.coeffs)
        return self.vector(vals)

    def box_distance(self, theta) -> float:
        """Zero inside the feasible region, else a positive distance to it."""
        vals = theta.values if isinstance(theta, ParamVector) else np.asarray(theta, dtype=float)
        if not np.all(np.isfinite(vals)):
            return np.inf
        _, _, alpha, gam = self.layout.split(vals, self.alpha_free)
        dist = 0.0
        if alpha is not None:
            lo, hi = ALPHA_BOX
            if alpha <= lo:
                dist += lo - alpha + 1e-12
            elif alpha > hi:
                dist += alpha - hi
        gmin = self.layout.gamma_min(gam)
        if gmin <= 0.0:
            dist += -gmin + 1e-12
        return dist


@dataclass(frozen=True)
class AuxModelSpec:
    """Student-t tvARMA twin of a template; ``nu=None`` estimates the degrees of freedom."""

    layout: CurveLayout
    nu: float | None = 3.0

    @property
    def nu_free(self) -> bool:
        return self.nu is None

    @property
    def names(self) -> tuple[str, ...]:
        lay = self.layout
        mid = ["nu"] if self.nu_free else []
        return tuple(lay.ar_names + lay.ma_names + mid + lay.gamma_names)

    def vector(self, values) -> ParamVector:
        return ParamVector(self.names, values)

    @classmethod
    def for_template(cls, template: ModelTemplate) -> "AuxModelSpec":
        """The paired t model: nu free exactly when alpha is free, else nu = 3."""
        return cls(template.layout, None if template.alpha_free else 3.0)
