"""Stable tvARMA processes: sampling, simulation, indirect inference and diagnostics."""

__version__ = "0.1.0"

from .stable import StableParams, char_fn, ecf_estimate, empirical_cdf, sample, sample_standard
from .tvarma import (
    CoeffCurve,
    MaWeights,
    NotRegularError,
    SimulationError,
    TvArmaModel,
    green_function,
    innovations_from_path,
    ma_weights,
    marginal_law,
    predict,
    simulate,
)
from .params import AuxModelSpec, CurveLayout, ModelTemplate, ParamVector
from .auxfit import AuxFitResult, neg_cond_loglik
from .indirect import IndirectConfig, IndirectResult, binding, estimate, estimate_unknown_alpha
from .whittle import BweConfig, BweResult, bwe_fit, local_periodogram
from .scenarios import Scenario, preset
from .analysis import (
    McResult,
    error_metrics,
    fit_errors,
    residual_moments,
    run_mc,
    stabilized_pp,
    variogram,
)

__all__ = [
    "__version__",
    "StableParams",
    "char_fn",
    "ecf_estimate",
    "empirical_cdf",
    "sample",
    "sample_standard",
    "CoeffCurve",
    "MaWeights",
    "NotRegularError",
    "SimulationError",
    "TvArmaModel",
    "green_function",
    "innovations_from_path",
    "ma_weights",
    "marginal_law",
    "predict",
    "simulate",
    "AuxModelSpec",
    "CurveLayout",
    "ModelTemplate",
    "ParamVector",
    "AuxFitResult",
    "neg_cond_loglik",
    "IndirectConfig",
    "IndirectResult",
    "binding",
    "estimate",
    "estimate_unknown_alpha",
    "BweConfig",
    "BweResult",
    "bwe_fit",
    "local_periodogram",
    "Scenario",
    "preset",
    "McResult",
    "error_metrics",
    "fit_errors",
    "residual_moments",
    "run_mc",
    "stabilized_pp",
    "variogram",
]
