"""Monte Carlo scenarios and the preset library for the simulation tables."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .params import CurveLayout, ModelTemplate, ParamVector

__all__ = ["Scenario", "PRESETS", "ALIASES", "preset", "preset_names", "REDUCED", "FULL"]

REDUCED = {"R": 200, "S": 50}
FULL = {"R": 1000, "S": 100}
TABLE_T = (500, 1000, 1500)


@dataclass(frozen=True)
class Scenario:
    """One design point: a model template, its true parameters and the MC budget.

    ``template`` fixes the role of alpha: a number means known alpha, None
    means alpha is part of theta (and of ``theta_true``).
    """

    id: str
    template: ModelTemplate
    theta_true: tuple[float, ...]
    T: int = 500
    R: int = 200
    S: int = 50
    methods: tuple[str, ...] = ("indirect", "bwe")
    burn_in: int = 500
    title: str = ""

    def __post_init__(self):
        if self.T < 3:
            raise ValueError("T must be at least 3")
        if self.R < 1:
            raise ValueError("R must be at least 1")
        if self.S < 1:
            raise ValueError("S must be at least 1")
        if len(self.theta_true) != len(self.template.names):
            raise ValueError(
                f"theta_true has {len(self.theta_true)} entries, template expects {len(self.template.names)}"
            )
        bad = set(self.methods) - {"indirect", "bwe"}
        if bad:
            raise ValueError(f"unknown methods: {sorted(bad)}")

    @property
    def theta_vector(self) -> ParamVector:
        return self.template.vector(self.theta_true)

    def with_(self, **changes) -> "Scenario":
        return replace(self, **changes)


def _known(layout, alpha, beta):
    return ModelTemplate(layout, alpha=alpha, beta=beta)


def _free(layout, beta):
    return ModelTemplate(layout, alpha=None, beta=beta)


_AR1 = CurveLayout(p=1, q=0, ar_degree=1, gamma_degree=0)
_MA1 = CurveLayout(p=0, q=1, ma_degree=1, gamma_degree=0)
_ARMA11 = CurveLayout(p=1, q=1, ar_degree=1, ma_degree=1, gamma_degree=0)
_AR1_LINEAR_SCALE = CurveLayout(p=1, q=0, ar_degree=1, gamma_degree=1)

PRESETS: dict[str, Scenario] = {
    "table1": Scenario(
        "table1",
        _known(_AR1, 1.9, 0.9),
        (-0.3, 0.8, 1.0),
        title="stable tvAR(1), alpha=1.9, beta=0.9 known",
    ),
    "table3": Scenario(
        "table3",
        _known(_MA1, 1.1, -0.2),
        (0.35, -0.6, 1.2),
        title="stable tvMA(1), alpha=1.1, beta=-0.2 known",
    ),
    "table5": Scenario(
        "table5",
        _known(_ARMA11, 1.8, 0.3),
        (-0.4, 0.1, 0.1, 0.3, 1.0),
        title="stable tvARMA(1,1), alpha=1.8, beta=0.3 known",
    ),
    "table7": Scenario(
        "table7",
        _free(_AR1_LINEAR_SCALE, 0.0),
        (0.35, -0.6, 1.4, 0.5, 0.1),
        methods=("indirect",),
        title="stable tvAR(1), alpha unknown, beta=0 known, linear scale",
    ),
    "table8": Scenario(
        "table8",
        _free(_MA1, 0.2),
        (-0.35, 0.4, 1.75, 0.7),
        methods=("indirect",),
        title="stable tvMA(1), alpha unknown, beta=0.2 known",
    ),
    "table9": Scenario(
        "table9",
        _free(_ARMA11, 0.0),
        (-0.2, -0.4, 0.2, 0.3, 1.3, 1.1),
        methods=("indirect",),
        title="stable tvARMA(1,1), alpha unknown, beta=0 known",
    ),
}

# The kurtosis/skewness tables are views of the same replications.
ALIASES = {"table2": "table1", "table4": "table3", "table6": "table5", "table10": "table9"}


def preset_names() -> list[str]:
    return sorted(PRESETS) + sorted(ALIASES)


def preset(name: str, full_scale: bool = False, **overrides) -> Scenario:
    """Look up a preset (aliases allowed) at reduced or full scale."""
    key = ALIASES.get(name, name)
    if key not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {preset_names()}")
    scale = FULL if full_scale else REDUCED
    return PRESETS[key].with_(**{**scale, **overrides})
