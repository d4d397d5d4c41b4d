import json

import numpy as np
import pytest

from tvstable.indirect import (
    PENALTY,
    Binding,
    IndirectConfig,
    binding,
    estimate,
    estimate_unknown_alpha,
    initial_theta,
)
from tvstable.params import AuxModelSpec, CurveLayout, ModelTemplate
from tvstable.tvarma import simulate

AR1 = CurveLayout(p=1, ar_degree=1, gamma_degree=0)
KNOWN = ModelTemplate(AR1, alpha=1.9, beta=0.9)
THETA = (-0.3, 0.8, 1.0)


@pytest.fixture(scope="module")
def table1_series():
    return simulate(KNOWN.build(THETA), 500, rng=31)


def test_binding_is_bit_identical():
    cfg = IndirectConfig(S=5, seed=3)
    aux = AuxModelSpec.for_template(KNOWN)
    a = binding(THETA, cfg, KNOWN, aux, 300)
    b = binding(THETA, cfg, KNOWN, aux, 300)
    assert np.array_equal(a.values, b.values)
    c = binding(THETA, IndirectConfig(S=5, seed=4), KNOWN, aux, 300)
    assert not np.array_equal(a.values, c.values)


def test_binding_reuses_draws_across_theta():
    cfg = IndirectConfig(S=3, seed=9)
    bind = Binding(KNOWN, AuxModelSpec.for_template(KNOWN), 200, cfg, AuxModelSpec.for_template(KNOWN).vector([0, 0, 1]))
    p1 = bind.simulate(THETA)
    p2 = bind.simulate((-0.3, 0.8, 2.0))
    assert np.allclose(p2, 2.0 * p1, rtol=1e-12)


def test_gaussian_white_noise_gives_large_nu():
    tmpl = ModelTemplate(CurveLayout(p=0, q=0), alpha=None)
    lam = binding((2.0, 1.0), IndirectConfig(S=20, seed=1), tmpl, AuxModelSpec.for_template(tmpl), 500)
    assert lam["nu"] > 20
    assert lam["gamma_0"] == pytest.approx(1.0, abs=0.05)


def test_binding_tracks_scale():
    aux = AuxModelSpec.for_template(KNOWN)
    cfg = IndirectConfig(S=10, seed=2)
    lo = binding((-0.3, 0.8, 0.5), cfg, KNOWN, aux, 400)
    hi = binding((-0.3, 0.8, 1.5), cfg, KNOWN, aux, 400)
    assert hi["gamma_0"] == pytest.approx(3.0 * lo["gamma_0"], rel=1e-4)
    assert np.allclose(hi.values[:2], lo.values[:2], atol=1e-4)


def test_infeasible_theta_rejected():
    aux = AuxModelSpec.for_template(KNOWN)
    with pytest.raises(ValueError):
        binding((-0.3, 0.8, -1.0), IndirectConfig(S=2), KNOWN, aux, 100)
    with pytest.raises(ValueError):
        binding((-3.0, 0.0, 1.0), IndirectConfig(S=2), KNOWN, aux, 800)


def test_binding_variance_shrinks_with_S():
    aux = AuxModelSpec.for_template(KNOWN)

    def spread(S):
        lams = [binding(THETA, IndirectConfig(S=S, seed=s), KNOWN, aux, 300).values for s in range(12)]
        return np.var(lams, axis=0, ddof=1).sum()

    assert spread(4) > 3.0 * spread(32)


def test_estimate_recovers_table1_curve(table1_series):
    res = estimate(table1_series, IndirectConfig(S=20, seed=5), KNOWN)
    assert res.converged
    assert np.allclose(res.theta.values, THETA, atol=0.3)
    assert res.Q < 1e-6


def test_estimate_is_reproducible(table1_series):
    cfg = IndirectConfig(S=5, seed=11, max_iter=60)
    a = estimate(table1_series, cfg, KNOWN)
    b = estimate(table1_series, cfg, KNOWN)
    assert a.to_json() == b.to_json()


def test_audit_trail(table1_series):
    res = estimate(table1_series, IndirectConfig(S=5, seed=12, max_iter=40), KNOWN)
    assert len(res.trace) == res.n_eval
    assert res.Q == min(q for _, q in res.trace)
    assert np.allclose(res.lam_sim.values, res.lam_hat.values - 0.0, atol=np.sqrt(res.Q) + 1e-12)
    d = res.to_dict(include_trace=True)
    assert len(d["trace"]) == res.n_eval and "wall_time" not in d
    assert "wall_time" in res.to_dict(include_timing=True)
    json.loads(res.to_json())


def test_penalty_on_infeasible_steps(table1_series):
    # the first simplex vertex steps alpha from 1.99 past the upper bound of 2
    free = ModelTemplate(AR1, alpha=None, beta=0.9)
    theta0 = free.vector([-0.3, 0.8, 1.99, 1.0])
    res = estimate_unknown_alpha(table1_series, IndirectConfig(S=3, seed=13, max_iter=15), free, theta0=theta0)
    assert any(q >= PENALTY for _, q in res.trace)
    assert res.Q < PENALTY
    assert 0.2 < res.theta["alpha"] <= 2.0


def test_infeasible_start(table1_series):
    with pytest.raises(ValueError):
        estimate(table1_series, IndirectConfig(S=2), KNOWN, theta0=KNOWN.vector([0.0, 0.0, -1.0]))


def test_dimension_checks(table1_series):
    free = ModelTemplate(AR1, alpha=None)
    with pytest.raises(ValueError, match="dim"):
        estimate(table1_series, IndirectConfig(S=2), free, AuxModelSpec(AR1, nu=3.0))
    with pytest.raises(ValueError, match="layout"):
        estimate(table1_series, IndirectConfig(S=2), KNOWN, AuxModelSpec(CurveLayout(p=2), nu=3.0))
    with pytest.raises(ValueError):
        estimate_unknown_alpha(table1_series, IndirectConfig(S=2), KNOWN)


def test_initial_theta_inserts_alpha():
    tmpl = ModelTemplate(AR1, alpha=None)
    lam = AuxModelSpec.for_template(tmpl).vector([0.1, 0.2, 4.0, 1.3])
    th = initial_theta(tmpl, lam, alpha0=1.6)
    assert th.as_dict() == {"ar1_0": 0.1, "ar1_1": 0.2, "alpha": 1.6, "gamma_0": 1.3}


def test_config_validation():
    with pytest.raises(ValueError):
        IndirectConfig(S=0)
    with pytest.raises(ValueError):
        IndirectConfig(burn_in=-1)


def test_binding_variance_at_spec_sizes():
    aux = AuxModelSpec.for_template(KNOWN)

    def spread(S):
        lams = [binding(THETA, IndirectConfig(S=S, seed=100 + s), KNOWN, aux, 500).values for s in range(10)]
        return np.var(lams, axis=0, ddof=1).sum()

    v10, v50, v100 = spread(10), spread(50), spread(100)
    assert v100 < v10 and v50 < v10


def test_self_binding_fixed_point():
    # with S = 1 the data set is exactly the path the binding simulates at theta0
    cfg = IndirectConfig(S=1, seed=21)
    aux = AuxModelSpec.for_template(KNOWN)
    theta0 = KNOWN.vector(THETA)
    x = Binding(KNOWN, aux, 500, cfg, aux.vector([0.0, 0.0, 1.0])).simulate(theta0)[0]
    res = estimate(x, cfg, KNOWN, theta0=theta0)
    assert res.Q < 1e-10
    assert np.allclose(res.theta.values, THETA, atol=5e-3)
