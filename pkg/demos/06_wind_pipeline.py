"""The real-data pipeline on a synthetic series: tvAR(4) fit, residual checks.

Users supply their own CSV in practice; here a tvAR(4) with known alpha = 1.34
stands in for the data.

Run: python demos/06_wind_pipeline.py   (a few seconds)
"""

import numpy as np

from tvstable import CurveLayout, IndirectConfig, ModelTemplate, StableParams, estimate, simulate
from tvstable.analysis import fit_errors, residual_moments, stabilized_pp, variogram
from tvstable.tvarma import innovations_from_path

template = ModelTemplate(CurveLayout(p=4, ar_degree=1, gamma_degree=1), alpha=1.34, beta=0.0)
truth = [-0.9, 0.2, 0.3, -0.1, -0.1, 0.0, 0.05, 0.0, 0.02, 0.01]
x = simulate(template.build(truth), 1000, rng=11)

print("variogram of the first difference:", np.round(variogram(np.diff(x), 5), 3))

res = estimate(x, IndirectConfig(S=10, seed=5, max_iter=300), template)
print("free parameters:", ", ".join(res.theta.names))
model = template.build(res.theta)
eps = innovations_from_path(model, x)
mom = residual_moments(eps)
print(f"residual skewness {mom.skewness:.2f}, kurtosis {mom.kurtosis:.1f}, JB p-value {mom.jb_pvalue:.1e}")
pp = stabilized_pp(eps, StableParams(1.34, 0.0, 2**-0.5), n_ref=200_000)
print(f"stabilized p-p max deviation against S_1.34: {pp.max_deviation:.3f}")
print("fit errors:", {k: round(v, 4) for k, v in fit_errors(x, model).as_dict().items()})
