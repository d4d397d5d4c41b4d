"""Time-varying ARMA paths, MA(inf) weights and the marginal law.

Run: python demos/02_tvarma_paths.py
"""

import numpy as np

from tvstable import TvArmaModel, ma_weights, marginal_law, simulate
from tvstable.tvarma import frozen_ma_weights

# A tvAR(1) whose AR curve alpha_1(u) = -0.2 + 0.6u drifts from
# persistence (phi = 0.2) to anti-persistence (phi = -0.4).
model = TvArmaModel.from_coeffs(ar=[[-0.2, 0.6]], gamma=1.0, alpha=1.7)
x = simulate(model, 1000, rng=7)
first, last = x[:300], x[-300:]
lag1 = lambda s: np.corrcoef(s[:-1], s[1:])[0, 1]
print(f"lag-1 correlation early {lag1(first):+.2f}, late {lag1(last):+.2f}")
print(f"largest spike {np.max(np.abs(x)):.1f} (infinite variance shows up as rare bursts)")

# The MA(inf) weights at t come from products of companion matrices.
w = ma_weights(model, 500, 1000)
print("a_{500,1000}(0..4) =", np.round(w.weights[:5], 4), f"tail bound {w.truncation_error_bound:.1e}")

# Locally the process looks like the stationary AR(1) frozen at u = t/T.
frozen = frozen_ma_weights(model, 0.5, J=len(w.weights) - 1)
print(f"max gap to frozen weights: {np.max(np.abs(w.weights - frozen)):.2e}")

# X_t is itself stable: the weights give its scale and skewness.
skewed = TvArmaModel.from_coeffs(ar=[[-0.5]], alpha=1.5, beta=0.5)
law = marginal_law(ma_weights(skewed, 200, 200), skewed.innovation)
print(f"marginal law of X_t: alpha={law.alpha} sigma*={law.sigma:.4f} beta*={law.beta:.4f}")
