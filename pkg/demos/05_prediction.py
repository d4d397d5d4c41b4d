"""Minimum-dispersion forecasts for symmetric stable tvARMA models.

Run: python demos/05_prediction.py
"""

import numpy as np

from tvstable import TvArmaModel, predict, simulate

model = TvArmaModel.from_coeffs(ar=[[-0.2, -0.3]], gamma=[1.0, 0.5], alpha=1.7)
x = simulate(model, 400, rng=3)
f, d = predict(model, x, 6)
print("last observation", round(x[-1], 3))
for h, (fh, dh) in enumerate(zip(f, d), start=1):
    print(f"h={h}: forecast {fh:+.4f}, error dispersion {dh:.4f}")

# A tvMA(1) only remembers one shock, so forecasts vanish beyond one step.
ma = TvArmaModel.from_coeffs(ma=[[0.35, -0.6]], alpha=1.5)
f, _ = predict(ma, simulate(ma, 200, rng=4), 3)
print("tvMA(1) forecasts:", np.round(f, 4))
