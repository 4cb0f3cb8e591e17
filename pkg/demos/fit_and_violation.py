"""
Fitting one simulated sine dataset
==================================

Draw 60 shots at each of 23 points, fit with every method and compare the
estimates and the model violation of each fit.
"""
import numpy as np

from shotfit import FitConfig, fit, sample_dataset, simulation_rng, sine_model

model = sine_model()
truth = np.array([0.48, 1.0, 1.0, 0.5])
x = np.linspace(0, 4, 23)

data = sample_dataset(model, truth, x, 60, simulation_rng(2024, 0))
print("fractions:", np.round(data.y, 3))

# amplitude 0.48 with offset 0.5 reaches within 0.02 of the boundary
labels = ["ols", "wls:jeffreys", "wls:wilson", "wls:prediction", "irls", "mle:soft", "mle:hard", "chi2"]
print(f"\n{'method':<16}{'amplitude':>10}{'frequency':>10}{'phase':>8}{'offset':>8}{'n_sigma':>9}")
for label in labels:
    res = fit(model, data, FitConfig.from_label(label))
    a, f, ph, c = res.theta
    print(f"{label:<16}{a:10.4f}{f:10.4f}{ph:8.3f}{c:8.4f}{res.n_sigma:9.2f}")

# the largest prediction of each fit, relative to the physical limit
for label in ("ols", "mle:soft", "mle:hard"):
    res = fit(model, data, FitConfig.from_label(label))
    print(f"{label:<10} max prediction {res.predictions.max():.6f}")
