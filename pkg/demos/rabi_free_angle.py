"""
Detecting an over-rotated pulse
===============================

Simulate a Rabi scan whose pulse angle is 1.05 pi, then fit the model with
the angle fixed at pi and with the angle free. The fixed model should show a
large model violation.
"""
import numpy as np

from shotfit import FitConfig, fit, rabi_model, sample_dataset, simulation_rng

truth_model = rabi_model(free_angle=True)
truth = [0.05, 0.9, 1.0, 0.0, 1.05 * np.pi]
x = np.linspace(-5, 5, 41)

fixed, free = rabi_model(), rabi_model(free_angle=True)
print(f"{'seed':>4}{'fixed n_sigma':>15}{'free n_sigma':>14}{'angle/pi':>10}")
for s in range(5):
    data = sample_dataset(truth_model, truth, x, 1000, simulation_rng(99, s))
    a = fit(fixed, data, FitConfig.from_label("mle:soft"))
    b = fit(free, data, FitConfig.from_label("mle:soft"))
    print(f"{s:4d}{a.n_sigma:15.2f}{b.n_sigma:14.2f}{b.theta[4] / np.pi:10.4f}")
