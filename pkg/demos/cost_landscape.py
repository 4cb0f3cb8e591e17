"""
Shape of the cost along one axis
================================

Scan the offset of a decay whose early points are measured at exactly one.
Clipping the logarithm leaves a flat stretch; the Taylor-extended logarithm
keeps a slope that an optimizer can follow.
"""
import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from shotfit import cost_landscape, exponential_model, sample_dataset, simulation_rng

model = exponential_model()
theta = np.array([0.9, 0.05, 1.0])
x = np.linspace(0, 4, 23)
data = sample_dataset(model, theta, x, 100, simulation_rng(5, 0))

values = np.linspace(0.8, 1.2, 81)
fig, ax = plt.subplots()
for kind in ("mle", "mle_clip"):
    table = cost_landscape(model, data, kind, theta, 0, values)
    ax.plot(table["value"], table["cost"], label=kind)
    flat = np.sum(np.diff(table["cost"]) == 0)
    print(f"{kind:<9} flat steps: {flat}")
ax.set_xlabel("offset")
ax.set_ylabel("cost")
ax.legend()
fig.savefig("cost_landscape.svg")
print("wrote cost_landscape.svg")
