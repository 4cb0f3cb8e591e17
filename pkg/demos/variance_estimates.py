"""
Variance estimates near the boundaries
======================================

The baseline estimate y(1-y)/N vanishes at y=0 and y=1, giving infinite
weights. Jeffreys and Wilson stay positive.
"""
import numpy as np

from shotfit import variance_estimator_report

table = variance_estimator_report(shots=60, n_points=13)
print(f"{'y':>6}{'baseline':>12}{'jeffreys':>12}{'wilson':>12}")
for row in zip(table["y"], table["baseline"], table["jeffreys"], table["wilson"]):
    print("".join(f"{v:12.3e}" if i else f"{v:6.3f}" for i, v in enumerate(row)))

print("\nratio at the edge, jeffreys / wilson:", table["jeffreys"][0] / table["wilson"][0])
print("ratio at y=1/2:", table["jeffreys"][6] / table["wilson"][6])
