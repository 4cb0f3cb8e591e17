"""
Amplitude error versus shot count
=================================

The OLS amplitude spread should fall like N^-1/2. Fit a line to the
log-log points and print its slope.
"""
from dataclasses import replace

import numpy as np

from shotfit import Scenario, run_scenario

base = Scenario(model="sine", theta=(0.48, 1.0, 1.0, 0.5), methods=("ols",), n_simulations=300, seed=11)
shots = np.array([50, 200, 800, 3200])
spread = []
for n in shots:
    report = run_scenario(replace(base, shots=int(n), seed=11 + int(n)))
    spread.append(report["ols"].stats.std[0])
    print(f"N={n:5d}  amplitude std {spread[-1]:.5f}")

slope = np.polyfit(np.log(shots), np.log(spread), 1)[0]
print(f"log-log slope {slope:.3f}")
