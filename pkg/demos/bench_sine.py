"""
Bias and spread of the estimators
=================================

Run the bundled sine scenario with fewer simulations and print the
per-parameter bias and standard deviation of each method. Pass a number on
the command line to change the ensemble size.
"""
import sys
from dataclasses import replace

from shotfit import bundled_scenario, run_scenario

n_sims = int(sys.argv[1]) if len(sys.argv) > 1 else 300
scenario = replace(bundled_scenario("sine"), n_simulations=n_sims)
report = run_scenario(scenario)

names = scenario.model_spec.param_names
print(f"{n_sims} simulations, truth {scenario.theta}, N={scenario.shots}\n")
print(f"{'method':<16}" + "".join(f"{n + ' bias':>16}" for n in names) + f"{'conv':>7}")
for row in report.methods:
    s = row.stats
    cells = "".join(f"{b:+9.4f}±{e:.4f}" for b, e in zip(s.bias, s.bias_se))
    print(f"{row.label:<16}{cells}{row.convergence_rate:7.2f}")

print(f"\n{'method':<16}" + "".join(f"{n + ' std':>16}" for n in names))
for row in report.methods:
    print(f"{row.label:<16}" + "".join(f"{v:16.4f}" for v in row.stats.std))
