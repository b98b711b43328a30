"""Continuous-time FTRL on the simplex.

Integrates the entropic FTRL learner against a few reward paths and
compares the regret with ln d / beta. Run: python demos/olo_ftrl.py
"""

import math

from ctonline.numerics import TimeGrid
from ctonline.olo import OloRunConfig, run_continuous_ftrl
from ctonline.rewards import builtin_adversaries, constant_path

# Two arms, the first always pays 1. Regret has a closed form here.
T = 10.0
rep = run_continuous_ftrl(OloRunConfig(2, T, 1.0, TimeGrid(T, 100_000), constant_path([1.0, 0.0], T)))
print("two arms, r = (1, 0), beta = 1")
print(f"  measured     {rep.measured_regret:.6f}")
print(f"  closed form  {math.log(2) - math.log1p(math.exp(-T)):.6f}")
print(f"  bound ln 2   {rep.theoretical_bound:.6f}")

# Larger beta means a sharper learner and a smaller bound.
d, T = 10, 5.0
grid = TimeGrid(T, 50_000)
print(f"\nd = {d}, T = {T}: regret against each built-in adversary")
print(f"{'beta':>6}  {'bound':>8}  " + "  ".join(f"{k:>18}" for k in builtin_adversaries(d, T)))
for beta in (1.0, 10.0, 100.0):
    regrets = [run_continuous_ftrl(OloRunConfig(d, T, beta, grid, path)).measured_regret
               for path in builtin_adversaries(d, T).values()]
    print(f"{beta:>6g}  {math.log(d) / beta:>8.4f}  " + "  ".join(f"{r:>18.4f}" for r in regrets))

# The curve is sampled on 100 points, whatever the step count.
rep = run_continuous_ftrl(OloRunConfig(d, T, 10.0, grid, builtin_adversaries(d, T)["piecewise_constant"]))
print("\nregret curve, every 20th point:")
for t, r in rep.curve[19::20]:
    print(f"  t = {t:5.2f}  regret = {r:+.4f}")
