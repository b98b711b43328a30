"""Linear bandit over a finite arm set.

Probabilities are the softmax of beta <a, s> over arms a; the estimator
inverts the design matrix Q = sum_a p_a a a^T. With the standard basis as arm
set the problem is the ordinary bandit, path for path.
Run: python demos/linear_bandit.py
"""

import numpy as np

from ctonline.bandit import BanditRunConfig, run_continuous_bandit
from ctonline.linbandit import (
    LinBanditRunConfig,
    basis_arms,
    design_matrix_Q,
    linear_unbiasedness_check,
    random_arm_set,
    run_continuous_linbandit,
)
from ctonline.numerics import TimeGrid
from ctonline.rewards import constant_path

arms = random_arm_set(16, 3, seed=0)
p = np.full(arms.k, 1 / arms.k)
print("16 random arms in R^3, l1 norms:", np.round(np.abs(arms.A).sum(axis=1), 2))
print("condition number of Q at uniform p:", f"{np.linalg.cond(design_matrix_Q(arms, p)):.2f}")
print("unbiasedness residual:", np.abs(linear_unbiasedness_check(arms, p, np.array([1.0, 0.5, 0.0]))).max())

T = 10.0
grid = TimeGrid(T, 2000)
path = constant_path([1.0, 0.5, 0.0], T)
rep = run_continuous_linbandit(LinBanditRunConfig(arms, T, "auto", grid, path, n_paths=200))
print(f"\nregret {rep.measured_regret:.3f} +- {rep.ci_halfwidth:.3f}, bound {rep.theoretical_bound:.3f}")
print("best arm:", rep.best_comparator_index, np.round(arms.A[rep.best_comparator_index], 3))

lin = run_continuous_linbandit(LinBanditRunConfig(basis_arms(3), T, "auto", grid, path, n_paths=200))
ban = run_continuous_bandit(BanditRunConfig(3, T, "auto", grid, path, n_paths=200))
print(f"\nbasis arms {lin.measured_regret:.10f}")
print(f"bandit     {ban.measured_regret:.10f}")
