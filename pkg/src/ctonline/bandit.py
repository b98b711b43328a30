"""Adversarial multi-armed bandit: continuous-time SDE learner and discrete Exp3.

In continuous time the learner never sees ``r(t)``; its cumulative reward
estimate follows ``ds = r dt + sigma dB`` with ``sigma sigma^T`` the covariance
of the importance-weighted estimator, and it plays ``p(t) = grad G(s(t))``.
Regret uses ``p(t).r(t)`` in place of the sampled arm's reward, which has the
same expectation and less Monte Carlo noise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from ctonline.errors import DomainError
from ctonline.legendre import grad_G, hess_G_at
from ctonline.numerics import TimeGrid, path_uniforms
from ctonline.olo import check_reward_rounds, curve_indices, regret_curve
from ctonline.report import BOUND_TOL, RegretReport
from ctonline.rewards import RewardPath
from ctonline.sde import DEFAULT_BLOCK, floor_probabilities, mc_summary, simulate_block, simulate_paths

DEFAULT_P_FLOOR = 1e-6


def beta_schedule_bandit(d: int, T: float) -> float:
    """``sqrt(2 ln d / (d T))``, the temperature that balances ``ln d / beta`` and ``beta d T / 2``."""
    if d == 1:
        return 1.0  # any beta is optimal with a single arm
    return math.sqrt(2 * math.log(d) / (d * T))


def bandit_bound(d: int, T: float) -> float:
    return math.sqrt(2 * T * d * math.log(d))


@dataclass(frozen=True)
class BanditRunConfig:
    d: int
    T: float
    beta: float | str
    grid: TimeGrid
    path: RewardPath
    n_paths: int = 1000
    master_seed: int = 0
    p_floor: float = DEFAULT_P_FLOOR
    block_size: int = DEFAULT_BLOCK
    workers: int = 1

    def __post_init__(self):
        if self.beta == "auto":
            object.__setattr__(self, "beta", beta_schedule_bandit(self.d, self.T))
        if not (isinstance(self.beta, (int, float)) and self.beta > 0):
            raise DomainError(f"beta must be positive or 'auto', got {self.beta!r}")
        if self.d < 1 or self.path.d != self.d:
            raise DomainError(f"path dimension {self.path.d} does not match d = {self.d}")
        if self.path.T != self.T or self.grid.T != self.T:
            raise DomainError("path, grid and config disagree on T")
        if self.n_paths < 1:
            raise DomainError(f"n_paths must be >= 1, got {self.n_paths}")
        if not 0 < self.p_floor < 1 / self.d:
            raise DomainError(f"p_floor must lie in (0, 1/d), got {self.p_floor}")


def estimator_covariance(r, p, p_floor: float = 0.0) -> np.ndarray:
    """Covariance ``diag(r^2 / p) - r r^T`` of the one-hot importance-weighted estimate."""
    r = np.asarray(r, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0) or np.any(p < p_floor):
        raise DomainError(f"probabilities must be floored at {p_floor:g} before building Sigma")
    eye = np.eye(p.shape[-1])
    return (r * r / p)[..., :, None] * eye - r[..., :, None] * r[..., None, :]


def unbiasedness_check(r, p) -> np.ndarray:
    """``E[r_hat] - r``; the arm-a outcome ``(r_a / p_a) e_a`` has weight ``p_a``."""
    r = np.asarray(r, dtype=float)
    p = np.asarray(p, dtype=float)
    return p * (r / p) - r


def quadratic_variation(r, p, beta: float, covariance=estimator_covariance) -> float:
    """Ito correction rate ``tr(Sigma(r, p) hess G) / 2`` evaluated at ``grad G = p``."""
    return 0.5 * float(np.trace(covariance(r, p) @ hess_G_at(p, beta)))


def quadratic_variation_check(r, p, beta: float) -> float:
    """Same as :func:`quadratic_variation`; callers compare it with ``beta d / 2``."""
    return quadratic_variation(r, p, beta)


@dataclass(frozen=True)
class BanditModel:
    """Per-step maps for the engine in :mod:`ctonline.sde`."""

    d: int
    beta: float
    p_floor: float

    @property
    def noise_dim(self):
        return self.d

    @property
    def n_actions(self):
        return self.d

    def probabilities(self, s):
        return floor_probabilities(grad_G(s, self.beta), self.p_floor)

    def covariance(self, p, r):
        return estimator_covariance(r, p)

    def expected_reward(self, p, r):
        return p @ r


def _model(cfg: BanditRunConfig) -> BanditModel:
    return BanditModel(cfg.d, cfg.beta, cfg.p_floor)


def simulate_bandit_path(cfg: BanditRunConfig, path_index: int) -> dict:
    """Per-step record of one path: times, ``p(t_i)`` and ``p(t_i).r(t_i)``."""
    rewards = cfg.path.on_grid(cfg.grid)
    res = simulate_block(_model(cfg), rewards, cfg.grid.h, cfg.master_seed, [path_index],
                         [cfg.grid.steps], trace=True)
    return {"t": cfg.grid.times(), "p": res.trace_p, "expected_reward": res.trace_reward}


def write_trace_csv(record: dict, fh) -> None:
    """Write a path record as ``step,t,p_1..p_d,expected_reward`` rows."""
    d = record["p"].shape[1]
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["step", "t"] + [f"p_{a}" for a in range(1, d + 1)] + ["expected_reward"])
    for i, (t, p, er) in enumerate(zip(record["t"], record["p"], record["expected_reward"])):
        writer.writerow([i, repr(float(t))] + [repr(float(x)) for x in p] + [repr(float(er))])


def mc_report(comparator_cum, totals, at_ck, idx, h, bound, slack) -> RegretReport:
    estimate, stderr, best = mc_summary(comparator_cum[-1], totals)
    return RegretReport(
        measured_regret=estimate,
        theoretical_bound=bound,
        best_comparator_index=best,
        bound_violated=(estimate - 3 * stderr) > bound + slack,
        ci_halfwidth=1.96 * stderr,
        stderr=stderr,
        slack=slack,
        n_paths=totals.size,
        curve=regret_curve(comparator_cum[idx - 1], at_ck.mean(axis=0), idx * h),
    )


def run_continuous_bandit(cfg: BanditRunConfig) -> RegretReport:
    """Monte Carlo estimate of the continuous-time regret against ``sqrt(2 T d ln d)``."""
    grid = cfg.grid
    rewards = cfg.path.on_grid(grid)
    comparator_cum = np.cumsum(rewards, axis=0) * grid.h
    idx = curve_indices(grid.steps)
    totals, at_ck = simulate_paths(_model(cfg), rewards, grid.h, cfg.master_seed, cfg.n_paths,
                                   idx, block_size=cfg.block_size, workers=cfg.workers)
    bound = bandit_bound(cfg.d, cfg.T)
    slack = BOUND_TOL + grid.h * grid.T * cfg.d
    return mc_report(comparator_cum, totals, at_ck, idx, grid.h, bound, slack)


def sample_arms(p, u) -> np.ndarray:
    """Inverse-CDF draw of one arm per row of ``p`` from uniforms ``u``."""
    cdf = np.cumsum(p, axis=-1)
    return np.minimum((cdf < u[:, None] * cdf[:, -1:]).sum(axis=-1), p.shape[-1] - 1)


def run_discrete_exp3(d: int, T_rounds: int, beta: float | str, rewards,
                      n_episodes: int = 500, master_seed: int = 0) -> RegretReport:
    """Exp3 over ``n_episodes`` independent episodes against a fixed reward table."""
    rewards = check_reward_rounds(rewards, d)
    if rewards.shape[0] != T_rounds:
        raise DomainError(f"expected {T_rounds} reward rounds, got {rewards.shape[0]}")
    if beta == "auto":
        beta = beta_schedule_bandit(d, T_rounds)
    u = np.stack([path_uniforms(master_seed, e, 0, T_rounds, 1)[:, 0] for e in range(n_episodes)],
                 axis=1)
    rows = np.arange(n_episodes)
    s = np.zeros((n_episodes, d))
    acc = np.zeros(n_episodes)
    idx = curve_indices(T_rounds)
    ck_pos = {int(c): j for j, c in enumerate(idx)}
    at_ck = np.zeros((n_episodes, idx.size))
    for t in range(T_rounds):
        r = rewards[t]
        p = grad_G(s, beta)
        acc += p @ r
        if t + 1 in ck_pos:
            at_ck[:, ck_pos[t + 1]] = acc
        a = sample_arms(p, u[t])
        s[rows, a] += r[a] / p[rows, a]
    comparator_cum = np.cumsum(rewards, axis=0)
    bound = bandit_bound(d, T_rounds) if d > 1 else 0.0
    return mc_report(comparator_cum, acc, at_ck, idx, 1.0, bound, BOUND_TOL)
