"""Online linear optimization on the simplex: continuous-time and discrete FTRL."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ctonline.errors import DomainError
from ctonline.legendre import ftrl_argmax
from ctonline.numerics import TimeGrid
from ctonline.report import BOUND_TOL, RegretReport, best_comparator
from ctonline.rewards import RewardPath

CONTINUOUS_BETA = 1e3
MAX_BETA = 1e6
CURVE_POINTS = 100


@dataclass(frozen=True)
class OloRunConfig:
    d: int
    T: float
    beta: float
    grid: TimeGrid
    path: RewardPath

    def __post_init__(self):
        if self.d < 2:
            raise DomainError(f"need d >= 2, got {self.d}")
        if not self.T > 0:
            raise DomainError(f"need T > 0, got {self.T}")
        if not 0 < self.beta <= MAX_BETA:
            raise DomainError(f"beta must lie in (0, {MAX_BETA:g}], got {self.beta}")
        if self.path.d != self.d or self.path.T != self.T or self.grid.T != self.T:
            raise DomainError("path, grid and config disagree on d or T")


def curve_indices(steps: int, points: int = CURVE_POINTS) -> np.ndarray:
    """Step counts at which the regret curve is sampled (at most ``points``, last = ``steps``)."""
    m = np.arange(1, points + 1)
    return np.unique(np.maximum(1, (m * steps) // points))


def regret_curve(comparator_cum: np.ndarray, learner_cum: np.ndarray, times: np.ndarray):
    """Pairs ``(t, max_a S_a(t) - L(t))`` from cumulative sums sampled at ``times``."""
    regret = comparator_cum.max(axis=1) - learner_cum
    return tuple((float(t), float(r)) for t, r in zip(times, regret))


def quadrature_slack(beta: float, grid: TimeGrid) -> float:
    """Extra regret the left-endpoint discretization may add on top of ``ln d / beta``.

    Treating each grid cell as one round of exponential weights with gains
    ``r(t_i) h`` in ``[0, h]`` gives the Hoeffding term ``beta h^2 / 8`` per cell.
    """
    return beta * grid.h * grid.T / 8.0


def run_continuous_ftrl(cfg: OloRunConfig) -> RegretReport:
    """Deterministic simulation of ``x(t) = grad G(s(t))`` on the grid."""
    grid = cfg.grid
    h = grid.h
    r = cfg.path.on_grid(grid)
    comparator_cum = np.cumsum(r, axis=0) * h
    # s(t_i) excludes the cell [t_i, t_{i+1}): the action never sees the reward it is paid
    s = np.vstack([np.zeros(cfg.d), comparator_cum[:-1]])
    x = ftrl_argmax(s, cfg.beta)
    learner_cum = np.cumsum(np.einsum("ij,ij->i", x, r)) * h

    totals = comparator_cum[-1]
    best = best_comparator(totals)
    regret = float(totals[best] - learner_cum[-1])
    bound = math.log(cfg.d) / cfg.beta
    slack = BOUND_TOL + quadrature_slack(cfg.beta, grid)
    idx = curve_indices(grid.steps) - 1
    return RegretReport(
        measured_regret=regret,
        theoretical_bound=bound,
        best_comparator_index=best,
        bound_violated=regret > bound + slack,
        slack=slack,
        curve=regret_curve(comparator_cum[idx], learner_cum[idx], (idx + 1) * h),
    )


def check_reward_rounds(rewards, d: int | None = None) -> np.ndarray:
    rewards = np.asarray(rewards, dtype=float)
    if rewards.ndim != 2 or rewards.shape[0] < 1:
        raise DomainError("rewards must be a (T_rounds, d) array with T_rounds >= 1")
    if d is not None and rewards.shape[1] != d:
        raise DomainError(f"rewards have {rewards.shape[1]} columns, expected {d}")
    if not np.all(np.isfinite(rewards)) or np.any(rewards < 0) or np.any(rewards > 1):
        raise DomainError("rewards must lie in [0, 1]^d")
    return rewards


def run_discrete_ftrl(d: int, T_rounds: int, beta: float, rewards) -> RegretReport:
    """Round-by-round FTRL with the entropic regularizer.

    The reported bound ``sqrt(2 T ln d)`` is the yardstick for the
    ``O(sqrt(T ln d))`` rate at ``beta = sqrt(2 ln d / T)``.
    """
    rewards = check_reward_rounds(rewards, d)
    if rewards.shape[0] != T_rounds:
        raise DomainError(f"expected {T_rounds} reward rounds, got {rewards.shape[0]}")
    comparator_cum = np.cumsum(rewards, axis=0)
    s = np.vstack([np.zeros(d), comparator_cum[:-1]])
    x = ftrl_argmax(s, beta)
    learner_cum = np.cumsum(np.einsum("ij,ij->i", x, rewards))

    totals = comparator_cum[-1]
    best = best_comparator(totals)
    regret = float(totals[best] - learner_cum[-1])
    bound = math.sqrt(2 * T_rounds * math.log(d)) if d > 1 else 0.0
    idx = curve_indices(T_rounds) - 1
    return RegretReport(
        measured_regret=regret,
        theoretical_bound=bound,
        best_comparator_index=best,
        bound_violated=regret > bound + BOUND_TOL,
        curve=regret_curve(comparator_cum[idx], learner_cum[idx], idx + 1.0),
    )


def beta_schedule_olo(d: int, T: float, mode: str = "discrete", continuous_beta: float = CONTINUOUS_BETA) -> float:
    """``sqrt(2 ln d / T)`` in discrete mode; a fixed large beta in continuous mode.

    In continuous time the bound ``ln d / beta`` shrinks as beta grows, so
    following the leader is optimal; ``continuous_beta`` stands in for that limit.
    """
    if d < 2 or not T > 0:
        raise DomainError(f"need d >= 2 and T > 0, got d = {d}, T = {T}")
    if mode == "discrete":
        return math.sqrt(2 * math.log(d) / T)
    if mode == "continuous":
        return float(continuous_beta)
    raise DomainError(f"mode must be 'discrete' or 'continuous', got {mode!r}")
