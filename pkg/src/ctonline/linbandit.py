"""Adversarial linear bandit over a finite arm set in R^d.

The state ``s`` lives in R^d and the learner plays ``p = grad G(A s)`` on the
k arms, where the rows of ``A`` are the arm features. Reward estimates are
``Q^-1 a (a.r)`` with the design matrix ``Q = sum_a p_a a a^T``.

Arm-set CSV format: header ``a_1,...,a_d``, then one arm per row.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from ctonline.bandit import mc_report, sample_arms
from ctonline.errors import ConditionError, DomainError, ScheduleError
from ctonline.legendre import grad_G, hess_G_at
from ctonline.numerics import TimeGrid, path_uniforms
from ctonline.olo import check_reward_rounds, curve_indices
from ctonline.report import BOUND_TOL, RegretReport
from ctonline.rewards import RewardPath
from ctonline.sde import DEFAULT_BLOCK, floor_probabilities, simulate_paths

MAX_CONDITION = 1e12
NORM_TOL = 1e-12
DEFAULT_P_FLOOR = 1e-6


@dataclass(frozen=True)
class ArmSet:
    """``k x d`` matrix whose rows are arms with ``||a||_1 <= 1`` spanning R^d."""

    A: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.size == 0:
            raise DomainError("arm set must be a non-empty k x d matrix")
        if not np.all(np.isfinite(A)):
            raise DomainError("arm set has non-finite entries")
        k, d = A.shape
        norms = np.abs(A).sum(axis=1)
        if np.any(norms > 1 + NORM_TOL):
            bad = int(np.argmax(norms))
            raise DomainError(f"arm {bad} has l1 norm {norms[bad]:.6g} > 1")
        if k < d:
            raise DomainError(f"need k >= d arms, got k = {k}, d = {d}")
        rank = np.linalg.matrix_rank(A)
        if rank < d:
            raise DomainError(f"arms span a {rank}-dimensional subspace, need rank d = {d}")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @property
    def k(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.A.shape[1]


def basis_arms(d: int) -> ArmSet:
    return ArmSet(np.eye(d))


def random_arm_set(k: int, d: int, seed: int = 0) -> ArmSet:
    """``k`` Gaussian arms rescaled to l1 norms in [0.5, 1].

    The first ``d`` arms are pushed towards the coordinate axes so the set
    always spans R^d.
    """
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((k, d))
    A[:d] += 3.0 * np.eye(d)
    A *= rng.uniform(0.5, 1.0, size=(k, 1)) / np.abs(A).sum(axis=1, keepdims=True)
    return ArmSet(A)


def load_arms(text: str) -> ArmSet:
    """Parse arm-set CSV text; rejects norms above 1 and rank-deficient sets."""
    rows = [(n, r) for n, r in enumerate(csv.reader(io.StringIO(text)), start=1)
            if any(c.strip() for c in r)]
    if not rows:
        raise ScheduleError("empty arm file: missing header 'a_1,...,a_d'")
    header = [c.strip() for c in rows[0][1]]
    d = len(header)
    if header != [f"a_{i}" for i in range(1, d + 1)]:
        raise ScheduleError(f"header must be 'a_1,...,a_d', got {','.join(header)!r}", row=1)
    arms = []
    for lineno, row in rows[1:]:
        if len(row) != d:
            raise ScheduleError(f"expected {d} cells, got {len(row)}", row=lineno)
        try:
            a = [float(c) for c in row]
        except ValueError:
            raise ScheduleError(f"non-numeric cell in {row!r}", row=lineno) from None
        if sum(abs(x) for x in a) > 1 + NORM_TOL:
            raise ScheduleError(f"arm has l1 norm {sum(abs(x) for x in a):.6g} > 1", row=lineno)
        arms.append(a)
    if not arms:
        raise ScheduleError("arm file has no arms")
    try:
        return ArmSet(np.array(arms))
    except DomainError as exc:
        raise ScheduleError(str(exc)) from None


def dump_arms(arms: ArmSet) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([f"a_{i}" for i in range(1, arms.d + 1)])
    for a in arms.A:
        writer.writerow([repr(float(x)) for x in a])
    return out.getvalue()


def _matrix(arms) -> np.ndarray:
    # raw arrays are accepted so the step loop can skip ArmSet validation
    return arms.A if isinstance(arms, ArmSet) else np.asarray(arms, dtype=float)


def design_matrix_Q(arms: ArmSet, p) -> np.ndarray:
    """``sum_a p_a a a^T``; ``p`` may be stacked over paths."""
    A = _matrix(arms)
    p = np.asarray(p, dtype=float)
    return np.einsum("...k,ki,kj->...ij", p, A, A)


def _check_condition(Q) -> None:
    lam = np.linalg.eigvalsh(Q)
    lo, hi = lam[..., 0], lam[..., -1]
    bad = ~(lo > 0) | (hi > MAX_CONDITION * lo)
    if np.any(bad):
        worst = np.max(np.where(lo > 0, hi / np.where(lo > 0, lo, 1.0), np.inf))
        raise ConditionError(
            f"design matrix Q is singular or ill-conditioned (condition {worst:.3g} > "
            f"{MAX_CONDITION:g}); raise p_floor or the exploration rate"
        )


def solve_Q(Q, b) -> np.ndarray:
    """``Q^-1 b`` after checking the condition number of every ``Q``."""
    _check_condition(Q)
    return np.linalg.solve(Q, b)


def linear_estimator_covariance(arms: ArmSet, p, r) -> np.ndarray:
    """``sum_a p_a (a.r)^2 Q^-1 a a^T Q^-1 - r r^T``, the covariance of ``Q^-1 a (a.r)``."""
    A = _matrix(arms)
    p = np.asarray(p, dtype=float)
    r = np.asarray(r, dtype=float)
    Q = design_matrix_Q(arms, p)
    w = p * (A @ r) ** 2
    M = np.einsum("...k,ki,kj->...ij", w, A, A)
    X = solve_Q(Q, M)  # Q^-1 M
    S = np.linalg.solve(Q, np.swapaxes(X, -1, -2))  # Q^-1 M Q^-1, up to round-off symmetry
    S = 0.5 * (S + np.swapaxes(S, -1, -2))
    return S - r[..., :, None] * r[..., None, :]


def linear_unbiasedness_check(arms: ArmSet, p, r) -> np.ndarray:
    """``E[Q^-1 a (a.r)] - r`` under ``a ~ p``."""
    A = _matrix(arms)
    p = np.asarray(p, dtype=float)
    r = np.asarray(r, dtype=float)
    mean_term = np.einsum("...k,ki->...i", p * (A @ r), A)
    return solve_Q(design_matrix_Q(arms, p), mean_term[..., None])[..., 0] - r


def linear_quadratic_variation(arms: ArmSet, p, r, beta: float) -> float:
    """``tr(A Sigma A^T hess G) / 2`` with ``hess G`` evaluated on the k arms at ``p``."""
    A = _matrix(arms)
    sigma = linear_estimator_covariance(arms, p, r)
    return 0.5 * float(np.trace(A @ sigma @ A.T @ hess_G_at(p, beta)))


def q_identity_residuals(arms: ArmSet, p) -> tuple[float, float]:
    """Max deviations of ``A^T diag(p) A`` and ``sum_a a p_a a^T`` from ``Q``."""
    A = _matrix(arms)
    p = np.asarray(p, dtype=float)
    Q = design_matrix_Q(arms, p)
    via_matrix = A.T @ np.diag(p) @ A
    via_sum = sum(p[i] * np.outer(A[i], A[i]) for i in range(A.shape[0]))
    return float(np.abs(via_matrix - Q).max()), float(np.abs(via_sum - Q).max())


def beta_schedule_linbandit(k: int, d: int, T: float) -> float:
    """``sqrt(2 ln k / (d T))``."""
    if k == 1:
        return 1.0
    return math.sqrt(2 * math.log(k) / (d * T))


def linbandit_bound(k: int, d: int, T: float) -> float:
    return math.sqrt(2 * T * d * math.log(k))


@dataclass(frozen=True)
class LinBanditModel:
    A: np.ndarray
    beta: float
    p_floor: float

    @property
    def noise_dim(self):
        return self.A.shape[1]

    @property
    def n_actions(self):
        return self.A.shape[0]

    def probabilities(self, s):
        return floor_probabilities(grad_G(s @ self.A.T, self.beta), self.p_floor)

    def covariance(self, p, r):
        return linear_estimator_covariance(self.A, p, r)

    def expected_reward(self, p, r):
        return p @ (self.A @ r)


@dataclass(frozen=True)
class LinBanditRunConfig:
    arms: ArmSet
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
            object.__setattr__(self, "beta", beta_schedule_linbandit(self.arms.k, self.arms.d, self.T))
        if not (isinstance(self.beta, (int, float)) and self.beta > 0):
            raise DomainError(f"beta must be positive or 'auto', got {self.beta!r}")
        if self.path.d != self.arms.d:
            raise DomainError(f"path dimension {self.path.d} does not match arm dimension {self.arms.d}")
        if self.path.T != self.T or self.grid.T != self.T:
            raise DomainError("path, grid and config disagree on T")
        if self.n_paths < 1:
            raise DomainError(f"n_paths must be >= 1, got {self.n_paths}")
        if not 0 < self.p_floor < 1 / self.arms.k:
            raise DomainError(f"p_floor must lie in (0, 1/k), got {self.p_floor}")


def run_continuous_linbandit(cfg: LinBanditRunConfig) -> RegretReport:
    """Monte Carlo estimate of the continuous-time regret against ``sqrt(2 T d ln k)``."""
    grid = cfg.grid
    A = cfg.arms.A
    rewards = cfg.path.on_grid(grid)
    comparator_cum = np.cumsum(rewards @ A.T, axis=0) * grid.h
    idx = curve_indices(grid.steps)
    model = LinBanditModel(A, cfg.beta, cfg.p_floor)
    totals, at_ck = simulate_paths(model, rewards, grid.h, cfg.master_seed, cfg.n_paths, idx,
                                   block_size=cfg.block_size, workers=cfg.workers)
    bound = linbandit_bound(cfg.arms.k, cfg.arms.d, cfg.T) if cfg.arms.k > 1 else 0.0
    slack = BOUND_TOL + grid.h * grid.T * cfg.arms.d
    return mc_report(comparator_cum, totals, at_ck, idx, grid.h, bound, slack)


def default_gamma(k: int, d: int, T_rounds: int) -> float:
    """Exploration rate ``0.1 sqrt(d ln k / T)``, capped at 1. A placeholder schedule."""
    return min(1.0, 0.1 * math.sqrt(d * math.log(max(k, 2)) / T_rounds))


def run_discrete_linbandit(arms: ArmSet, T_rounds: int, beta: float | str, gamma: float | str,
                           rewards, n_episodes: int = 500, master_seed: int = 0) -> RegretReport:
    """Exponential weights over arms mixed with uniform exploration at rate ``gamma``."""
    rewards = check_reward_rounds(rewards, arms.d)
    if rewards.shape[0] != T_rounds:
        raise DomainError(f"expected {T_rounds} reward rounds, got {rewards.shape[0]}")
    if beta == "auto":
        beta = beta_schedule_linbandit(arms.k, arms.d, T_rounds)
    if gamma == "auto":
        gamma = default_gamma(arms.k, arms.d, T_rounds)
    if not 0 <= gamma <= 1:
        raise DomainError(f"gamma must lie in [0, 1], got {gamma}")
    A = arms.A
    k = arms.k
    u = np.stack([path_uniforms(master_seed, e, 0, T_rounds, 1)[:, 0] for e in range(n_episodes)],
                 axis=1)
    s = np.zeros((n_episodes, arms.d))
    acc = np.zeros(n_episodes)
    idx = curve_indices(T_rounds)
    ck_pos = {int(c): j for j, c in enumerate(idx)}
    at_ck = np.zeros((n_episodes, idx.size))
    for t in range(T_rounds):
        r = rewards[t]
        p = (1 - gamma) * grad_G(s @ A.T, beta) + gamma / k
        acc += p @ (A @ r)
        if t + 1 in ck_pos:
            at_ck[:, ck_pos[t + 1]] = acc
        a = A[sample_arms(p, u[t])]  # (E, d)
        coef = (a @ r)[:, None] * a
        s += solve_Q(design_matrix_Q(arms, p), coef[..., None])[..., 0]
    comparator_cum = np.cumsum(rewards @ A.T, axis=0)
    bound = linbandit_bound(k, arms.d, T_rounds) if k > 1 else 0.0
    return mc_report(comparator_cum, acc, at_ck, idx, 1.0, bound, BOUND_TOL)
