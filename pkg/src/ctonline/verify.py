"""Self-check suites: property checks, brute-force oracles and bound checks.

Each suite returns a :class:`SuiteResult` whose ``max_violation`` is the
largest amount by which any case exceeded its tolerance (``<= 0`` passes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ctonline import bandit, linbandit, olo
from ctonline.legendre import conjugate_G, entropy_F, fenchel_gap, grad_G, hess_G, hess_G_at
from ctonline.numerics import TimeGrid
from ctonline.rewards import builtin_adversaries


@dataclass(frozen=True)
class SuiteResult:
    name: str
    cases: int
    max_violation: float
    inequality: str

    @property
    def passed(self) -> bool:
        return self.max_violation <= 0


def random_simplex(rng, n, zeros=False):
    x = rng.dirichlet(np.full(n, rng.choice([0.2, 1.0, 5.0])))
    if zeros and n > 1 and rng.random() < 0.2:
        x[rng.integers(n)] = 0.0
        x /= x.sum()
    return x


def random_probabilities(rng, n, floor):
    """Dirichlet draw with a floor, half of the time mixed towards uniform."""
    p = rng.dirichlet(np.full(n, rng.choice([0.3, 1.0, 3.0])))
    if rng.random() < 0.5:
        p = 0.5 * p + 0.5 / n
    return bandit.floor_probabilities(p, floor)


def enumeration_covariance(outcomes, weights, mean):
    """Covariance of a discrete random vector given its outcomes and their weights."""
    second = np.einsum("a,ai,aj->ij", weights, outcomes, outcomes)
    return second - np.outer(mean, mean)


def bandit_outcomes(r, p):
    # arm a is drawn with probability p_a and yields (r_a / p_a) e_a
    return np.diag(r / p)


def linbandit_outcomes(A, p, r):
    Q = np.einsum("a,ai,aj->ij", p, A, A)
    return np.linalg.solve(Q, (A * (A @ r)[:, None]).T).T


def fenchel_young_suite(n_cases=10_000, seed=0) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(n_cases):
        n = int(rng.integers(1, 17))
        beta = 10 ** rng.uniform(-2, 2)
        x = random_simplex(rng, n, zeros=True)
        y = rng.normal(scale=10 ** rng.uniform(-1, 1), size=n)
        worst = max(worst, -fenchel_gap(x, y, beta) - 1e-10)
    return SuiteResult("legendre.fenchel_young", n_cases, worst, "F(x) + G(y) - x.y >= -1e-10")


def conjugacy_suite(n_cases=1000, seed=0) -> SuiteResult:
    rng = np.random.default_rng(seed + 1)
    worst = -math.inf
    for _ in range(n_cases):
        n = int(rng.integers(1, 17))
        beta = 10 ** rng.uniform(-2, 2)
        y = rng.normal(size=n)
        x = grad_G(y, beta)
        x = x / x.sum()
        gap = entropy_F(x, beta) + conjugate_G(y, beta) - x @ y
        worst = max(worst, abs(gap) - 1e-10)
    return SuiteResult("legendre.conjugacy", n_cases, worst, "|F(grad G(y)) + G(y) - grad G(y).y| <= 1e-10")


def hessian_suite(n_cases=200, seed=0, step=1e-5) -> SuiteResult:
    rng = np.random.default_rng(seed + 2)
    worst = -math.inf
    for _ in range(n_cases):
        n = int(rng.integers(2, 9))
        beta = 10 ** rng.uniform(-1, 0.5)
        y = rng.normal(size=n)
        fd = np.empty((n, n))
        for j in range(n):
            e = np.zeros(n)
            e[j] = step
            fd[:, j] = (grad_G(y + e, beta) - grad_G(y - e, beta)) / (2 * step)
        H = hess_G(y, beta)
        rel = np.abs(H - fd).max() / np.abs(H).max()
        worst = max(worst, rel - 1e-5)
    return SuiteResult("legendre.hessian_fd", n_cases, worst, "|hess G - FD| / |hess G| <= 1e-5")


def bandit_oracle_suite(n_cases=1000, seed=0) -> list[SuiteResult]:
    rng = np.random.default_rng(seed + 3)
    cov_worst = unb_worst = -math.inf
    for _ in range(n_cases):
        d = int(rng.integers(1, 17))
        r = rng.uniform(size=d)
        p = random_probabilities(rng, d, 1e-6)
        sigma = bandit.estimator_covariance(r, p)
        oracle = enumeration_covariance(bandit_outcomes(r, p), p, r)
        scale = max(1.0, np.abs(oracle).max())
        cov_worst = max(cov_worst, np.abs(sigma - oracle).max() / scale - 1e-12)
        unb_worst = max(unb_worst, np.abs(bandit.unbiasedness_check(r, p)).max() - 1e-13)
    return [
        SuiteResult("bandit.covariance_oracle", n_cases, cov_worst, "|Sigma - enumeration| <= 1e-12 (relative)"),
        SuiteResult("bandit.unbiasedness", n_cases, unb_worst, "|E[r_hat] - r| <= 1e-13"),
    ]


def linbandit_oracle_suite(n_cases=1000, seed=0) -> list[SuiteResult]:
    rng = np.random.default_rng(seed + 4)
    cov_worst = unb_worst = q_worst = -math.inf
    for _ in range(n_cases):
        d = int(rng.integers(1, 9))
        k = int(rng.integers(d, 65))
        arms = linbandit.random_arm_set(k, d, int(rng.integers(2**32)))
        r = rng.uniform(size=d)
        p = random_probabilities(rng, k, 1e-6 / k)
        sigma = linbandit.linear_estimator_covariance(arms, p, r)
        oracle = enumeration_covariance(linbandit_outcomes(arms.A, p, r), p, r)
        scale = max(1.0, np.abs(oracle).max())
        cov_worst = max(cov_worst, np.abs(sigma - oracle).max() / scale - 1e-10)
        unb_worst = max(unb_worst, np.abs(linbandit.linear_unbiasedness_check(arms, p, r)).max() - 1e-9)
        q_worst = max(q_worst, max(linbandit.q_identity_residuals(arms, p)) - 1e-12)
    return [
        SuiteResult("linbandit.covariance_oracle", n_cases, cov_worst, "|Sigma - enumeration| <= 1e-10 (relative)"),
        SuiteResult("linbandit.unbiasedness", n_cases, unb_worst, "|E[r_hat] - r| <= 1e-9"),
        SuiteResult("linbandit.q_identities", n_cases, q_worst, "A^T diag(p) A = sum_a p_a a a^T = Q within 1e-12"),
    ]


def quadratic_variation_suite(problem="bandit", n_cases=10_000, seed=0, covariance=None) -> list[SuiteResult]:
    """``0 <= tr(Sigma hess G) / 2 <= beta d / 2`` on random ``(r, p, beta)``.

    The lower side holds because both matrices are PSD; it catches
    covariances with the wrong sign, which the upper side alone can miss.
    ``covariance`` replaces the estimator covariance (used for negative controls).
    """
    rng = np.random.default_rng(seed + 5)
    upper = lower = -math.inf
    for i in range(n_cases):
        beta = 10 ** rng.uniform(-3, 3)
        if problem == "bandit":
            d = int(rng.integers(1, 33))
            r = np.ones(d) if i % 10 == 0 else rng.uniform(size=d)
            p = random_probabilities(rng, d, 1e-6)
            if covariance is None:
                qv = bandit.quadratic_variation(r, p, beta)
            else:
                qv = bandit.quadratic_variation(r, p, beta, covariance=covariance)
        else:
            d = int(rng.integers(1, 9))
            k = int(rng.integers(d, 65))
            arms = linbandit.basis_arms(d) if i % 10 == 0 else linbandit.random_arm_set(k, d, int(rng.integers(2**32)))
            r = np.ones(d) if i % 10 == 0 else rng.uniform(size=d)
            p = random_probabilities(rng, arms.k, 1e-6 / arms.k)
            if covariance is None:
                qv = linbandit.linear_quadratic_variation(arms, p, r, beta)
            else:
                sigma = covariance(arms, p, r)
                qv = 0.5 * float(np.trace(arms.A @ sigma @ arms.A.T @ hess_G_at(p, beta)))
        upper = max(upper, qv - beta * d / 2 - 1e-9)
        lower = max(lower, -qv - 1e-9)
    return [
        SuiteResult(f"{problem}.quadratic_variation", n_cases, upper, "tr(Sigma hess G) / 2 <= beta d / 2 + 1e-9"),
        SuiteResult(f"{problem}.quadratic_variation_psd", n_cases, lower, "tr(Sigma hess G) / 2 >= -1e-9"),
    ]


def olo_bound_suite(T=10.0, steps=100_000, seed=0) -> SuiteResult:
    worst, cases = -math.inf, 0
    grid = TimeGrid(T, steps)
    for d in (2, 10, 32):
        for beta in (1.0, 10.0, 100.0):
            for path in builtin_adversaries(d, T, seed).values():
                rep = olo.run_continuous_ftrl(olo.OloRunConfig(d, T, beta, grid, path))
                worst = max(worst, rep.measured_regret - rep.theoretical_bound - 1e-3)
                cases += 1
    return SuiteResult("olo.regret_bound", cases, worst, "regret <= ln d / beta + 1e-3")


def bandit_bound_suite(d=3, T=10.0, steps=2000, n_paths=200, seed=0) -> SuiteResult:
    worst, cases = -math.inf, 0
    grid = TimeGrid(T, steps)
    for path in builtin_adversaries(d, T, seed).values():
        rep = bandit.run_continuous_bandit(
            bandit.BanditRunConfig(d, T, "auto", grid, path, n_paths=n_paths, master_seed=seed))
        worst = max(worst, rep.measured_regret - 3 * rep.stderr - rep.theoretical_bound - rep.slack)
        cases += 1
    return SuiteResult("bandit.regret_bound", cases, worst, "regret - 3 stderr <= sqrt(2 T d ln d) + slack")


def linbandit_bound_suite(d=3, k=16, T=10.0, steps=2000, n_paths=200, seed=0) -> SuiteResult:
    worst, cases = -math.inf, 0
    grid = TimeGrid(T, steps)
    arms = linbandit.random_arm_set(k, d, seed)
    for path in builtin_adversaries(d, T, seed).values():
        rep = linbandit.run_continuous_linbandit(
            linbandit.LinBanditRunConfig(arms, T, "auto", grid, path, n_paths=n_paths, master_seed=seed))
        worst = max(worst, rep.measured_regret - 3 * rep.stderr - rep.theoretical_bound - rep.slack)
        cases += 1
    return SuiteResult("linbandit.regret_bound", cases, worst, "regret - 3 stderr <= sqrt(2 T d ln k) + slack")


def run_verify_suite(seed: int = 0, bandit_covariance=None) -> list[SuiteResult]:
    """Every suite at desk scale. Failures are reported in the results, never raised."""
    results = [
        fenchel_young_suite(seed=seed),
        conjugacy_suite(seed=seed),
        hessian_suite(seed=seed),
        *bandit_oracle_suite(seed=seed),
        *linbandit_oracle_suite(seed=seed),
        *quadratic_variation_suite("bandit", seed=seed, covariance=bandit_covariance),
        *quadratic_variation_suite("linbandit", seed=seed),
        olo_bound_suite(seed=seed),
        bandit_bound_suite(seed=seed),
        linbandit_bound_suite(seed=seed),
    ]
    return results


def format_summary(results: list[SuiteResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'suite':<{width}}  {'cases':>6}  {'max violation':>14}  verdict"]
    for r in results:
        verdict = "PASS" if r.passed else f"FAIL  ({r.inequality})"
        lines.append(f"{r.name:<{width}}  {r.cases:>6}  {r.max_violation:>14.3e}  {verdict}")
    return "\n".join(lines)
