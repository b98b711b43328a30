"""Monte Carlo engine shared by the bandit and linear-bandit simulators.

A model supplies three maps of the state ``s`` (stacked over paths):
the floored action distribution, the estimator covariance, and the
learner's expected instantaneous reward. The engine drives

    s <- s + r(t_i) h + sqrt(Sigma) dW_i

with ``dW_i`` drawn from the counter-based stream of each path, so a path's
trajectory depends only on ``(master_seed, path_index)`` and never on how
paths are grouped into blocks or spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ctonline.numerics import em_step, path_normals, psd_sqrt

DEFAULT_BLOCK = 500
NOISE_CHUNK = 256


@dataclass
class BlockResult:
    path_indices: np.ndarray
    learner_total: np.ndarray  # (P,)
    learner_checkpoints: np.ndarray  # (P, C)
    trace_p: np.ndarray | None = None  # (steps, m) for the first path, if requested
    trace_reward: np.ndarray | None = None


def simulate_block(model, rewards, h, master_seed, path_indices, checkpoints, trace=False) -> BlockResult:
    """Simulate the given paths together; ``checkpoints`` are step counts (1-based)."""
    path_indices = np.asarray(path_indices, dtype=np.uint64)
    steps = rewards.shape[0]
    P, n = path_indices.size, model.noise_dim
    s = np.zeros((P, n))
    acc = np.zeros(P)
    ck = np.asarray(checkpoints)
    ck_pos = {int(c): j for j, c in enumerate(ck)}
    at_ck = np.zeros((P, ck.size))
    tr_p = tr_r = None
    if trace:
        tr_p = np.empty((steps, model.n_actions))
        tr_r = np.empty(steps)
    sqrt_h = math.sqrt(h)

    for c0 in range(0, steps, NOISE_CHUNK):
        m = min(NOISE_CHUNK, steps - c0)
        noise = np.stack(
            [path_normals(master_seed, int(i), c0, m, n) for i in path_indices], axis=1
        )
        noise *= sqrt_h
        for j in range(m):
            i = c0 + j
            r = rewards[i]
            p = model.probabilities(s)
            er = model.expected_reward(p, r)
            acc += er * h
            if trace:
                tr_p[i] = p[0]
                tr_r[i] = er[0]
            if i + 1 in ck_pos:
                at_ck[:, ck_pos[i + 1]] = acc
            sigma = psd_sqrt(model.covariance(p, r))
            s = em_step(s, r, sigma, noise[j], h)
    return BlockResult(path_indices, acc, at_ck, tr_p, tr_r)


def _run_block(args):
    return simulate_block(*args)


def simulate_paths(model, rewards, h, master_seed, n_paths, checkpoints,
                   block_size=DEFAULT_BLOCK, workers=1):
    """All paths, split into fixed-size blocks; results come back in path order.

    Block boundaries depend only on ``block_size``, so the output is the same
    for any ``workers``.
    """
    blocks = [
        (model, rewards, h, master_seed, np.arange(lo, min(lo + block_size, n_paths)), checkpoints)
        for lo in range(0, n_paths, block_size)
    ]
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_block, blocks))
    else:
        results = [_run_block(b) for b in blocks]
    total = np.concatenate([res.learner_total for res in results])
    at_ck = np.concatenate([res.learner_checkpoints for res in results])
    return total, at_ck


def floor_probabilities(p, floor: float) -> np.ndarray:
    """Raise entries below ``floor`` to exactly ``floor`` and rescale the rest.

    Rescaling can push further entries under the floor, so the clamp is
    repeated; it terminates after at most ``n`` passes because ``floor < 1/n``.
    """
    p = np.array(p, dtype=float)
    if floor <= 0:
        return p
    fixed = np.zeros(p.shape, dtype=bool)
    for _ in range(p.shape[-1]):
        low = (p < floor) & ~fixed
        if not low.any():
            break
        fixed |= low
        free = np.where(fixed, 0.0, p)
        free_mass = 1.0 - floor * fixed.sum(axis=-1, keepdims=True)
        p = np.where(fixed, floor, free * (free_mass / free.sum(axis=-1, keepdims=True)))
    return p


def mc_summary(comparator_totals, learner_totals):
    """Regret estimate, its standard error, and the best comparator index."""
    comparator_totals = np.asarray(comparator_totals)
    best = int(np.argmax(comparator_totals))
    n = learner_totals.size
    estimate = float(comparator_totals[best] - learner_totals.mean())
    stderr = float(learner_totals.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return estimate, stderr, best
