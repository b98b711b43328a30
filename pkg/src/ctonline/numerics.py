"""Numerical kernels: PSD square roots, counter-based noise, EM steps, quadrature."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from ctonline.errors import DomainError

SYM_TOL = 1e-12
NEG_EIG_TOL = 1e-9

# Philox4x64 emits four 64-bit words per counter value.
_WORDS_PER_BLOCK = 4


def psd_sqrt(S) -> np.ndarray:
    """Symmetric square root of a PSD matrix (or a stack of them).

    Eigenvalues in ``[-tol, 0)`` are clamped to zero, where ``tol`` is
    ``1e-9`` scaled by ``max(1, |largest eigenvalue|)``. Anything more
    negative than that means the caller built a bad covariance, and raises.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim < 2 or S.shape[-1] != S.shape[-2]:
        raise DomainError(f"expected square matrices, got shape {S.shape}")
    scale = np.maximum(1.0, np.abs(S).max(axis=(-2, -1), initial=0.0))
    asym = np.abs(S - np.swapaxes(S, -1, -2)).max(axis=(-2, -1), initial=0.0)
    if np.any(asym > SYM_TOL * scale):
        raise DomainError(f"matrix is not symmetric (max asymmetry {asym.max():.3g})")
    lam, V = np.linalg.eigh(S)
    floor = -NEG_EIG_TOL * np.maximum(1.0, np.abs(lam).max(axis=-1))
    if np.any(lam.min(axis=-1) < floor):
        raise DomainError(f"matrix is not PSD (min eigenvalue {lam.min():.3g})")
    root = np.sqrt(np.clip(lam, 0.0, None))
    return (V * root[..., None, :]) @ np.swapaxes(V, -1, -2)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on ``[0, T]`` with ``steps`` intervals of width ``T/steps``."""

    T: float
    steps: int

    def __post_init__(self):
        if not (self.T > 0 and np.isfinite(self.T)):
            raise DomainError(f"horizon must be positive, got {self.T}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise DomainError(f"steps must be a positive integer, got {self.steps}")

    @property
    def h(self) -> float:
        return self.T / self.steps

    def times(self) -> np.ndarray:
        """Left endpoints ``t_0, ..., t_{steps-1}``."""
        return np.arange(self.steps) * self.h

    def index_of(self, t: float) -> int:
        """Grid index of ``t``; raises if ``t`` is not a grid point."""
        i = int(round(t / self.h))
        if i < 0 or i > self.steps or abs(i * self.h - t) > 1e-9 * max(1.0, self.T):
            raise DomainError(f"t = {t} is not on the grid (h = {self.h})")
        return i


@dataclass(frozen=True)
class RandomStream:
    """Position in the noise stream of one Monte Carlo path."""

    master_seed: int
    path_index: int
    step_index: int = 0


def _blocks(n: int) -> int:
    return -(-n // _WORDS_PER_BLOCK)


def _raw_words(master_seed: int, path_index: int, start_block: int, n_blocks: int) -> np.ndarray:
    if not (0 <= master_seed < 2**64 and 0 <= path_index < 2**64):
        raise DomainError("seed and path index must fit in an unsigned 64-bit integer")
    bitgen = np.random.Philox(key=[master_seed, path_index], counter=[start_block, 0, 0, 0])
    return bitgen.random_raw(n_blocks * _WORDS_PER_BLOCK)


def _to_unit_open(words: np.ndarray) -> np.ndarray:
    # 53-bit mantissa, centered in its cell, so the result lies in (0, 1)
    return ((words >> np.uint64(11)).astype(float) + 0.5) * 2.0**-53


def path_uniforms(master_seed: int, path_index: int, start_step: int, n_steps: int, n: int) -> np.ndarray:
    """Uniforms on (0, 1) for steps ``start_step .. start_step + n_steps - 1``.

    Row ``i`` depends only on ``(master_seed, path_index, start_step + i)``,
    so any chunking of a path reproduces the same numbers.
    """
    b = _blocks(n)
    words = _raw_words(master_seed, path_index, start_step * b, n_steps * b)
    return _to_unit_open(words).reshape(n_steps, b * _WORDS_PER_BLOCK)[:, :n]


def path_normals(master_seed: int, path_index: int, start_step: int, n_steps: int, n: int) -> np.ndarray:
    """Standard normals with the same addressing as :func:`path_uniforms`."""
    return ndtri(path_uniforms(master_seed, path_index, start_step, n_steps, n))


def gaussian_increment(stream: RandomStream, n: int, h: float) -> np.ndarray:
    """Brownian increment: ``n`` independent N(0, h) draws for one step."""
    if not h > 0:
        raise DomainError(f"h must be positive, got {h}")
    z = path_normals(stream.master_seed, stream.path_index, stream.step_index, 1, n)[0]
    return np.sqrt(h) * z


def em_step(s, drift, sigma, dW, h: float) -> np.ndarray:
    """One Euler-Maruyama step ``s + drift*h + sigma @ dW``.

    ``dW`` must already carry variance ``h``. Leading axes of ``s``,
    ``sigma`` and ``dW`` are treated as a batch of independent paths.
    """
    s = np.asarray(s, dtype=float)
    drift = np.asarray(drift, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    dW = np.asarray(dW, dtype=float)
    n = s.shape[-1]
    if drift.shape[-1] != n or dW.shape[-1] != n or sigma.shape[-2:] != (n, n):
        raise DomainError(
            f"dimension mismatch: s {s.shape}, drift {drift.shape}, "
            f"sigma {sigma.shape}, dW {dW.shape}"
        )
    return s + drift * h + np.einsum("...ij,...j->...i", sigma, dW)


def integrate_path(f, grid: TimeGrid) -> float:
    """Left Riemann sum of step-indexed samples ``f_i = f(t_i)``."""
    f = np.asarray(f, dtype=float)
    if f.shape[0] != grid.steps:
        raise DomainError(f"expected {grid.steps} samples, got {f.shape[0]}")
    return f.sum(axis=0) * grid.h
