"""Entropic regularizer on the simplex and its Legendre conjugate.

    F(x) = beta^-1 * sum_a x_a ln x_a          (x in the simplex)
    G(y) = beta^-1 * ln sum_a exp(beta y_a)    (y in R^n)

grad G is the softmax of ``beta * y`` and doubles as the FTRL action map.
Functions taking ``y`` accept stacked inputs; the last axis indexes arms.
"""

from __future__ import annotations

import numpy as np

from ctonline.errors import DomainError

SIMPLEX_TOL = 1e-12


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not (beta > 0 and np.isfinite(beta)):
        raise DomainError(f"beta must be a positive finite number, got {beta}")
    return beta


def _check_dual(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim == 0 or y.shape[-1] == 0:
        raise DomainError("dual vector must have at least one coordinate")
    if not np.all(np.isfinite(y)):
        raise DomainError("dual vector has non-finite entries")
    return y


def check_simplex(x, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Validate a probability vector and return it as a float array."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise DomainError("simplex point must be a non-empty 1-d vector")
    if not np.all(np.isfinite(x)):
        raise DomainError("simplex point has non-finite entries")
    if np.any(x < 0):
        raise DomainError(f"simplex point has negative entry {x.min()}")
    if abs(x.sum() - 1.0) > tol:
        raise DomainError(f"simplex point sums to {x.sum()!r}, not 1")
    return x


def entropy_F(x, beta: float) -> float:
    """Scaled negative entropy ``beta^-1 sum x ln x`` with ``0 ln 0 = 0``."""
    beta = _check_beta(beta)
    x = check_simplex(x)
    pos = x[x > 0]
    return float(np.dot(pos, np.log(pos)) / beta)


def conjugate_G(y, beta: float):
    """Scaled log-sum-exp ``beta^-1 ln sum exp(beta y)`` over the last axis."""
    beta = _check_beta(beta)
    y = _check_dual(y)
    z = beta * y
    m = z.max(axis=-1, keepdims=True)
    out = (np.log(np.exp(z - m).sum(axis=-1)) + m[..., 0]) / beta
    return float(out) if out.ndim == 0 else out


def grad_G(y, beta: float) -> np.ndarray:
    """Softmax of ``beta * y``; each output row lies on the simplex."""
    beta = _check_beta(beta)
    y = _check_dual(y)
    z = beta * y
    w = np.exp(z - z.max(axis=-1, keepdims=True))
    return w / w.sum(axis=-1, keepdims=True)


def hess_G_at(x, beta: float) -> np.ndarray:
    """Hessian ``beta (diag(x) - x x^T)`` written in terms of ``x = grad_G(y)``."""
    x = np.asarray(x, dtype=float)
    eye = np.eye(x.shape[-1])
    return beta * (x[..., :, None] * eye - x[..., :, None] * x[..., None, :])


def hess_G(y, beta: float) -> np.ndarray:
    """Hessian of G at ``y``. Symmetric, PSD, and annihilates the ones vector."""
    return hess_G_at(grad_G(y, beta), _check_beta(beta))


def fenchel_gap(x, y, beta: float) -> float:
    """Fenchel-Young gap ``F(x) + G(y) - x.y``, nonnegative up to round-off."""
    x = check_simplex(x)
    y = _check_dual(y)
    if y.shape != x.shape:
        raise DomainError(f"shape mismatch: x {x.shape} vs y {y.shape}")
    return entropy_F(x, beta) + conjugate_G(y, beta) - float(np.dot(x, y))


def ftrl_argmax(s, beta: float) -> np.ndarray:
    """Maximizer of ``x.s - F(x)`` over the simplex, i.e. ``grad_G(s)``."""
    return grad_G(s, beta)
