"""Continuous-time online learning: OLO, adversarial bandits and linear bandits.

The learners are simulated in continuous time by discretizing the cumulative
reward process (deterministically for online linear optimization, with
Euler-Maruyama for the bandit SDEs) and compared against their closed-form
regret bounds.
"""

from ctonline.legendre import (
    conjugate_G,
    entropy_F,
    fenchel_gap,
    ftrl_argmax,
    grad_G,
    hess_G,
)
from ctonline.report import RegretReport

__all__ = [
    "RegretReport",
    "conjugate_G",
    "entropy_F",
    "fenchel_gap",
    "ftrl_argmax",
    "grad_G",
    "hess_G",
]

__version__ = "0.1.0"
