"""Regret report shared by all runners."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

BOUND_TOL = 1e-6


@dataclass(frozen=True)
class RegretReport:
    """Measured regret next to the theoretical bound it should respect.

    ``bound_violated`` is decided by the runner that built the report
    (deterministic runs compare the regret itself; Monte Carlo runs compare
    ``measured_regret - 3 * stderr``) against ``theoretical_bound + slack``.
    """

    measured_regret: float
    theoretical_bound: float
    best_comparator_index: int
    bound_violated: bool
    ci_halfwidth: float = 0.0
    stderr: float = 0.0
    slack: float = BOUND_TOL
    n_paths: int = 1
    # cumulative regret estimate on a coarse time grid, for plotting
    curve: tuple = field(default=(), repr=False, compare=False)

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("curve")
        return out


def best_comparator(totals) -> int:
    """Index of the largest total; ties go to the lowest index."""
    return int(np.argmax(np.asarray(totals)))
