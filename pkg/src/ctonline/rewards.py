"""Oblivious adversaries: deterministic reward paths r(t) in [0,1]^d on [0, T].

Schedule CSV format (UTF-8, ``.`` decimal separator)::

    t,r_1,r_2
    0,1,0
    1,0,1

Each row gives the reward vector on the right-open interval starting at
``t`` and ending at the next row's ``t`` (or at the horizon).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from ctonline.errors import DomainError, ScheduleError
from ctonline.numerics import TimeGrid

KINDS = ("constant", "piecewise_constant", "sinusoid", "from_file")


@dataclass(frozen=True)
class RewardSchedule:
    """Piecewise-constant rewards: ``values[i]`` holds on ``[breakpoints[i], breakpoints[i+1])``."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if bp.ndim != 1 or bp.size == 0:
            raise ScheduleError("schedule must cover t = 0")
        if bp[0] != 0:
            raise ScheduleError(f"schedule must cover t = 0 (first breakpoint is {bp[0]})")
        if np.any(np.diff(bp) <= 0):
            raise ScheduleError("breakpoints must be strictly ascending")
        if vals.ndim != 2 or vals.shape[0] != bp.size:
            raise ScheduleError(f"need one value vector per breakpoint, got {vals.shape}")
        if np.any(vals < 0) or np.any(vals > 1) or not np.all(np.isfinite(vals)):
            raise ScheduleError("reward values must lie in [0, 1]")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class RewardPath:
    """A reward path of one of the built-in kinds; immutable once built."""

    kind: str
    d: int
    T: float
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown reward path kind {self.kind!r}")
        if not self.T > 0:
            raise DomainError(f"horizon must be positive, got {self.T}")
        if self.kind in ("piecewise_constant", "from_file"):
            sched = self.params["schedule"]
            if sched.d != self.d:
                raise DomainError(f"schedule has d = {sched.d}, path has d = {self.d}")
            if sched.breakpoints[-1] >= self.T:
                raise DomainError("every breakpoint must be below the horizon")

    def at(self, t) -> np.ndarray:
        """Vectorized evaluation; ``t`` may be a scalar or 1-d array of times."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.T):
            raise DomainError(f"t must lie in [0, {self.T}]")
        if self.kind == "constant":
            out = np.broadcast_to(self.params["value"], t.shape + (self.d,)).copy()
        elif self.kind == "sinusoid":
            omega, phase = self.params["omega"], self.params["phase"]
            out = 0.5 * (1.0 + np.sin(t[..., None] * omega + phase))
        else:
            sched = self.params["schedule"]
            idx = np.searchsorted(sched.breakpoints, t, side="right") - 1
            out = sched.values[idx]
        return np.clip(out, 0.0, 1.0)

    def on_grid(self, grid: TimeGrid) -> np.ndarray:
        """Rewards at the left endpoints of ``grid``, shape ``(steps, d)``."""
        return self.at(grid.times())


def constant_path(value, T: float) -> RewardPath:
    value = np.asarray(value, dtype=float)
    if value.ndim != 1 or np.any(value < 0) or np.any(value > 1):
        raise DomainError("constant reward must be a vector in [0, 1]^d")
    return RewardPath("constant", value.size, T, {"value": value})


def sinusoid_path(omega, phase, T: float) -> RewardPath:
    """``r_a(t) = (1 + sin(omega_a t + phase_a)) / 2``."""
    omega = np.asarray(omega, dtype=float)
    phase = np.asarray(phase, dtype=float)
    if omega.shape != phase.shape or omega.ndim != 1:
        raise DomainError("omega and phase must be vectors of equal length")
    return RewardPath("sinusoid", omega.size, T, {"omega": omega, "phase": phase})


def piecewise_path(breakpoints, values, T: float) -> RewardPath:
    sched = RewardSchedule(breakpoints, values)
    return RewardPath("piecewise_constant", sched.d, T, {"schedule": sched})


def file_path(path, T: float) -> RewardPath:
    with open(path, encoding="utf-8") as fh:
        sched = load_schedule(fh.read())
    return RewardPath("from_file", sched.d, T, {"schedule": sched, "source": str(path)})


def eval_reward(path: RewardPath, t: float) -> np.ndarray:
    """Reward vector ``r(t)``; piecewise schedules use right-open intervals."""
    if np.ndim(t) != 0:
        raise DomainError("eval_reward takes a scalar time; use RewardPath.at for arrays")
    return path.at(t)


def cumulative_reward(path: RewardPath, t: float, grid: TimeGrid) -> np.ndarray:
    """Left Riemann approximation of ``s(t) = int_0^t r(z) dz`` for a grid time ``t``."""
    if grid.T != path.T:
        raise DomainError(f"grid horizon {grid.T} differs from path horizon {path.T}")
    i = grid.index_of(t)
    if i == 0:
        return np.zeros(path.d)
    return path.at(np.arange(i) * grid.h).sum(axis=0) * grid.h


def load_schedule(text: str) -> RewardSchedule:
    """Parse schedule CSV text; errors carry the offending line number."""
    rows = list(csv.reader(io.StringIO(text)))
    rows = [(n, r) for n, r in enumerate(rows, start=1) if any(c.strip() for c in r)]
    if not rows:
        raise ScheduleError("empty schedule: missing header 't,r_1,...,r_d'")
    _, header = rows[0]
    header = [c.strip() for c in header]
    d = len(header) - 1
    if d < 1 or header[0] != "t" or header[1:] != [f"r_{i}" for i in range(1, d + 1)]:
        raise ScheduleError(f"header must be 't,r_1,...,r_d', got {','.join(header)!r}", row=1)
    if len(rows) == 1:
        raise ScheduleError("schedule must cover t = 0")

    times, values = [], []
    for lineno, row in rows[1:]:
        if len(row) != d + 1:
            raise ScheduleError(f"expected {d + 1} cells, got {len(row)}", row=lineno)
        try:
            nums = [float(c) for c in row]
        except ValueError:
            raise ScheduleError(f"non-numeric cell in {row!r}", row=lineno) from None
        if not all(np.isfinite(nums)):
            raise ScheduleError("non-finite cell", row=lineno)
        t, r = nums[0], nums[1:]
        if not times and t != 0:
            raise ScheduleError(f"schedule must cover t = 0 (first time is {t})", row=lineno)
        if times and t <= times[-1]:
            raise ScheduleError(f"times must be strictly ascending ({t} after {times[-1]})", row=lineno)
        if any(v < 0 or v > 1 for v in r):
            raise ScheduleError(f"reward values must lie in [0, 1], got {r}", row=lineno)
        times.append(t)
        values.append(r)
    return RewardSchedule(np.array(times), np.array(values))


def dump_schedule(schedule: RewardSchedule) -> str:
    """Serialize to the CSV format read by :func:`load_schedule`."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["t"] + [f"r_{i}" for i in range(1, schedule.d + 1)])
    for t, v in zip(schedule.breakpoints, schedule.values):
        writer.writerow([repr(float(t))] + [repr(float(x)) for x in v])
    return out.getvalue()


def make_path(spec: dict, d: int, T: float) -> RewardPath:
    """Build a path from a config mapping such as ``{"kind": "constant", "value": [...]}``."""
    kind = spec.get("kind")
    if kind == "constant":
        path = constant_path(spec["value"], T)
    elif kind == "sinusoid":
        path = sinusoid_path(spec["omega"], spec.get("phase", [0.0] * len(spec["omega"])), T)
    elif kind == "piecewise_constant":
        path = piecewise_path(spec["breakpoints"], spec["values"], T)
    elif kind == "from_file":
        path = file_path(spec["path"], T)
    else:
        raise DomainError(f"unknown adversary kind {kind!r}; expected one of {KINDS}")
    if path.d != d:
        raise DomainError(f"adversary has dimension {path.d}, expected d = {d}")
    return path


def builtin_adversaries(d: int, T: float, seed: int = 0) -> dict[str, RewardPath]:
    """One instance of each generator kind, with reproducible random parameters.

    The piecewise schedule switches the best arm every ``T/8``, which is the
    hardest of the three for a follow-the-leader style learner.
    """
    rng = np.random.default_rng(seed)
    n_pieces = 8
    values = rng.uniform(0.0, 1.0, size=(n_pieces, d))
    values[np.arange(n_pieces), rng.integers(0, d, size=n_pieces)] = 1.0
    return {
        "constant": constant_path(rng.uniform(0.0, 1.0, size=d), T),
        "piecewise_constant": piecewise_path(np.arange(n_pieces) * T / n_pieces, values, T),
        "sinusoid": sinusoid_path(
            rng.uniform(0.2, 2.0, size=d) * 2 * np.pi / T, rng.uniform(0, 2 * np.pi, size=d), T
        ),
    }
