"""Experiment orchestration: JSON configs, single runs, parameter sweeps.

Config schema (JSON object; unknown keys are rejected)::

    problem      "olo" | "bandit" | "linbandit"            (required)
    mode         "continuous" (default) | "discrete"
    d            number of arms / feature dimension         (required)
    T            horizon (continuous) or number of rounds (discrete)
    beta         positive number or "auto"                  (default "auto")
    steps        grid steps (default 10^4 * T)
    n_paths      Monte Carlo paths or episodes (default 1000)
    master_seed  non-negative integer (default 0)
    adversary    reward path, e.g. {"kind": "constant", "value": [1, 0.5, 0]}
    arms_file    CSV arm set (linbandit)
    arms         {"kind": "random", "k": 16, "seed": 0} | {"kind": "basis"} | [[...], ...]
    p_floor      probability floor (default 1e-6)
    gamma        exploration rate for discrete linbandit, number or "auto"
    block_size   paths simulated together (default 500); part of the numerics
    workers      process count; never changes results
    trace        dump path 0 of a continuous bandit run to <output>_trace.csv
    output       path prefix for artifacts (default "run")
"""

from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ctonline import bandit, linbandit, olo
from ctonline.errors import ConfigError, DomainError, ScheduleError
from ctonline.numerics import TimeGrid
from ctonline.report import RegretReport
from ctonline.rewards import make_path

PROBLEMS = ("olo", "bandit", "linbandit")
MODES = ("continuous", "discrete")
STEPS_PER_UNIT = 10_000
SWEEP_PARAMS = ("beta", "T", "d", "steps", "p_floor")

_FIELDS = {
    "problem": str, "mode": str, "d": int, "T": (int, float), "T_rounds": int,
    "beta": (int, float, str), "steps": int, "n_paths": int, "master_seed": int,
    "adversary": dict, "arms_file": str, "arms": (dict, list), "p_floor": (int, float),
    "gamma": (int, float, str), "block_size": int, "workers": int, "trace": bool,
    "output": str,
}
@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    mode: str
    d: int
    T: float
    beta: float
    steps: int
    n_paths: int
    master_seed: int
    adversary: dict
    p_floor: float
    beta_auto: bool = False
    arms: object = None
    gamma: float | None = None
    block_size: int = 500
    workers: int = 1
    trace: bool = False
    output: str = "run"
    raw: dict = field(default_factory=dict, compare=False, repr=False)
    base_dir: str = field(default=".", compare=False, repr=False)

    def echo(self) -> dict:
        """Resolved config for reports, without execution-only fields."""
        out = {
            "problem": self.problem, "mode": self.mode, "d": self.d, "T": self.T,
            "beta": self.beta, "beta_auto": self.beta_auto, "steps": self.steps,
            "n_paths": self.n_paths, "master_seed": self.master_seed,
            "adversary": self.adversary, "p_floor": self.p_floor, "block_size": self.block_size,
        }
        if self.arms is not None:
            out["arms"] = self.arms.A.tolist()
        if self.gamma is not None:
            out["gamma"] = self.gamma
        return out


def _typecheck(raw: dict) -> None:
    for key, value in raw.items():
        if key not in _FIELDS:
            raise ConfigError(f"unknown field: {key}", key)
        want = _FIELDS[key]
        if isinstance(value, bool) and want is not bool:
            raise ConfigError(f"field {key}: expected {_type_name(want)}, got boolean", key)
        if not isinstance(value, want):
            raise ConfigError(f"field {key}: expected {_type_name(want)}, got {type(value).__name__}", key)


def _type_name(want) -> str:
    if isinstance(want, tuple):
        return " or ".join(t.__name__ for t in want)
    return want.__name__


def _resolve_arms(raw: dict, d: int, base: Path):
    if "arms_file" in raw:
        path = Path(raw["arms_file"])
        if not path.is_absolute():
            path = base / path
        if not path.exists():
            raise ConfigError(f"field arms_file: no such file {path}", "arms_file")
        try:
            arms = linbandit.load_arms(path.read_text(encoding="utf-8"))
        except ScheduleError as exc:
            raise ConfigError(f"field arms_file: {exc}", "arms_file") from None
    else:
        spec = raw.get("arms", {"kind": "basis"})
        try:
            if isinstance(spec, list):
                arms = linbandit.ArmSet(np.array(spec, dtype=float))
            elif spec.get("kind") == "basis":
                arms = linbandit.basis_arms(d)
            elif spec.get("kind") == "random":
                arms = linbandit.random_arm_set(int(spec["k"]), d, int(spec.get("seed", 0)))
            else:
                raise ConfigError(f"field arms.kind: unknown arm set kind {spec.get('kind')!r}", "arms.kind")
        except (DomainError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"field arms: {exc}", "arms") from None
    if arms.d != d:
        raise ConfigError(f"field arms: arms have dimension {arms.d}, expected d = {d}", "arms")
    return arms


def parse_config(text_or_dict, base_dir=".") -> ExperimentConfig:
    """Validate a config and resolve ``"auto"`` beta, defaults and referenced files."""
    if isinstance(text_or_dict, str):
        try:
            raw = json.loads(text_or_dict)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    else:
        raw = dict(text_or_dict)
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _typecheck(raw)
    for key in ("problem", "d"):
        if key not in raw:
            raise ConfigError(f"missing field: {key}", key)
    problem = raw["problem"]
    if problem not in PROBLEMS:
        raise ConfigError(f"field problem: expected one of {PROBLEMS}, got {problem!r}", "problem")
    mode = raw.get("mode", "continuous")
    if mode not in MODES:
        raise ConfigError(f"field mode: expected one of {MODES}, got {mode!r}", "mode")
    d = raw["d"]
    if d < 1 or (problem == "olo" and d < 2):
        raise ConfigError(f"field d: must be >= {2 if problem == 'olo' else 1}, got {d}", "d")

    if mode == "discrete":
        T = raw.get("T_rounds", raw.get("T"))
        if T is None:
            raise ConfigError("missing field: T_rounds", "T_rounds")
        if int(T) != T or T < 1:
            raise ConfigError(f"field T_rounds: must be a positive integer, got {T}", "T_rounds")
        T = int(T)
        steps = T
    else:
        if "T" not in raw:
            raise ConfigError("missing field: T", "T")
        T = float(raw["T"])
        if not (T > 0 and math.isfinite(T)):
            raise ConfigError(f"field T: must be positive, got {T}", "T")
        steps = raw.get("steps", int(round(STEPS_PER_UNIT * T)))
        if steps < 1:
            raise ConfigError(f"field steps: must be positive, got {steps}", "steps")

    arms = _resolve_arms(raw, d, Path(base_dir)) if problem == "linbandit" else None

    beta = raw.get("beta", "auto")
    beta_auto = beta == "auto"
    if isinstance(beta, str) and not beta_auto:
        raise ConfigError("field beta: beta must be positive or auto", "beta")
    if beta_auto:
        if problem == "olo":
            beta = olo.beta_schedule_olo(d, T, mode)
        elif problem == "bandit":
            beta = bandit.beta_schedule_bandit(d, T)
        else:
            beta = linbandit.beta_schedule_linbandit(arms.k, d, T)
    elif not (beta > 0 and math.isfinite(beta)):
        raise ConfigError("field beta: beta must be positive or auto", "beta")
    if problem == "olo" and beta > olo.MAX_BETA:
        raise ConfigError(f"field beta: capped at {olo.MAX_BETA:g}", "beta")

    n_actions = arms.k if arms is not None else d
    p_floor = float(raw.get("p_floor", bandit.DEFAULT_P_FLOOR))
    if problem != "olo" and mode == "continuous" and not 0 < p_floor < 1 / n_actions:
        raise ConfigError(f"field p_floor: must lie in (0, 1/{n_actions}), got {p_floor}", "p_floor")

    gamma = None
    if problem == "linbandit" and mode == "discrete":
        gamma = raw.get("gamma", "auto")
        if gamma == "auto":
            gamma = linbandit.default_gamma(arms.k, d, T)
        elif isinstance(gamma, str) or not 0 <= gamma <= 1:
            raise ConfigError("field gamma: must lie in [0, 1] or be auto", "gamma")

    adversary = raw.get("adversary")
    if adversary is None:
        raise ConfigError("missing field: adversary", "adversary")
    if adversary.get("kind") == "from_file" and "path" in adversary:
        adversary = dict(adversary, path=str(Path(base_dir) / adversary["path"]))
    try:
        make_path(adversary, d, float(T))
    except (DomainError, ScheduleError, KeyError, OSError) as exc:
        raise ConfigError(f"field adversary: {exc}", "adversary") from None

    for key in ("n_paths", "block_size", "workers"):
        if key in raw and raw[key] < 1:
            raise ConfigError(f"field {key}: must be >= 1, got {raw[key]}", key)
    if raw.get("master_seed", 0) < 0:
        raise ConfigError("field master_seed: must be non-negative", "master_seed")

    return ExperimentConfig(
        problem=problem, mode=mode, d=d, T=T, beta=float(beta), steps=int(steps),
        n_paths=raw.get("n_paths", 1000), master_seed=raw.get("master_seed", 0),
        adversary=adversary, p_floor=p_floor, beta_auto=beta_auto, arms=arms,
        gamma=None if gamma is None else float(gamma), block_size=raw.get("block_size", 500),
        workers=raw.get("workers", 1), trace=raw.get("trace", False),
        output=raw.get("output", "run"), raw=raw, base_dir=str(base_dir),
    )


def _any_beta_bound(n_actions: int, d: int, T: float, beta: float) -> float:
    # ln n / beta + beta d T / 2 holds for any beta and equals sqrt(2 T d ln n) at the tuned beta
    return math.log(n_actions) / beta + beta * d * T / 2


def execute(cfg: ExperimentConfig) -> RegretReport:
    """Dispatch to the runner for ``(problem, mode)``."""
    path = make_path(cfg.adversary, cfg.d, float(cfg.T))
    grid = TimeGrid(float(cfg.T), cfg.steps)
    if cfg.mode == "discrete":
        rewards = path.on_grid(grid)
        if cfg.problem == "olo":
            return olo.run_discrete_ftrl(cfg.d, cfg.T, cfg.beta, rewards)
        if cfg.problem == "bandit":
            return bandit.run_discrete_exp3(cfg.d, cfg.T, cfg.beta, rewards, cfg.n_paths, cfg.master_seed)
        return linbandit.run_discrete_linbandit(cfg.arms, cfg.T, cfg.beta, cfg.gamma, rewards,
                                                cfg.n_paths, cfg.master_seed)
    if cfg.problem == "olo":
        return olo.run_continuous_ftrl(olo.OloRunConfig(cfg.d, cfg.T, cfg.beta, grid, path))
    if cfg.problem == "bandit":
        run = bandit.BanditRunConfig(cfg.d, cfg.T, cfg.beta, grid, path, cfg.n_paths, cfg.master_seed,
                                     cfg.p_floor, cfg.block_size, cfg.workers)
        rep = bandit.run_continuous_bandit(run)
        n_actions = cfg.d
    else:
        run = linbandit.LinBanditRunConfig(cfg.arms, cfg.T, cfg.beta, grid, path, cfg.n_paths,
                                           cfg.master_seed, cfg.p_floor, cfg.block_size, cfg.workers)
        rep = linbandit.run_continuous_linbandit(run)
        n_actions = cfg.arms.k
    if cfg.beta_auto or n_actions == 1:
        return rep
    bound = _any_beta_bound(n_actions, cfg.d, cfg.T, cfg.beta)
    violated = (rep.measured_regret - 3 * rep.stderr) > bound + rep.slack
    return replace(rep, theoretical_bound=bound, bound_violated=violated)


def git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=10,
        )
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def report_body(cfg: ExperimentConfig, rep: RegretReport) -> dict:
    return {"report": rep.to_dict(), "config": cfg.echo()}


def dumps_body(body: dict) -> str:
    return json.dumps(body, sort_keys=True, indent=2)


def curve_csv(rep: RegretReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["t", "regret"])
    for t, r in rep.curve:
        writer.writerow([repr(t), repr(r)])
    return out.getvalue()


def run_experiment(cfg: ExperimentConfig, output: str | None = None) -> tuple[RegretReport, dict]:
    """Run ``cfg`` and write ``<prefix>_report.json`` and ``<prefix>_curve.csv``.

    The report file has a ``body`` (report and resolved config; byte-stable
    for a given config and seed) and a ``meta`` block (build id, wall time,
    worker count) that is allowed to vary between runs.
    """
    prefix = output or cfg.output
    start = time.perf_counter()
    rep = execute(cfg)
    wall = time.perf_counter() - start
    body = report_body(cfg, rep)
    doc = {"body": body, "meta": {"build": git_describe(), "wall_time_s": wall, "workers": cfg.workers}}
    Path(prefix).parent.mkdir(parents=True, exist_ok=True)
    paths = {"report": f"{prefix}_report.json", "curve": f"{prefix}_curve.csv"}
    Path(paths["report"]).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    Path(paths["curve"]).write_text(curve_csv(rep), encoding="utf-8")
    if cfg.trace and cfg.problem == "bandit" and cfg.mode == "continuous":
        run = bandit.BanditRunConfig(cfg.d, cfg.T, cfg.beta, TimeGrid(float(cfg.T), cfg.steps),
                                     make_path(cfg.adversary, cfg.d, float(cfg.T)), cfg.n_paths,
                                     cfg.master_seed, cfg.p_floor)
        paths["trace"] = f"{prefix}_trace.csv"
        with open(paths["trace"], "w", encoding="utf-8", newline="") as fh:
            bandit.write_trace_csv(bandit.simulate_bandit_path(run, 0), fh)
    return rep, paths


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise ConfigError(f"sweep parameter must be one of {SWEEP_PARAMS}, got {self.param!r}")
        if len(self.values) == 0:
            raise ConfigError("sweep needs at least one value")


def run_sweep(cfg: ExperimentConfig, sweep: SweepSpec) -> list[dict]:
    """One row per value; a failing value is recorded in ``error`` and the sweep continues."""
    rows = []
    for value in sweep.values:
        raw = dict(cfg.raw)
        if sweep.param == "T" and cfg.mode == "discrete":
            raw.pop("T", None)
            raw["T_rounds"] = value
        else:
            raw[sweep.param] = value
        if sweep.param == "T" and "steps" not in cfg.raw:
            raw.pop("steps", None)
        row = {"value": value, "regret": math.nan, "stderr": math.nan, "bound": math.nan,
               "violated": "", "error": ""}
        try:
            rep = execute(parse_config(raw, cfg.base_dir))
            row.update(regret=rep.measured_regret, stderr=rep.stderr, bound=rep.theoretical_bound,
                       violated=rep.bound_violated)
        except (ConfigError, DomainError, ScheduleError) as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows


def sweep_csv(rows: list[dict]) -> str:
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=["value", "regret", "stderr", "bound", "violated", "error"],
                            lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return out.getvalue()


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])
