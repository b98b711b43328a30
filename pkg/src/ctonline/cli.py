"""Command line entry point.

    ctonline run CONFIG [--seed N] [--paths N] [--steps N] [--out PREFIX] [--workers N]
    ctonline verify [--seed N]
    ctonline sweep CONFIG --param NAME --values V1,V2,... [overrides...]

Exit codes: 0 success, 1 failed verify suite, 2 config error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ctonline import harness, verify
from ctonline.errors import ConfigError, DomainError, ScheduleError

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def _add_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", type=Path, help="JSON experiment config")
    p.add_argument("--seed", type=int, help="override master_seed")
    p.add_argument("--paths", type=int, help="override n_paths")
    p.add_argument("--steps", type=int, help="override steps")
    p.add_argument("--out", help="override the output prefix")
    p.add_argument("--workers", type=int, help="worker processes (results do not depend on it)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctonline", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _add_overrides(sub.add_parser("run", help="run one experiment"))
    v = sub.add_parser("verify", help="run every self-check suite")
    v.add_argument("--seed", type=int, default=0)
    s = sub.add_parser("sweep", help="run one experiment per parameter value")
    _add_overrides(s)
    s.add_argument("--param", required=True, choices=harness.SWEEP_PARAMS)
    s.add_argument("--values", required=True, help="comma-separated values")
    return parser


def _load(args) -> harness.ExperimentConfig:
    try:
        raw = json.loads(args.config.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    for flag, key in (("seed", "master_seed"), ("paths", "n_paths"), ("steps", "steps"),
                      ("out", "output"), ("workers", "workers")):
        if getattr(args, flag) is not None:
            raw[key] = getattr(args, flag)
    return harness.parse_config(raw, base_dir=args.config.parent)


def _parse_values(text: str) -> tuple:
    out = []
    for item in filter(None, (i.strip() for i in text.split(","))):
        try:
            out.append(int(item))
        except ValueError:
            try:
                out.append(float(item))
            except ValueError:
                raise ConfigError(f"sweep value {item!r} is not a number") from None
    return tuple(out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            results = verify.run_verify_suite(seed=args.seed)
            print(verify.format_summary(results))
            return EXIT_OK if all(r.passed for r in results) else EXIT_VIOLATION
        cfg = _load(args)
        if args.command == "run":
            rep, paths = harness.run_experiment(cfg)
            print(json.dumps(rep.to_dict(), indent=2))
            for kind, path in paths.items():
                print(f"wrote {kind}: {path}", file=sys.stderr)
            return EXIT_OK
        values = _parse_values(args.values)
        rows = harness.run_sweep(cfg, harness.SweepSpec(args.param, values))
        text = harness.sweep_csv(rows)
        out = Path(f"{cfg.output}_sweep_{args.param}.csv")
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        sys.stdout.write(text)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, ScheduleError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
