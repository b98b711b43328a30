import json
import math

import numpy as np
import pytest

from ctonline import cli
from ctonline.bandit import bandit_bound
from ctonline.errors import ConfigError
from ctonline.harness import (
    SweepSpec,
    dumps_body,
    execute,
    loglog_slope,
    parse_config,
    report_body,
    run_experiment,
    run_sweep,
    sweep_csv,
)

BANDIT = {"problem": "bandit", "d": 3, "T": 10, "beta": "auto",
          "adversary": {"kind": "constant", "value": [1, 0.5, 0]}}
OLO = {"problem": "olo", "d": 10, "T": 2, "beta": 100, "steps": 20_000,
       "adversary": {"kind": "sinusoid", "omega": list(np.linspace(0.5, 3, 10)), "phase": [0.1] * 10}}


def small_bandit(**kw):
    raw = dict(BANDIT, T=2, steps=200, n_paths=20)
    raw.update(kw)
    return raw


class TestParseConfig:
    def test_auto_beta_bandit(self):
        cfg = parse_config(json.dumps(BANDIT))
        assert cfg.beta == pytest.approx(math.sqrt(2 * math.log(3) / 30))
        assert cfg.beta == pytest.approx(0.2706304107903260861712, rel=1e-15)

    def test_defaults(self):
        cfg = parse_config(BANDIT)
        assert (cfg.steps, cfg.n_paths, cfg.p_floor) == (100_000, 1000, 1e-6)

    def test_auto_beta_other_problems(self):
        olo = parse_config(dict(OLO, beta="auto"))
        assert olo.beta == 1e3
        disc = parse_config(dict(OLO, beta="auto", mode="discrete", T_rounds=100))
        assert disc.beta == pytest.approx(math.sqrt(2 * math.log(10) / 100))
        lin = parse_config(dict(BANDIT, problem="linbandit", arms={"kind": "random", "k": 16, "seed": 0}))
        assert lin.beta == pytest.approx(0.4299293525095940098994, rel=1e-15)

    def test_missing_problem(self):
        raw = dict(BANDIT)
        del raw["problem"]
        with pytest.raises(ConfigError, match="missing field: problem"):
            parse_config(raw)

    @pytest.mark.parametrize("beta", [-1, 0, "fast"])
    def test_bad_beta(self, beta):
        with pytest.raises(ConfigError, match="beta must be positive or auto") as exc:
            parse_config(dict(BANDIT, beta=beta))
        assert exc.value.field == "beta"

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown field: colour"):
            parse_config(dict(BANDIT, colour="red"))

    def test_type_mismatch(self):
        with pytest.raises(ConfigError, match="field d") as exc:
            parse_config(dict(BANDIT, d="3"))
        assert exc.value.field == "d"

    def test_adversary_dimension(self):
        with pytest.raises(ConfigError, match="field adversary"):
            parse_config(dict(BANDIT, d=4))

    def test_p_floor_range(self):
        with pytest.raises(ConfigError, match="p_floor"):
            parse_config(dict(BANDIT, p_floor=0.5))

    def test_invalid_json(self):
        with pytest.raises(ConfigError, match="JSON"):
            parse_config("{problem: bandit")

    def test_missing_arms_file(self, tmp_path):
        with pytest.raises(ConfigError, match="arms_file"):
            parse_config(dict(BANDIT, problem="linbandit", arms_file="nope.csv"), base_dir=tmp_path)


class TestRunExperiment:
    def test_olo_d10(self, tmp_path):
        rep, paths = run_experiment(parse_config(OLO), str(tmp_path / "olo"))
        assert rep.theoretical_bound == pytest.approx(math.log(10) / 100, rel=1e-15)
        assert round(rep.theoretical_bound, 6) == 0.023026
        assert not rep.bound_violated
        doc = json.loads(open(paths["report"]).read())
        assert set(doc) == {"body", "meta"}
        assert set(doc["meta"]) == {"build", "wall_time_s", "workers"}
        assert doc["body"]["report"]["theoretical_bound"] == rep.theoretical_bound
        lines = open(paths["curve"]).read().splitlines()
        assert lines[0] == "t,regret" and len(lines) == 101

    def test_bandit_bound(self):
        rep = execute(parse_config(dict(BANDIT, steps=100, n_paths=5)))
        assert rep.theoretical_bound == pytest.approx(math.sqrt(2 * 10 * 3 * math.log(3)), rel=1e-15)
        assert round(rep.theoretical_bound, 3) == 8.119

    def test_fixed_beta_uses_any_beta_bound(self):
        cfg = parse_config(small_bandit(beta=0.5))
        rep = execute(cfg)
        assert rep.theoretical_bound == pytest.approx(math.log(3) / 0.5 + 0.5 * 3 * 2 / 2)

    def test_bodies_byte_identical(self, tmp_path):
        cfg = parse_config(small_bandit())
        _, a = run_experiment(cfg, str(tmp_path / "a"))
        _, b = run_experiment(parse_config(small_bandit(workers=2)), str(tmp_path / "b"))
        body = [json.dumps(json.loads(open(p["report"]).read())["body"], sort_keys=True) for p in (a, b)]
        assert body[0] == body[1]
        assert open(a["curve"], "rb").read() == open(b["curve"], "rb").read()

    def test_body_echo_excludes_execution_fields(self):
        cfg = parse_config(small_bandit(workers=3, output="x"))
        body = report_body(cfg, execute(cfg))
        assert "workers" not in body["config"] and "output" not in body["config"]
        assert dumps_body(body) == dumps_body(json.loads(dumps_body(body)))

    def test_trace(self, tmp_path):
        _, paths = run_experiment(parse_config(small_bandit(trace=True)), str(tmp_path / "t"))
        lines = open(paths["trace"]).read().splitlines()
        assert lines[0] == "step,t,p_1,p_2,p_3,expected_reward"
        assert len(lines) == 201

    def test_discrete_runs(self):
        for problem in ("olo", "bandit", "linbandit"):
            raw = dict(BANDIT, problem=problem, mode="discrete", T_rounds=30, n_paths=10)
            del raw["T"]
            rep = execute(parse_config(raw))
            assert math.isfinite(rep.measured_regret)


class TestSweep:
    def test_empty_values(self):
        with pytest.raises(ConfigError):
            SweepSpec("T", ())

    def test_unknown_param(self):
        with pytest.raises(ConfigError):
            SweepSpec("gamma", (1,))

    def test_row_errors_recorded(self):
        rows = run_sweep(parse_config(small_bandit()), SweepSpec("d", (3, 4)))
        assert rows[0]["error"] == "" and math.isfinite(rows[0]["regret"])
        assert "adversary" in rows[1]["error"] and math.isnan(rows[1]["regret"])
        assert sweep_csv(rows).splitlines()[0] == "value,regret,stderr,bound,violated,error"

    def test_d_bound_scaling(self):
        # the bound is sqrt(2 T d ln d), so the ratio to sqrt(d ln d) is constant
        ratios = [bandit_bound(d, 10.0) / math.sqrt(d * math.log(d)) for d in (2, 3, 5, 8, 16)]
        np.testing.assert_allclose(ratios, math.sqrt(20), rtol=1e-14)

    def test_beta_sweep_olo_monotone(self):
        rows = run_sweep(parse_config(dict(OLO, steps=5000)), SweepSpec("beta", (1, 10, 100)))
        bounds = [r["bound"] for r in rows]
        assert bounds[0] > bounds[1] > bounds[2]
        assert not any(r["violated"] for r in rows)

    def test_t_sweep_bound_slope(self):
        raw = {k: v for k, v in small_bandit(n_paths=10).items() if k != "steps"}
        rows = run_sweep(parse_config(raw), SweepSpec("T", (1, 2, 4)))
        assert loglog_slope([1, 2, 4], [r["bound"] for r in rows]) == pytest.approx(0.5, abs=1e-12)


class TestCli:
    def write(self, tmp_path, raw, name="cfg.json"):
        f = tmp_path / name
        f.write_text(json.dumps(raw), encoding="utf-8")
        return str(f)

    def test_run_ok(self, tmp_path, capsys):
        cfg = self.write(tmp_path, small_bandit())
        assert cli.main(["run", cfg, "--out", str(tmp_path / "r"), "--paths", "8", "--seed", "4"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["n_paths"] == 8
        body = json.loads((tmp_path / "r_report.json").read_text())["body"]
        assert body["config"]["master_seed"] == 4

    def test_config_error(self, tmp_path, capsys):
        cfg = self.write(tmp_path, dict(BANDIT, beta=-1))
        assert cli.main(["run", cfg]) == 2
        assert "beta must be positive or auto" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert cli.main(["run", str(tmp_path / "absent.json")]) == 2

    def test_runtime_error(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        cfg = self.write(tmp_path, small_bandit(output=str(blocker / "sub" / "r")))
        assert cli.main(["run", cfg]) == 3

    def test_sweep(self, tmp_path, capsys):
        cfg = self.write(tmp_path, small_bandit(output=str(tmp_path / "s")))
        assert cli.main(["sweep", cfg, "--param", "beta", "--values", "0.1,0.5,", "--steps", "100"]) == 0
        lines = (tmp_path / "s_sweep_beta.csv").read_text().splitlines()
        assert len(lines) == 3 and lines[1].startswith("0.1,")

    def test_sweep_bad_value(self, tmp_path):
        cfg = self.write(tmp_path, small_bandit())
        assert cli.main(["sweep", cfg, "--param", "beta", "--values", "a,b"]) == 2

    def test_from_file_relative(self, tmp_path):
        (tmp_path / "sched.csv").write_text("t,r_1,r_2,r_3\n0,1,0,0.5\n1,0,1,0.5\n", encoding="utf-8")
        raw = small_bandit(adversary={"kind": "from_file", "path": "sched.csv"}, output=str(tmp_path / "f"))
        assert cli.main(["run", self.write(tmp_path, raw)]) == 0

    def test_arms_file(self, tmp_path):
        (tmp_path / "arms.csv").write_text("a_1,a_2,a_3\n1,0,0\n0,1,0\n0,0,1\n0.3,0.3,0.3\n", encoding="utf-8")
        raw = small_bandit(problem="linbandit", arms_file="arms.csv", output=str(tmp_path / "l"))
        assert cli.main(["run", self.write(tmp_path, raw)]) == 0
        body = json.loads((tmp_path / "l_report.json").read_text())["body"]
        assert len(body["config"]["arms"]) == 4
