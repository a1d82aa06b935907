"""Command-line surface: exit codes, artifacts, config validation."""

import json
import os

import pytest
import yaml

from aircombat.cli import main
from aircombat.config import ConfigError, load_config, parse_config


def write_config(tmp_path, doc):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(doc))
    return str(path)


FAST_PPO = {"n_steps": 64, "batch_size": 16, "n_epochs": 2, "max_updates": 1}
SMALL_SCENARIO = {"position_box": 3000.0}


class TestConfig:
    def test_defaults_without_file(self):
        app = load_config(None)
        assert app.ppo.learning_rate == 1.3e-3
        assert app.ppo.gamma == 0.9467
        assert app.ppo.clip_range == 0.1359
        assert app.ppo.n_epochs == 47
        assert app.termination.max_episode_time == 360.0

    def test_repo_default_file_matches_builtin_defaults(self):
        here = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
        app = load_config(os.path.join(here, "configs", "default.yaml"))
        assert app == load_config(None)

    def test_unknown_key_named_in_error(self, tmp_path):
        path = write_config(tmp_path, {"ppo": {"learning_rte": 0.1}})
        with pytest.raises(ConfigError, match="ppo.learning_rte"):
            load_config(path)

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="simulator"):
            parse_config({"simulator": {}})

    def test_env_var_path(self, tmp_path, monkeypatch):
        path = write_config(tmp_path, {"run": {"seed": 99}})
        monkeypatch.setenv("AIRCOMBAT_CONFIG", path)
        assert load_config(None).run.seed == 99

    def test_missing_file_is_config_error(self):
        with pytest.raises(ConfigError, match="not found"):
            load_config("/nonexistent/config.yaml")

    def test_invalid_value_rejected(self, tmp_path):
        path = write_config(tmp_path, {"ppo": {"batch_size": 60}})  # does not divide 2048
        with pytest.raises(ConfigError, match="ppo"):
            load_config(path)


class TestCliExitCodes:
    def test_missing_config_exits_2(self, capsys):
        rc = main(["train", "--config", "/does/not/exist.yaml", "--updates", "1"])
        assert rc == 2
        assert "configuration error" in capsys.readouterr().err

    def test_invalid_config_exits_2_and_names_key(self, tmp_path, capsys):
        path = write_config(tmp_path, {"scenario": {"position_bax": 10}})
        rc = main(["train", "--config", path])
        assert rc == 2
        assert "scenario.position_bax" in capsys.readouterr().err

    def test_corrupted_checkpoint_exits_3(self, tmp_path, capsys):
        bad = tmp_path / "policy.json"
        bad.write_text("{broken")
        rc = main(["eval", "--policy", str(bad), "--episodes", "1",
                   "--output", str(tmp_path / "runs")])
        assert rc == 3
        assert "integrity error" in capsys.readouterr().err

    def test_missing_recording_exits_3(self, capsys):
        rc = main(["replay", "--recording", "/does/not/exist.jsonl", "--verify"])
        assert rc == 3


class TestTrainCli:
    def test_single_update_writes_log_checkpoint_manifest(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"ppo": FAST_PPO, "scenario": SMALL_SCENARIO})
        out = tmp_path / "runs"
        rc = main(["train", "--config", cfg, "--seed", "5", "--output", str(out)])
        assert rc == 0
        (run_dir,) = list(out.iterdir())
        log_lines = (run_dir / "training_log.csv").read_text().strip().splitlines()
        assert len(log_lines) == 2  # header + exactly one update row
        assert (run_dir / "policy.json").exists()
        manifest = json.loads((run_dir / "manifest.json").read_text())
        assert manifest["mode"] == "train" and manifest["seed"] == 5
        assert "update    1" in capsys.readouterr().out

    def test_same_seed_reproduces_log(self, tmp_path):
        cfg = write_config(tmp_path, {"ppo": dict(FAST_PPO, max_updates=2),
                                      "scenario": SMALL_SCENARIO})

        def run(tag):
            out = tmp_path / tag
            assert main(["train", "--config", cfg, "--seed", "3",
                         "--output", str(out)]) == 0
            (run_dir,) = list(out.iterdir())
            rows = (run_dir / "training_log.csv").read_text().splitlines()
            # drop the wall-time column, the only non-deterministic field
            return [",".join(r.split(",")[:-1]) for r in rows]

        assert run("a") == run("b")


class TestEvalCli:
    def test_zero_episodes_reports_na(self, tmp_path, capsys):
        out = tmp_path / "runs"
        rc = main(["eval", "--policy", "oracle", "--episodes", "0",
                   "--output", str(out)])
        assert rc == 0
        assert "success_rate: n/a" in capsys.readouterr().out
        (run_dir,) = list(out.iterdir())
        table = (run_dir / "evaluation.csv").read_text().strip().splitlines()
        assert len(table) == 1  # header only

    def test_oracle_eval_writes_table(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"scenario": SMALL_SCENARIO})
        out = tmp_path / "runs"
        rc = main(["eval", "--policy", "oracle", "--episodes", "3",
                   "--config", cfg, "--seed", "1", "--output", str(out)])
        assert rc == 0
        assert "success_rate: 1.000" in capsys.readouterr().out


class TestReplayCli:
    def test_verify_round_trip(self, tmp_path, capsys):
        from aircombat.protocol import InProcTransport, LockstepClient
        from aircombat.protocol.service import Recorder, ServiceConfig, SimulationService
        from aircombat.scenario import ScenarioConfig

        path = tmp_path / "rec.jsonl"
        cfg = ServiceConfig(seed=2, scenario=ScenarioConfig(position_box=3000.0))
        svc = SimulationService(cfg, recorder=Recorder(path, cfg))
        ctl = LockstepClient(InProcTransport(svc))
        ctl.reset(seed=4)
        for _ in range(5):
            ctl.cycle([{"entity_id": "wingman", "altitude": 5000.0,
                        "speed": 350.0, "course": 0.5}], delta_ms=1000)
        svc.recorder.close()
        rc = main(["replay", "--recording", str(path), "--verify"])
        assert rc == 0
        assert "byte-identically" in capsys.readouterr().out


class TestBenchCli:
    def test_bench_reports_both_backends(self, capsys):
        rc = main(["bench", "--cycles", "300"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "x-realtime" in out and "pure" in out


class TestReplayPacing:
    def make_recording(self, tmp_path):
        from aircombat.protocol import InProcTransport, LockstepClient
        from aircombat.protocol.service import Recorder, ServiceConfig, SimulationService
        from aircombat.scenario import ScenarioConfig

        path = tmp_path / "rec.jsonl"
        cfg = ServiceConfig(seed=2, scenario=ScenarioConfig(position_box=3000.0))
        svc = SimulationService(cfg, recorder=Recorder(path, cfg))
        ctl = LockstepClient(InProcTransport(svc))
        ctl.reset(seed=4)
        for _ in range(20):
            ctl.cycle([], delta_ms=100)  # 2.0 s of sim time
        svc.recorder.close()
        return path

    def test_pace_spaces_frames_by_sim_time(self, tmp_path):
        import time

        from aircombat.protocol.recording import recorded_outbound_frames, stream_frames

        frames = recorded_outbound_frames(self.make_recording(tmp_path))
        got_fast, got_paced = [], []
        t0 = time.perf_counter()
        stream_frames(frames, got_fast.append, pace=0.0)
        fast_elapsed = time.perf_counter() - t0

        sleeps = []
        stream_frames(frames, got_paced.append, pace=10.0, sleep=sleeps.append)
        # same frame sequence either way; 2.0 s of sim at 10x -> 0.2 s of sleep
        assert [m.sequence for m in got_fast] == [m.sequence for m in got_paced]
        assert abs(sum(sleeps) - 0.2) < 1e-9
        assert fast_elapsed < 0.5
