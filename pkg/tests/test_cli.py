#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
命令行测试
"""

import json
from pathlib import Path

import pytest

from compete_rl.cli import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, build_parser, parse_and_dispatch, spec_overrides
from compete_rl.harness.runner import CHECKPOINT_FILE, METRICS_FILE

from conftest import tiny_spec_data


@pytest.fixture
def config_file(tmp_path, output_dir):
    """写一个小实验配置，返回路径"""
    def factory(**overrides) -> str:
        path = tmp_path / "config.json"
        path.write_text(json.dumps(tiny_spec_data(output_dir, **overrides)), encoding="utf-8")
        return str(path)
    return factory


class TestUsageErrors:
    """测试用法错误的退出码"""

    def test_missing_config(self, tmp_path, capsys):
        code = parse_and_dispatch(["train", "--config", str(tmp_path / "missing.json")])
        assert code == EXIT_USAGE
        assert "config not found" in capsys.readouterr().err

    def test_no_command(self):
        assert parse_and_dispatch([]) == EXIT_USAGE

    def test_unknown_mode(self, config_file, capsys):
        assert parse_and_dispatch(["train", "--config", config_file(), "--mode", "Sh-Foo"]) == EXIT_USAGE
        assert "Sh-Foo" in capsys.readouterr().err

    def test_mode_agent_conflict(self, config_file):
        code = parse_and_dispatch(["train", "--config", config_file(), "--mode", "3A-Sh-Decent", "--agents", "2"])
        assert code == EXIT_USAGE

    def test_invalid_config_values(self, config_file, capsys):
        assert parse_and_dispatch(["train", "--config", config_file(seeds=[])]) == EXIT_USAGE
        assert "seeds" in capsys.readouterr().err

    def test_unknown_key(self, config_file):
        assert parse_and_dispatch(["train", "--config", config_file(learning_rate=0.1)]) == EXIT_USAGE

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        assert parse_and_dispatch(["train", "--config", str(path)]) == EXIT_USAGE

    def test_bad_agent_list(self, config_file):
        assert parse_and_dispatch(["compare", "--config", config_file(), "--modes", "Sh-Decent",
                                   "--agents", "1,x"]) == EXIT_USAGE

    def test_missing_checkpoint(self, tmp_path):
        assert parse_and_dispatch(["eval", "--checkpoint", str(tmp_path / "none.json")]) == EXIT_USAGE

    def test_missing_summary(self, tmp_path):
        assert parse_and_dispatch(["plot", "--summary", str(tmp_path / "summary.csv")]) == EXIT_USAGE

    def test_corrupt_checkpoint(self, tmp_path, capsys):
        path = tmp_path / "checkpoint.json"
        path.write_text("{broken", encoding="utf-8")
        assert parse_and_dispatch(["eval", "--checkpoint", str(path)]) == EXIT_USAGE
        assert "checkpoint.json" in capsys.readouterr().err

    def test_summary_missing_columns(self, tmp_path):
        path = tmp_path / "summary.csv"
        path.write_text("env_kind,mode\nPointRacer,SA\n", encoding="utf-8")
        assert parse_and_dispatch(["plot", "--summary", str(path)]) == EXIT_USAGE


class TestOverrides:
    """测试命令行覆盖项"""

    def test_mode_with_prefix_sets_agents(self):
        args = build_parser().parse_args(["train", "--config", "c.json", "--mode", "3A-Sh-Decent-Comp"])
        overrides = spec_overrides(args)
        assert overrides["n_agents"] == 3
        assert overrides["flags"]["aux_obs"] == "competitive"

    def test_seed_and_output(self):
        args = build_parser().parse_args(["train", "--config", "c.json", "--seed", "4", "--output", "out"])
        assert spec_overrides(args) == {"seeds": [4], "output_dir": "out"}

    def test_sa_mode(self):
        args = build_parser().parse_args(["train", "--config", "c.json", "--mode", "SA"])
        assert spec_overrides(args)["n_agents"] == 1

    def test_flag_config_equivalence(self, tmp_path, config_file, output_dir):
        """命令行覆盖与等价配置文件产生逐字节相同的指标"""
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert parse_and_dispatch(["train", "--config", config_file(), "--mode", "Sh-Decent-Comp",
                                   "--agents", "2", "--output", str(out_a)]) == EXIT_OK
        equivalent = config_file(n_agents=2, flags={"aux_obs": "competitive"}, output_dir=str(out_b))
        assert parse_and_dispatch(["train", "--config", equivalent]) == EXIT_OK
        rel = Path("tiny") / "Sh-Decent-Comp_N2" / "seed0" / METRICS_FILE
        assert (out_a / rel).read_bytes() == (out_b / rel).read_bytes()


class TestCommands:
    """测试各子命令"""

    def test_train_and_eval_padded(self, config_file, output_dir, capsys):
        """N=3 竞争模式训练的检查点在单智能体 PointRacer 上评估"""
        path = config_file(total_iterations=1)
        assert parse_and_dispatch(["train", "--config", path, "--mode", "Sh-Decent-Comp", "--agents", "3"]) == EXIT_OK
        checkpoint = Path(output_dir) / "tiny" / "Sh-Decent-Comp_N3" / "seed0" / CHECKPOINT_FILE
        assert checkpoint.is_file()
        capsys.readouterr()

        code = parse_and_dispatch(["eval", "--checkpoint", str(checkpoint), "--env", "PointRacer", "--episodes", "3"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "3A-Sh-Decent-Comp on PointRacer" in out
        assert "±" in out

    def test_eval_agent_index(self, config_file, output_dir):
        path = config_file(total_iterations=1)
        assert parse_and_dispatch(["train", "--config", path, "--mode", "Sp-Decent-Comp", "--agents", "2"]) == EXIT_OK
        checkpoint = Path(output_dir) / "tiny" / "Sp-Decent-Comp_N2" / "seed0" / CHECKPOINT_FILE
        assert parse_and_dispatch(["eval", "--checkpoint", str(checkpoint), "--agent", "1"]) == EXIT_OK
        assert parse_and_dispatch(["eval", "--checkpoint", str(checkpoint), "--agent", "2"]) == EXIT_USAGE

    def test_train_reports_failed_seed(self, config_file, monkeypatch):
        import compete_rl.harness.runner as runner_module
        from compete_rl.models.errors import DivergenceError

        def diverge(spec, seed, callback=None):
            raise DivergenceError("non-finite reward", iteration=0)

        monkeypatch.setattr(runner_module, "train", diverge)
        assert parse_and_dispatch(["train", "--config", config_file()]) == EXIT_RUNTIME

    def test_runtime_value_error_is_not_usage(self, config_file, monkeypatch, capsys):
        """训练内部抛出的 ValueError 属于运行时错误"""
        import compete_rl.harness.runner as runner_module

        def broken(spec):
            raise ValueError("矩阵形状不一致")

        monkeypatch.setattr(runner_module, "run_experiment", broken)
        assert parse_and_dispatch(["train", "--config", config_file()]) == EXIT_RUNTIME
        assert "矩阵形状不一致" in capsys.readouterr().err

    def test_compare_and_plot(self, config_file, output_dir, tmp_path, capsys):
        path = config_file()
        code = parse_and_dispatch(["compare", "--config", path, "--modes", "Sh-Decent,Sh-Decent-Comp",
                                   "--agents", "1,2", "--workers", "1"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "2A-Sh-Decent-Comp" in out

        summary = Path(output_dir) / "tiny" / "summary.csv"
        assert summary.is_file()
        report_dir = tmp_path / "report"
        assert parse_and_dispatch(["plot", "--summary", str(summary), "--output", str(report_dir)]) == EXIT_OK
        assert (report_dir / "report.md").is_file()
        assert (report_dir / "PointRacer_reward.svg").is_file()

    def test_compare_bad_mode(self, config_file):
        code = parse_and_dispatch(["compare", "--config", config_file(), "--modes", "Sh-Decent,Nope",
                                   "--agents", "2"])
        assert code == EXIT_USAGE

    def test_selftest_quick(self, capsys):
        assert parse_and_dispatch(["selftest", "--quick"]) == EXIT_OK
        assert "6/6" in capsys.readouterr().out

    @pytest.mark.slow
    def test_selftest_full(self):
        assert parse_and_dispatch(["selftest"]) == EXIT_OK
