from __future__ import annotations

import json

import pytest

from socialagent import canonical
from socialagent.cli import EXIT_CONFIG, EXIT_OK, EXIT_TASK, main
from socialagent.evaluation import load_setup
from socialagent.fixtures import fixture_path


def run_cli(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSolve:
    def test_solve_writes_golden_report_and_exits_zero(self, tmp_path, capsys):
        out = tmp_path / "run.report"
        code, _, _ = run_cli(
            capsys,
            "solve",
            "--config",
            str(fixture_path("solve_config.json")),
            "--task",
            str(fixture_path("example_task.json")),
            "--out",
            str(out),
        )
        assert code == EXIT_OK
        assert out.read_text(encoding="utf-8") == fixture_path(
            "golden_solve_report.json"
        ).read_text(encoding="utf-8")

    def test_solve_stdout_is_machine_parseable_without_out(self, capsys):
        code, stdout, _ = run_cli(
            capsys,
            "solve",
            "--config",
            str(fixture_path("solve_config.json")),
            "--task",
            str(fixture_path("example_task.json")),
        )
        assert code == EXIT_OK
        payload = json.loads(stdout)
        assert payload["task_id"] == "example-001"

    def test_missing_config_exits_1_and_names_path(self, capsys):
        code, _, stderr = run_cli(
            capsys,
            "solve",
            "--config",
            "/nonexistent/missing.cfg",
            "--task",
            str(fixture_path("example_task.json")),
        )
        assert code == EXIT_CONFIG
        assert "/nonexistent/missing.cfg" in stderr

    def test_plan_parse_failure_exits_2_with_partial_transcript(self, tmp_path, capsys):
        setup = load_setup(fixture_path("solve_config.json"))
        from dataclasses import replace

        from socialagent.core import UnitRole
        from socialagent.providers import MockScript

        bindings = dict(setup.engine.role_bindings)
        bindings[UnitRole.PLANNER] = replace(
            bindings[UnitRole.PLANNER], script=MockScript.of("no structure here")
        )
        broken = replace(setup, engine=replace(setup.engine, role_bindings=bindings))
        config_path = tmp_path / "broken.cfg"
        config_path.write_text(canonical.serialize(broken), encoding="utf-8")

        out = tmp_path / "run.report"
        code, _, stderr = run_cli(
            capsys,
            "solve",
            "--config",
            str(config_path),
            "--task",
            str(fixture_path("example_task.json")),
            "--out",
            str(out),
        )
        assert code == EXIT_TASK
        assert "task failed" in stderr
        payload = json.loads(out.read_text(encoding="utf-8"))
        assert payload["error"]
        assert any(e["operation"] == "plan" for e in payload["transcript"])


    def test_action_phase_failure_exits_2_with_report_written(self, tmp_path, capsys):
        # actor script runs dry after the first call: planning succeeds, the
        # action loop fails, partial results land in the report
        setup = load_setup(fixture_path("solve_config.json"))
        from dataclasses import replace

        from socialagent.core import UnitRole
        from socialagent.providers import MockScript

        bindings = dict(setup.engine.role_bindings)
        bindings[UnitRole.ACTOR] = replace(
            bindings[UnitRole.ACTOR], script=MockScript.of("ANSWER: only one")
        )
        broken = replace(setup, engine=replace(setup.engine, role_bindings=bindings))
        config_path = tmp_path / "truncated.cfg"
        config_path.write_text(canonical.serialize(broken), encoding="utf-8")

        out = tmp_path / "run.report"
        code, _, stderr = run_cli(
            capsys,
            "solve",
            "--config",
            str(config_path),
            "--task",
            str(fixture_path("example_task.json")),
            "--out",
            str(out),
        )
        assert code == EXIT_TASK
        assert "task failed" in stderr
        payload = json.loads(out.read_text(encoding="utf-8"))
        assert payload["error"] is not None
        assert "action 1" in payload["error"]

    def test_fewshot_flag_requires_examples_in_config(self, capsys):
        code, _, stderr = run_cli(
            capsys,
            "solve",
            "--config",
            str(fixture_path("solve_config.json")),
            "--task",
            str(fixture_path("example_task.json")),
            "--strategy",
            "fewshot",
        )
        assert code == EXIT_CONFIG
        assert "few-shot" in stderr


class TestEval:
    @pytest.mark.parametrize(
        "kind,dataset,config,golden",
        [
            ("qa", "mini_qa.jsonl", "qa_eval_config.json", "golden_qa_report.json"),
            (
                "title",
                "mini_title.jsonl",
                "title_eval_config.json",
                "golden_title_report.json",
            ),
            (
                "categorize",
                "mini_category.jsonl",
                "category_eval_config.json",
                "golden_category_report.json",
            ),
        ],
    )
    def test_eval_reproduces_golden_reports(
        self, capsys, tmp_path, kind, dataset, config, golden
    ):
        out = tmp_path / "report.json"
        code, _, stderr = run_cli(
            capsys,
            "eval",
            "--config",
            str(fixture_path(config)),
            "--dataset",
            str(fixture_path(dataset)),
            "--kind",
            kind,
            "--workers",
            "2",
            "--out",
            str(out),
        )
        assert code == EXIT_OK
        assert out.read_text(encoding="utf-8") == fixture_path(golden).read_text(
            encoding="utf-8"
        )
        assert f"kind: {kind}" in stderr  # human table on stderr

    def test_unknown_kind_exits_1_and_lists_valid_kinds(self, capsys):
        code, _, stderr = run_cli(
            capsys,
            "eval",
            "--config",
            str(fixture_path("qa_eval_config.json")),
            "--dataset",
            str(fixture_path("mini_qa.jsonl")),
            "--kind",
            "poetry",
        )
        assert code == EXIT_CONFIG
        for valid in ("qa", "vqa", "title", "categorize"):
            assert valid in stderr

    def test_workers_1_serial_execution(self, capsys):
        code, stdout, _ = run_cli(
            capsys,
            "eval",
            "--config",
            str(fixture_path("qa_eval_config.json")),
            "--dataset",
            str(fixture_path("mini_qa.jsonl")),
            "--kind",
            "qa",
            "--workers",
            "1",
        )
        assert code == EXIT_OK
        assert stdout == fixture_path("golden_qa_report.json").read_text(
            encoding="utf-8"
        )

    def test_malformed_dataset_line_cited(self, capsys, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"id": "a"}\n', encoding="utf-8")
        code, _, stderr = run_cli(
            capsys,
            "eval",
            "--config",
            str(fixture_path("qa_eval_config.json")),
            "--dataset",
            str(bad),
            "--kind",
            "qa",
        )
        assert code == EXIT_TASK
        assert "line 1" in stderr


class TestPlan:
    def test_divergent_plans_show_critic_activated(self, capsys):
        code, stdout, _ = run_cli(
            capsys,
            "plan",
            "--config",
            str(fixture_path("plan_divergent_config.json")),
            "--task",
            str(fixture_path("plan_task.json")),
        )
        assert code == EXIT_OK
        assert "plan A (planner):" in stdout
        assert "plan B (optimizer):" in stdout
        assert "critic activated" in stdout
        assert "critique verdict: A" in stdout

    def test_identical_plans_show_gate_pass_line(self, capsys):
        code, stdout, _ = run_cli(
            capsys,
            "plan",
            "--config",
            str(fixture_path("plan_identical_config.json")),
            "--task",
            str(fixture_path("plan_task.json")),
        )
        assert code == EXIT_OK
        assert "gate: pass (JSD 0.0000 < θ)" in stdout

    def test_theta_zero_always_activates_on_differing_plans(self, capsys, tmp_path):
        # same scripts as the identical fixture, but a rewritten plan B and θ=0
        setup = load_setup(fixture_path("plan_divergent_config.json"))
        code, stdout, _ = run_cli(
            capsys,
            "plan",
            "--config",
            str(fixture_path("plan_divergent_config.json")),
            "--task",
            str(fixture_path("plan_task.json")),
            "--theta",
            "0",
        )
        assert code == EXIT_OK
        assert "critic activated" in stdout
        del setup


class TestConfigRoundTrip:
    def test_dumped_effective_config_reloads_to_identical_behavior(
        self, capsys, tmp_path
    ):
        setup = load_setup(fixture_path("solve_config.json"))
        dumped = tmp_path / "effective.cfg"
        dumped.write_text(canonical.serialize(setup), encoding="utf-8")
        outputs = []
        for config in (fixture_path("solve_config.json"), dumped):
            out = tmp_path / f"report-{len(outputs)}.json"
            code, _, _ = run_cli(
                capsys,
                "solve",
                "--config",
                str(config),
                "--task",
                str(fixture_path("example_task.json")),
                "--out",
                str(out),
            )
            assert code == EXIT_OK
            outputs.append(out.read_text(encoding="utf-8"))
        assert outputs[0] == outputs[1]

    def test_seed_override_accepted(self, capsys):
        code, stdout, _ = run_cli(
            capsys,
            "plan",
            "--config",
            str(fixture_path("plan_identical_config.json")),
            "--task",
            str(fixture_path("plan_task.json")),
            "--seed",
            "7",
        )
        assert code == EXIT_OK
        # identical texts embed identically for any seed
        assert "gate: pass (JSD 0.0000 < θ)" in stdout
