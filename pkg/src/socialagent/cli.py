"""Operator entry point: solve one task, run a dataset evaluation, or
inspect the planning loop and its critic gate."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import canonical, engine, evaluation
from .actor import load_taxonomy, load_toolstore
from .core import EngineConfig, EnvironmentContext, ReasoningStrategy, StrategyKind, Task
from .errors import AgentError, ConfigError, MalformedInputError, TaskFailure
from .evaluation import RunSetup, TaskKind
from .providers import Backend

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_TASK = 2

_STRATEGY_FLAGS = {
    "none": StrategyKind.NONE,
    "cot": StrategyKind.ZERO_SHOT_COT,
    "car": StrategyKind.COT_AND_REFLECTION,
    "fewshot": StrategyKind.FEW_SHOT,
}


class _Parser(argparse.ArgumentParser):
    """Argument errors are configuration errors (exit 1, message on stderr)."""

    def error(self, message: str) -> None:  # noqa: A003
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> _Parser:
    parser = _Parser(prog="socialagent", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    def common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--config", required=True, help="run configuration file")
        sub.add_argument("--out", help="write the report here instead of stdout")
        sub.add_argument("--theta", type=float, help="override the critic gate threshold")
        sub.add_argument("--trials", type=int, help="override the planning trial budget")
        sub.add_argument(
            "--iterations", type=int, help="override the optimizer iteration count"
        )
        sub.add_argument(
            "--strategy",
            choices=sorted(_STRATEGY_FLAGS),
            help="override the reasoning strategy",
        )
        sub.add_argument(
            "--seed", type=int, help="override the mock embedding seed (determinism)"
        )

    solve = commands.add_parser("solve", help="run one task end to end")
    common(solve)
    solve.add_argument("--task", required=True, help="task file (canonical form)")

    evaluate = commands.add_parser("eval", help="evaluate a line-delimited dataset")
    common(evaluate)
    evaluate.add_argument("--dataset", required=True, help="records file (jsonl)")
    evaluate.add_argument("--kind", required=True, help="task kind: qa|vqa|title|categorize")
    evaluate.add_argument("--workers", type=int, default=4, help="worker pool size")

    plan = commands.add_parser("plan", help="run only the planning loop and show the gate")
    common(plan)
    plan.add_argument("--task", required=True, help="task file (canonical form)")
    return parser


def _load_setup(path: str) -> RunSetup:
    if not Path(path).exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        return evaluation.load_setup(path)
    except (MalformedInputError, AgentError) as exc:
        raise ConfigError(f"cannot load config {path}: {exc}") from exc


def _load_task(path: str) -> Task:
    if not Path(path).exists():
        raise ConfigError(f"task file not found: {path}")
    value = canonical.deserialize(Path(path).read_text(encoding="utf-8"))
    if not isinstance(value, Task):
        raise ConfigError(f"{path} does not contain a Task")
    return value


def _apply_overrides(setup: RunSetup, args: argparse.Namespace) -> RunSetup:
    config: EngineConfig = setup.engine
    changes = {}
    if args.theta is not None:
        changes["theta"] = args.theta
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.iterations is not None:
        changes["tgd_iterations"] = args.iterations
    if args.strategy is not None:
        kind = _STRATEGY_FLAGS[args.strategy]
        if kind is StrategyKind.FEW_SHOT:
            if config.strategy.kind is not StrategyKind.FEW_SHOT:
                raise ConfigError(
                    "--strategy fewshot requires few-shot examples in the config file"
                )
        else:
            changes["strategy"] = ReasoningStrategy(kind)
    if changes:
        config = replace(config, **changes)
    if args.seed is not None:
        bindings = {
            role: (
                replace(binding, embed_seed=args.seed)
                if binding.backend is Backend.MOCK
                else binding
            )
            for role, binding in config.role_bindings.items()
        }
        config = replace(config, role_bindings=bindings)
    return replace(setup, engine=config)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _stores(setup: RunSetup):
    tools = load_toolstore(setup.toolstore_path) if setup.toolstore_path else None
    taxonomy = load_taxonomy(setup.taxonomy_path) if setup.taxonomy_path else None
    return tools, taxonomy


def cmd_solve(args: argparse.Namespace) -> int:
    setup = _apply_overrides(_load_setup(args.config), args)
    task = _load_task(args.task)
    tools, taxonomy = _stores(setup)
    env = EnvironmentContext()
    try:
        response = engine.solve(
            task, env, setup.engine, tools=tools, taxonomy=taxonomy
        )
    except TaskFailure as exc:
        events = [
            {
                "seq": e.seq,
                "unit": e.unit.value,
                "operation": e.operation,
                "request_digest": e.request_digest,
                "response_digest": e.response_digest,
            }
            for e in (exc.transcript.events if exc.transcript else ())
        ]
        _emit(
            canonical.dumps(
                {"task_id": task.id, "error": str(exc), "transcript": events}
            ),
            args.out,
        )
        print(f"task failed: {exc}", file=sys.stderr)
        return EXIT_TASK
    _emit(engine.run_report(task, response), args.out)
    if response.error is not None:
        print(f"task failed: {response.error}", file=sys.stderr)
        return EXIT_TASK
    return EXIT_OK


def _gate_line(view: engine.TrialView) -> str:
    if view.gate is None:
        return "gate: not evaluated (final trial)"
    if view.gate.activate:
        return (
            f"gate: critic activated "
            f"(JSD {view.gate.divergence:.4f} >= θ {view.gate.theta:.4f})"
        )
    return f"gate: pass (JSD {view.gate.divergence:.4f} < θ)"


def cmd_plan(args: argparse.Namespace) -> int:
    setup = _apply_overrides(_load_setup(args.config), args)
    task = _load_task(args.task)
    env = EnvironmentContext()
    try:
        units = engine.build_units(setup.engine)
        role = engine.bootstrap_role(task, setup.engine, units)
        outcome = engine.run_trials(task, env, setup.engine, units, role)
    except AgentError as exc:
        print(f"task failed: {exc}", file=sys.stderr)
        return EXIT_TASK
    lines = [f"task: {task.id}"]
    for view in outcome.trial_views:
        lines += [
            f"--- trial {view.trial} ---",
            "plan A (planner):",
            view.plan_a_raw,
            "",
            "plan B (optimizer):",
            view.optimized_text,
            "",
            _gate_line(view),
        ]
        if view.critique is not None:
            verdict = "A" if view.critique.selected.value == "plan_a" else "B"
            lines.append(f"critique verdict: {verdict}")
            if view.critique.feedback:
                lines.append(f"critique feedback: {view.critique.feedback}")
        if view.refined is not None:
            lines.append(f"refined instructions: {view.refined.instructions}")
    lines.append(f"trials executed: {outcome.trials_executed}")
    lines.append(f"executed plan actions: {[a.action_id for a in outcome.executed.actions]}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _print_table(report: evaluation.MetricReport) -> None:
    agg = report.aggregates
    if report.kind == "categorize":
        print(f"kind: {report.kind}  n: {report.n}", file=sys.stderr)
        print("Level    Acc     F1      P       R", file=sys.stderr)
        for key, label in (("L1", "Level-1"), ("L2", "Level-2")):
            print(
                f"{label}  {agg[f'{key}_Acc']:<7.2f} {agg[f'{key}_F1']:<7.2f} "
                f"{agg[f'{key}_P']:<7.2f} {agg[f'{key}_R']:<7.2f}",
                file=sys.stderr,
            )
        return
    columns = list(agg)
    print(f"kind: {report.kind}  n: {report.n}", file=sys.stderr)
    print("  ".join(f"{c:<7}" for c in columns), file=sys.stderr)
    print("  ".join(f"{agg[c]:<7.2f}" for c in columns), file=sys.stderr)


def cmd_eval(args: argparse.Namespace) -> int:
    try:
        kind = TaskKind(args.kind)
    except ValueError:
        valid = ", ".join(k.value for k in TaskKind)
        raise ConfigError(f"unknown task kind {args.kind!r}; valid kinds: {valid}")
    setup = _apply_overrides(_load_setup(args.config), args)
    if not Path(args.dataset).exists():
        raise ConfigError(f"dataset file not found: {args.dataset}")
    records = evaluation.load_dataset(args.dataset, kind)
    tools, taxonomy = _stores(setup)
    report = evaluation.run_eval(
        records,
        kind,
        setup.engine,
        tools=tools,
        taxonomy=taxonomy,
        record_scripts=setup.record_scripts,
        workers=args.workers,
    )
    _emit(canonical.serialize(report), args.out)
    _print_table(report)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"solve": cmd_solve, "eval": cmd_eval, "plan": cmd_plan}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AgentError as exc:
        print(f"task failed: {exc}", file=sys.stderr)
        return EXIT_TASK


if __name__ == "__main__":
    raise SystemExit(main())
