"""End-to-end task solving: role bootstrap, the trials loop (reason, plan,
optimize, gate, criticize, refine), then per-action execution with a
feedback-and-retry pass for every action."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import canonical, planner as planner_mod
from .actor import ActionResult, CategoryTaxonomy, ToolStore, act
from .core import (
    ContentItem,
    EngineConfig,
    EnvironmentContext,
    Plan,
    PromptArtifact,
    Provenance,
    Task,
    Transcript,
    UnitRole,
    validate_task,
)
from .critic import Critique, PlanChoice, RefinedInstructions, criticize, refine
from .divergence import GateDecision, should_criticize
from .errors import (
    AgentError,
    BindingCollisionError,
    ConfigError,
    InvariantError,
    PlanParseError,
    TaskFailure,
)
from .optimizer import TGDConfig, TextLoss, Variable, optimize, resolved_value
from .providers import Provider, ProviderRequest, build_provider
from .reasoner import reason

BOOTSTRAP_SYSTEM_ROLE = (
    "You write precise system-role descriptions for task-solving assistants."
)

# Units whose model must differ from the role-writer's.
_ISOLATED_UNITS = (
    UnitRole.REASONER,
    UnitRole.PLANNER,
    UnitRole.OPTIMIZER,
    UnitRole.CRITIC,
    UnitRole.REFINER,
    UnitRole.ACTOR,
)


@dataclass(frozen=True)
class RoleDescription:
    text: str
    generated_by: str = ""


@dataclass(frozen=True)
class TaskResponse:
    results: tuple[ActionResult, ...]
    plan_used: Plan
    trials_executed: int
    transcript: Transcript
    gate_decisions: tuple[GateDecision, ...] = ()
    critiques: tuple[Critique, ...] = ()
    error: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "results", tuple(self.results))
        object.__setattr__(self, "gate_decisions", tuple(self.gate_decisions))
        object.__setattr__(self, "critiques", tuple(self.critiques))


@dataclass
class UnitSet:
    """One provider instance per unit role, fresh for each run."""

    providers: dict[UnitRole, Provider] = field(default_factory=dict)

    def __getitem__(self, role: UnitRole) -> Provider:
        return self.providers[role]


def build_units(config: EngineConfig) -> UnitSet:
    missing = [role.value for role in UnitRole if role not in config.role_bindings]
    if missing:
        raise ConfigError(f"missing role bindings: {', '.join(missing)}")
    return UnitSet({role: build_provider(cfg) for role, cfg in config.role_bindings.items()})


def _check_role_isolation(config: EngineConfig) -> None:
    writer = config.role_bindings[UnitRole.ROLE_WRITER].model_name
    for role in _ISOLATED_UNITS:
        if config.role_bindings[role].model_name == writer:
            raise BindingCollisionError(
                f"role-writer model {writer!r} is also bound to {role.value}"
            )


def bootstrap_role(
    task: Task,
    config: EngineConfig,
    units: UnitSet,
    *,
    transcript: Transcript | None = None,
) -> RoleDescription:
    """One role-writer call generating the system role installed on every
    subsequent prompt of this run. The role-writer must not share a model
    with any other unit."""
    _check_role_isolation(config)
    provider = units[UnitRole.ROLE_WRITER]
    request = ProviderRequest(
        system_role=BOOTSTRAP_SYSTEM_ROLE,
        messages=(
            ContentItem.from_text(
                "Write a concise system-role description for an assistant that "
                "will solve the following task. Respond with the role text only."
            ),
            ContentItem.from_text(f"Task:\n{task.goal}"),
        ),
        sampling=provider.config.sampling,
    )
    response = provider.complete(
        request, transcript=transcript, unit=UnitRole.ROLE_WRITER, operation="bootstrap_role"
    )
    return RoleDescription(text=response.text.strip(), generated_by=provider.config.model_name)


def _as_planning_segment(item: ContentItem) -> ContentItem:
    """Planning-stage view of one task input: image inputs become textual
    references so any text model can plan over them; the actor gets the
    real image content later."""
    if item.image is None:
        return item
    return ContentItem.from_text(
        f"[image input: {item.image.location} ({item.image.media_type})]"
    )


def create_task_prompt(
    task: Task,
    env: EnvironmentContext,
    role_text: str,
    refined: RefinedInstructions | None = None,
) -> PromptArtifact:
    """Deterministic prompt templating from the task (and, on replan trials,
    the refiner's corrective instructions)."""
    segments: list[ContentItem] = []
    if env.description:
        segments.append(ContentItem.from_text(f"Environment:\n{env.description}"))
    segments.append(ContentItem.from_text(task.goal))
    segments.extend(_as_planning_segment(item) for item in task.inputs)
    provenance = Provenance.USER_TASK
    if refined is not None:
        segments.append(
            ContentItem.from_text(
                f"Corrective instructions from plan review:\n{refined.instructions}"
            )
        )
        provenance = Provenance.REFINER_OUTPUT
    return PromptArtifact(
        system_role=role_text, segments=tuple(segments), provenance=provenance
    )


def create_action_prompt(spec, role_text: str) -> PromptArtifact:
    """Deterministic prompt templating from one plan action."""
    segments = [ContentItem.from_text(f"Your current action:\n{spec.instructions}")]
    segments.extend(spec.inputs)
    return PromptArtifact(
        system_role=role_text,
        segments=tuple(segments),
        provenance=Provenance.PLANNER_OUTPUT,
    )


@dataclass(frozen=True)
class TrialView:
    """What one planning trial produced, for inspection and reporting."""

    trial: int
    plan_a_raw: str
    optimized_text: str
    gate: GateDecision | None = None
    critique: Critique | None = None
    refined: RefinedInstructions | None = None


@dataclass(frozen=True)
class TrialsOutcome:
    executed: Plan
    plan_a: Plan
    optimized_text: str
    plan_b: Plan | None
    trials_executed: int
    gate_decisions: tuple[GateDecision, ...]
    critiques: tuple[Critique, ...]
    refinements: tuple[RefinedInstructions, ...]
    trial_views: tuple[TrialView, ...] = ()


def run_trials(
    task: Task,
    env: EnvironmentContext,
    config: EngineConfig,
    units: UnitSet,
    role: RoleDescription,
    *,
    transcript: Transcript | None = None,
) -> TrialsOutcome:
    """The planning trials loop. Each trial reasons, plans, and optimizes;
    on non-final trials the divergence gate decides whether the critic and
    refiner run (feeding a replan) or the loop breaks with the optimized
    plan. The final trial always exits with the best available plan."""
    tgd = TGDConfig(
        iterations=config.tgd_iterations,
        step_directive=config.step_directive,
        early_stop_marker=config.early_stop_marker,
    )
    gates: list[GateDecision] = []
    critiques: list[Critique] = []
    refinements: list[RefinedInstructions] = []
    views: list[TrialView] = []
    pending: RefinedInstructions | None = None
    prompt = create_task_prompt(task, env, role.text)

    executed: Plan | None = None
    plan_a: Plan | None = None
    optimized_text = ""
    plan_b: Plan | None = None
    trials_executed = 0

    for trial in range(config.trials):
        trials_executed = trial + 1
        reasoned = reason(
            prompt, config.strategy, units[UnitRole.REASONER], transcript=transcript
        )
        operation = "plan" if pending is None else "replan"
        plan_a = planner_mod.plan(
            env,
            task,
            reasoned,
            units[UnitRole.PLANNER],
            transcript=transcript,
            operation=operation,
            corrective=pending,
        )
        pending = None
        variable = Variable(value=plan_a.raw, role_note="plan under optimization")
        optimized = optimize(
            variable,
            reasoned,
            TextLoss(context=(task.goal,)),
            tgd,
            units[UnitRole.OPTIMIZER],
            transcript=transcript,
        )
        optimized_text = resolved_value(optimized, config.early_stop_marker)
        try:
            plan_b = planner_mod.parse_plan(optimized_text, task.permitted_actions())
        except PlanParseError:
            plan_b = None

        if trial >= config.trials - 1:
            executed = plan_b if plan_b is not None else plan_a
            views.append(TrialView(trial, plan_a.raw, optimized_text))
            break

        gate = should_criticize(
            plan_a.raw,
            optimized_text,
            units[UnitRole.CRITIC],
            config.theta,
            transcript=transcript,
        )
        gates.append(gate)
        if not gate.activate:
            executed = plan_b if plan_b is not None else plan_a
            views.append(TrialView(trial, plan_a.raw, optimized_text, gate=gate))
            break
        if plan_b is None:
            # The optimizer produced no usable plan; run with the existing one.
            executed = plan_a
            views.append(TrialView(trial, plan_a.raw, optimized_text, gate=gate))
            break
        critique = criticize(
            env,
            task,
            plan_a,
            plan_b,
            units[UnitRole.CRITIC],
            divergence=gate.divergence,
            system_role=role.text,
            transcript=transcript,
        )
        critiques.append(critique)
        if not critique.actionable:
            executed = plan_a if critique.selected is PlanChoice.PLAN_A else plan_b
            views.append(
                TrialView(trial, plan_a.raw, optimized_text, gate=gate, critique=critique)
            )
            break
        refined = refine(
            env,
            task,
            critique,
            units[UnitRole.REFINER],
            system_role=role.text,
            transcript=transcript,
        )
        refinements.append(refined)
        views.append(
            TrialView(
                trial, plan_a.raw, optimized_text, gate=gate, critique=critique, refined=refined
            )
        )
        pending = refined
        prompt = create_task_prompt(task, env, role.text, refined=refined)

    assert executed is not None and plan_a is not None
    return TrialsOutcome(
        executed=executed,
        plan_a=plan_a,
        optimized_text=optimized_text,
        plan_b=plan_b,
        trials_executed=trials_executed,
        gate_decisions=tuple(gates),
        critiques=tuple(critiques),
        refinements=tuple(refinements),
        trial_views=tuple(views),
    )


def _bind_inputs(plan: Plan, task: Task) -> Plan:
    actions = tuple(
        action if action.inputs else replace(action, inputs=task.inputs)
        for action in plan.actions
    )
    return Plan(actions=actions, rationale=plan.rationale, raw=plan.raw)


def execute_actions(
    plan: Plan,
    role: RoleDescription,
    env: EnvironmentContext,
    config: EngineConfig,
    units: UnitSet,
    *,
    task: Task,
    tools: ToolStore | None = None,
    taxonomy: CategoryTaxonomy | None = None,
    transcript: Transcript | None = None,
) -> tuple[tuple[ActionResult, ...], str | None]:
    """Run every plan action in order: reason, act, optimize the response,
    then act again with the optimizer's feedback as revision context. An
    action failure aborts the rest; completed results are returned with the
    error marker."""
    tgd = TGDConfig(
        iterations=config.tgd_iterations,
        step_directive=config.step_directive,
        early_stop_marker=config.early_stop_marker,
    )
    results: list[ActionResult] = []
    for index, spec in enumerate(plan.actions):
        try:
            prompt = create_action_prompt(spec, role.text)
            reasoned = reason(
                prompt, config.strategy, units[UnitRole.REASONER], transcript=transcript
            )
            first = act(
                spec,
                reasoned,
                tools,
                units[UnitRole.ACTOR],
                taxonomy=taxonomy,
                transcript=transcript,
            )
            variable = Variable(
                value=first.answer, role_note=f"response for action {spec.action_id}"
            )
            optimized = optimize(
                variable,
                reasoned,
                TextLoss(context=(task.goal, spec.instructions)),
                tgd,
                units[UnitRole.OPTIMIZER],
                transcript=transcript,
            )
            revision = resolved_value(optimized, config.early_stop_marker)
            final = act(
                spec,
                reasoned,
                tools,
                units[UnitRole.ACTOR],
                taxonomy=taxonomy,
                revision=revision,
                transcript=transcript,
            )
            results.append(final)
        except AgentError as exc:
            return tuple(results), f"action {index + 1} ({spec.name.value}): {exc}"
    return tuple(results), None


def solve(
    task: Task,
    env: EnvironmentContext,
    config: EngineConfig,
    *,
    units: UnitSet | None = None,
    tools: ToolStore | None = None,
    taxonomy: CategoryTaxonomy | None = None,
    transcript: Transcript | None = None,
) -> TaskResponse:
    """Solve one task end to end, returning the accumulated action results
    and the full invocation transcript. Failures inside the planning loop
    abort with the partial transcript attached."""
    report = validate_task(task)
    if not report.ok:
        raise InvariantError("; ".join(report.problems))
    units = units or build_units(config)
    transcript = transcript or Transcript()
    try:
        role = bootstrap_role(task, config, units, transcript=transcript)
        outcome = run_trials(task, env, config, units, role, transcript=transcript)
    except BindingCollisionError:
        raise
    except AgentError as exc:
        raise TaskFailure(str(exc), transcript=transcript) from exc
    executed = _bind_inputs(outcome.executed, task)
    results, error = execute_actions(
        executed,
        role,
        env,
        config,
        units,
        task=task,
        tools=tools,
        taxonomy=taxonomy,
        transcript=transcript,
    )
    return TaskResponse(
        results=results,
        plan_used=executed,
        trials_executed=outcome.trials_executed,
        transcript=transcript,
        gate_decisions=outcome.gate_decisions,
        critiques=outcome.critiques,
        error=error,
    )


def run_report(task: Task, response: TaskResponse) -> str:
    """Canonical, timestamp-free run report suitable for golden-file
    comparison; timing is reported as logical event counts."""
    events = [
        {
            "seq": e.seq,
            "unit": e.unit.value,
            "operation": e.operation,
            "request_digest": e.request_digest,
            "response_digest": e.response_digest,
        }
        for e in response.transcript.events
    ]
    report = {
        "task_id": task.id,
        "plan": canonical.to_jsonable(response.plan_used),
        "results": [canonical.to_jsonable(r) for r in response.results],
        "gate_decisions": [canonical.to_jsonable(g) for g in response.gate_decisions],
        "critiques": [canonical.to_jsonable(c) for c in response.critiques],
        "trials_executed": response.trials_executed,
        "error": response.error,
        "timing": {"transcript_events": len(events)},
        "transcript": events,
    }
    return canonical.dumps(report)


canonical.register(RoleDescription, TaskResponse, TrialView, TrialsOutcome)
