"""Plan production: prompting the planner model and parsing its fenced
plan block into an ordered action sequence."""

from __future__ import annotations

import json
import re

from .core import (
    ACTION_NAMES_BY_ID,
    ActionSpec,
    ContentItem,
    EnvironmentContext,
    Plan,
    PromptArtifact,
    Task,
    Transcript,
    UnitRole,
    VALID_ACTION_IDS,
)
from .critic import RefinedInstructions
from .errors import InvariantError, PlanParseError
from .providers import Provider, ProviderRequest

_FENCED_BLOCK = re.compile(r"```(?:json)?\s*\n(.*?)```", re.DOTALL)

_ACTION_MENU = (
    "Available actions:\n"
    "  1 question answering: answers natural-language questions about the content\n"
    "  2 visual question answering: answers questions about text-rich visual content\n"
    "  3 title generation: creates a short headline from the input\n"
    "  4 categorization: assigns the content to predefined categories"
)

_BLOCK_DIRECTIVE = (
    "After deliberating, emit exactly one fenced block of the form:\n"
    "```json\n"
    '{"actions": [{"id": <action id>, "instructions": "<what to do>"}], '
    '"rationale": "<why>"}\n'
    "```"
)


def parse_plan(raw: str, allowed: frozenset[int]) -> Plan:
    """Extract the first fenced plan block from model output and validate
    its action ids. Pure: same raw + allowed always gives the same result."""
    match = _FENCED_BLOCK.search(raw)
    if match is None:
        raise PlanParseError("no plan block found in planner output", raw=raw)
    try:
        payload = json.loads(match.group(1))
    except json.JSONDecodeError as exc:
        raise PlanParseError(f"malformed plan block: {exc.msg}", raw=raw) from exc
    if not isinstance(payload, dict) or not isinstance(payload.get("actions"), list):
        raise PlanParseError("plan block must carry an 'actions' array", raw=raw)
    entries = payload["actions"]
    if not entries:
        raise PlanParseError("plan block contains an empty actions array", raw=raw)
    actions = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise PlanParseError(f"action {i} is not an object", raw=raw)
        action_id = entry.get("id")
        if not isinstance(action_id, int) or action_id not in VALID_ACTION_IDS:
            raise PlanParseError(f"unknown action id {action_id!r}", raw=raw)
        if action_id not in allowed:
            raise PlanParseError(f"disallowed action {action_id}", raw=raw)
        instructions = entry.get("instructions")
        if not isinstance(instructions, str) or not instructions.strip():
            raise PlanParseError(f"action {i} lacks instructions", raw=raw)
        actions.append(
            ActionSpec(action_id, ACTION_NAMES_BY_ID[action_id], instructions)
        )
    rationale = payload.get("rationale", "")
    if not isinstance(rationale, str):
        rationale = str(rationale)
    return Plan(actions=tuple(actions), rationale=rationale, raw=raw)


def _planning_request(
    env: EnvironmentContext,
    task: Task,
    reasoned: PromptArtifact,
    corrective: RefinedInstructions | None,
) -> ProviderRequest:
    segments: list[ContentItem] = [
        ContentItem.from_text(
            "Plan how to complete the task below as an ordered sequence of actions."
        ),
        ContentItem.from_text(_ACTION_MENU),
        ContentItem.from_text(
            "Allowed action ids: "
            + ", ".join(str(i) for i in sorted(task.permitted_actions()))
        ),
    ]
    if env.description:
        segments.append(ContentItem.from_text(f"Environment:\n{env.description}"))
    segments.extend(reasoned.segments)
    if corrective is not None:
        segments.append(
            ContentItem.from_text(
                f"Corrective instructions from plan review:\n{corrective.instructions}"
            )
        )
    segments.append(ContentItem.from_text(_BLOCK_DIRECTIVE))
    return ProviderRequest(
        system_role=reasoned.system_role,
        messages=tuple(segments),
    )


def plan(
    env: EnvironmentContext,
    task: Task,
    reasoned: PromptArtifact,
    provider: Provider,
    *,
    transcript: Transcript | None = None,
    operation: str = "plan",
    corrective: RefinedInstructions | None = None,
) -> Plan:
    """One provider call producing a validated Plan; the raw model output is
    kept verbatim on the result."""
    if task.goal not in "\n".join(reasoned.text_segments()):
        raise InvariantError("reasoned prompt does not carry the task goal")
    request = _planning_request(env, task, reasoned, corrective)
    response = provider.complete(
        request, transcript=transcript, unit=UnitRole.PLANNER, operation=operation
    )
    return parse_plan(response.text, task.permitted_actions())


def replan(
    env: EnvironmentContext,
    task: Task,
    refined: RefinedInstructions,
    provider: Provider,
    *,
    reasoned: PromptArtifact | None = None,
    transcript: Transcript | None = None,
) -> Plan:
    """plan() with the refiner's corrective instructions included in the
    prompt. When no freshly reasoned prompt is supplied, the original task
    prompt is rebuilt and reused."""
    if not refined.instructions.strip():
        raise InvariantError("refined instructions must be non-empty")
    if reasoned is None:
        segments = [ContentItem.from_text(task.goal), *task.inputs]
        reasoned = PromptArtifact(system_role="", segments=tuple(segments))
    return plan(
        env,
        task,
        reasoned,
        provider,
        transcript=transcript,
        operation="replan",
        corrective=refined,
    )
