"""Execution of the four content-analysis actions over multimodal inputs,
with a static read-only knowledge store the prompts can draw on."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from . import canonical
from .core import (
    ActionName,
    ActionSpec,
    ContentItem,
    PromptArtifact,
    Transcript,
    UnitRole,
)
from .errors import ActionParseError, InvariantError, WrongActionError
from .providers import Provider, ProviderRequest

ANSWER_PREFIX = "ANSWER:"
TITLE_PREFIX = "TITLE:"
CATEGORY_PREFIX = "CATEGORY:"

# Instructions may request store facts with a line "KNOWLEDGE: <query>".
_KNOWLEDGE_DIRECTIVE = re.compile(r"^KNOWLEDGE:\s*(.+)$", re.MULTILINE)


@dataclass(frozen=True)
class ToolEntry:
    title: str
    facts: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "facts", tuple(self.facts))


@dataclass(frozen=True)
class ToolStore:
    """Static factual knowledge, immutable after load."""

    entries: dict[str, ToolEntry] = field(default_factory=dict)
    loaded_from: str = ""


@dataclass(frozen=True)
class CategoryPair:
    level1: str
    level2: str


@dataclass(frozen=True)
class CategoryTaxonomy:
    """Predefined categories: top-level names plus their children."""

    level1: tuple[str, ...]
    level2: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "level1", tuple(self.level1))
        object.__setattr__(
            self, "level2", {k: tuple(v) for k, v in self.level2.items()}
        )
        if not self.level1:
            raise InvariantError("taxonomy requires at least one level-1 category")
        if len(set(self.level1)) != len(self.level1):
            raise InvariantError("level-1 names must be unique")
        unknown_parents = set(self.level2) - set(self.level1)
        if unknown_parents:
            raise InvariantError(f"level-2 parents not in level-1: {sorted(unknown_parents)}")
        seen: dict[str, str] = {}
        for parent, children in self.level2.items():
            for child in children:
                if child in seen:
                    raise InvariantError(
                        f"category {child!r} appears under both {seen[child]!r} and {parent!r}"
                    )
                seen[child] = parent

    def children(self, level1_name: str) -> tuple[str, ...]:
        return self.level2.get(level1_name, ())

    def is_hierarchical(self) -> bool:
        return any(self.level2.get(name) for name in self.level1)


@dataclass(frozen=True)
class ActionResult:
    action_id: int
    answer: str
    structured: CategoryPair | str | None = None
    provider_calls: int = 0

    def __post_init__(self) -> None:
        if not self.answer.strip():
            raise InvariantError("action result answer must be non-empty")


def load_toolstore(path: str | Path) -> ToolStore:
    """Read a knowledge store from its canonical text file."""
    value = canonical.deserialize(Path(path).read_text(encoding="utf-8"))
    if not isinstance(value, ToolStore):
        raise InvariantError(f"{path} does not contain a ToolStore")
    return ToolStore(entries=dict(value.entries), loaded_from=str(path))


def load_taxonomy(path: str | Path) -> CategoryTaxonomy:
    value = canonical.deserialize(Path(path).read_text(encoding="utf-8"))
    if not isinstance(value, CategoryTaxonomy):
        raise InvariantError(f"{path} does not contain a CategoryTaxonomy")
    return value


def lookup(tools: ToolStore, query: str) -> list[str]:
    """Facts from every entry whose title or text contains the query,
    case-insensitively. Read-only; misses return an empty list."""
    needle = query.lower()
    facts: list[str] = []
    for entry in tools.entries.values():
        if needle in entry.title.lower() or any(needle in f.lower() for f in entry.facts):
            facts.extend(entry.facts)
    return facts


def _knowledge_segments(spec: ActionSpec, tools: ToolStore | None) -> tuple[ContentItem, ...]:
    if tools is None:
        return ()
    match = _KNOWLEDGE_DIRECTIVE.search(spec.instructions)
    if match is None:
        return ()
    facts = lookup(tools, match.group(1).strip())
    if not facts:
        return ()
    return (ContentItem.from_text("Relevant known facts:\n" + "\n".join(facts)),)


def _action_prompt(
    spec: ActionSpec,
    reasoned: PromptArtifact,
    expected: ActionName,
    directive: str,
    extra: tuple[ContentItem, ...] = (),
) -> PromptArtifact:
    if spec.name is not expected:
        raise WrongActionError(
            f"builder for {expected.value} got a {spec.name.value} action"
        )
    segments = (
        reasoned.segments
        + (ContentItem.from_text(f"Action instructions:\n{spec.instructions}"),)
        + spec.inputs
        + extra
        + (ContentItem.from_text(directive),)
    )
    return PromptArtifact(
        system_role=reasoned.system_role,
        segments=segments,
        strategy=reasoned.strategy,
        provenance=reasoned.provenance,
    )


def build_qa_prompt(spec: ActionSpec, reasoned: PromptArtifact) -> PromptArtifact:
    return _action_prompt(
        spec,
        reasoned,
        ActionName.QA,
        f"Respond with a final line of the form {ANSWER_PREFIX} <answer>.",
    )


def build_vqa_prompt(spec: ActionSpec, reasoned: PromptArtifact) -> PromptArtifact:
    return _action_prompt(
        spec,
        reasoned,
        ActionName.VQA,
        f"Respond with a final line of the form {ANSWER_PREFIX} <answer>.",
    )


def build_title_prompt(spec: ActionSpec, reasoned: PromptArtifact) -> PromptArtifact:
    return _action_prompt(
        spec,
        reasoned,
        ActionName.TITLE_GENERATION,
        f"Respond with a final line of the form {TITLE_PREFIX} <title>.",
    )


def _category_prompt(
    spec: ActionSpec,
    reasoned: PromptArtifact,
    labels: tuple[str, ...],
    extra: tuple[ContentItem, ...] = (),
) -> PromptArtifact:
    return _action_prompt(
        spec,
        reasoned,
        ActionName.CATEGORIZATION,
        f"Respond with a final line of the form {CATEGORY_PREFIX} <category>, "
        "choosing exactly one of: " + ", ".join(labels) + ".",
        extra=extra,
    )


def _extract_line(text: str, prefix: str) -> str | None:
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.upper().startswith(prefix):
            return stripped[len(prefix) :].strip()
    return None


def _complete_prompt(
    prompt: PromptArtifact,
    provider: Provider,
    transcript: Transcript | None,
) -> str:
    return provider.complete(
        ProviderRequest(
            system_role=prompt.system_role,
            messages=prompt.segments,
            sampling=provider.config.sampling,
        ),
        transcript=transcript,
        unit=UnitRole.ACTOR,
        operation="act",
    ).text


def categorize_two_level(
    items: tuple[ContentItem, ...],
    taxonomy: CategoryTaxonomy,
    reasoned: PromptArtifact,
    provider: Provider,
    *,
    spec: ActionSpec | None = None,
    revision: str | None = None,
    transcript: Transcript | None = None,
) -> CategoryPair:
    """Two provider calls: classify into a level-1 category, then into one
    of that category's children. The result is always parent/child."""
    if spec is None:
        spec = ActionSpec.for_id(4, "Classify the content.", tuple(items))
    extra = (
        (ContentItem.from_text(f"Revision feedback from a prior attempt:\n{revision}"),)
        if revision
        else ()
    )
    first = _complete_prompt(
        _category_prompt(spec, reasoned, taxonomy.level1, extra), provider, transcript
    )
    level1 = _extract_line(first, CATEGORY_PREFIX)
    if level1 is None:
        raise ActionParseError(f"no {CATEGORY_PREFIX} line in output: {first[:80]!r}")
    if level1 not in taxonomy.level1:
        raise ActionParseError(f"unknown category {level1!r}")
    children = taxonomy.children(level1)
    if not children:
        raise ActionParseError(f"category {level1!r} has no second-level children")
    second = _complete_prompt(
        _category_prompt(spec, reasoned, children, extra), provider, transcript
    )
    level2 = _extract_line(second, CATEGORY_PREFIX)
    if level2 is None:
        raise ActionParseError(f"no {CATEGORY_PREFIX} line in output: {second[:80]!r}")
    if level2 not in children:
        raise ActionParseError(f"{level2!r} is not a child of {level1}")
    return CategoryPair(level1=level1, level2=level2)


def act(
    spec: ActionSpec,
    reasoned: PromptArtifact,
    tools: ToolStore | None,
    provider: Provider,
    *,
    taxonomy: CategoryTaxonomy | None = None,
    revision: str | None = None,
    transcript: Transcript | None = None,
) -> ActionResult:
    """Execute one action: build its prompt, call the provider, parse the
    action-specific answer. Categorization against a hierarchical taxonomy
    makes two calls; every other action makes exactly one."""
    knowledge = _knowledge_segments(spec, tools)
    extra = knowledge
    if revision:
        extra = extra + (
            ContentItem.from_text(
                f"Revision feedback from a prior attempt:\n{revision}\n"
                "Produce an improved response."
            ),
        )

    if spec.name is ActionName.CATEGORIZATION:
        if taxonomy is None:
            raise InvariantError("categorization requires a taxonomy")
        if taxonomy.is_hierarchical():
            pair = categorize_two_level(
                spec.inputs,
                taxonomy,
                reasoned,
                provider,
                spec=spec,
                revision=revision,
                transcript=transcript,
            )
            return ActionResult(
                action_id=spec.action_id,
                answer=f"{pair.level1} / {pair.level2}",
                structured=pair,
                provider_calls=2,
            )
        text = _complete_prompt(
            _category_prompt(spec, reasoned, taxonomy.level1, extra),
            provider,
            transcript,
        )
        label = _extract_line(text, CATEGORY_PREFIX)
        if label is None:
            raise ActionParseError(f"no {CATEGORY_PREFIX} line in output: {text[:80]!r}")
        if label not in taxonomy.level1:
            raise ActionParseError(f"unknown category {label!r}")
        return ActionResult(
            action_id=spec.action_id, answer=label, structured=label, provider_calls=1
        )

    if spec.name is ActionName.QA:
        prompt = _action_prompt(
            spec,
            reasoned,
            ActionName.QA,
            f"Respond with a final line of the form {ANSWER_PREFIX} <answer>.",
            extra=extra,
        )
        prefix = ANSWER_PREFIX
    elif spec.name is ActionName.VQA:
        prompt = _action_prompt(
            spec,
            reasoned,
            ActionName.VQA,
            f"Respond with a final line of the form {ANSWER_PREFIX} <answer>.",
            extra=extra,
        )
        prefix = ANSWER_PREFIX
    else:
        prompt = _action_prompt(
            spec,
            reasoned,
            ActionName.TITLE_GENERATION,
            f"Respond with a final line of the form {TITLE_PREFIX} <title>.",
            extra=extra,
        )
        prefix = TITLE_PREFIX

    text = _complete_prompt(prompt, provider, transcript)
    answer = _extract_line(text, prefix)
    if answer is None:
        answer = text.strip()  # prose fallback; QA-style metrics tolerate it
    structured = answer if spec.name is ActionName.TITLE_GENERATION else None
    return ActionResult(
        action_id=spec.action_id,
        answer=answer,
        structured=structured,
        provider_calls=1,
    )


canonical.register(ToolEntry, ToolStore, CategoryPair, CategoryTaxonomy, ActionResult)
