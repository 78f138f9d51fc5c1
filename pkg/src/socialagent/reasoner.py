"""Reasoning strategies: prompt decoration for chain-of-thought and
few-shot, a two-call provider round-trip for self-reflection."""

from __future__ import annotations

from dataclasses import replace

from .core import (
    ContentItem,
    PromptArtifact,
    ReasoningStrategy,
    StrategyKind,
    Transcript,
    UnitRole,
)
from .errors import StrategyRequiresProviderError
from .providers import Provider, ProviderRequest

COT_PHRASE = "let's think step by step"
REFLECTION_INSTRUCTION = "apply reflection to the following reasoning trace"

_LOCAL_KINDS = (StrategyKind.NONE, StrategyKind.FEW_SHOT, StrategyKind.ZERO_SHOT_COT)


def _has_cot_suffix(prompt: PromptArtifact) -> bool:
    texts = prompt.text_segments()
    already_marked = prompt.strategy.kind in (
        StrategyKind.ZERO_SHOT_COT,
        StrategyKind.COT_AND_REFLECTION,
    )
    return already_marked or (bool(texts) and texts[-1] == COT_PHRASE)


def apply_strategy(prompt: PromptArtifact, strategy: ReasoningStrategy) -> PromptArtifact:
    """Decorate a prompt without any provider call. Reflection variants are
    rejected here; they need reason()."""
    if strategy.kind is StrategyKind.NONE:
        return prompt
    if strategy.kind is StrategyKind.ZERO_SHOT_COT:
        if _has_cot_suffix(prompt):
            return replace(prompt, strategy=strategy)
        return prompt.with_segments(ContentItem.from_text(COT_PHRASE), strategy=strategy)
    if strategy.kind is StrategyKind.FEW_SHOT:
        demos = tuple(
            ContentItem.from_text(f"Example input:\n{src}\nExample output:\n{out}")
            for src, out in strategy.examples
        )
        return replace(prompt, segments=demos + prompt.segments, strategy=strategy)
    raise StrategyRequiresProviderError(
        f"strategy {strategy.kind.value} requires a provider; use reason()"
    )


def _reflect(
    prompt: PromptArtifact,
    provider: Provider,
    transcript: Transcript | None,
) -> tuple[str, str]:
    """Generate a reasoning trace from the CoT-decorated prompt, then ask
    for a reflection on it. Exactly two provider calls."""
    traced = apply_strategy(prompt, ReasoningStrategy.zero_shot_cot())
    trace = provider.complete(
        ProviderRequest(
            system_role=traced.system_role,
            messages=traced.segments,
            sampling=provider.config.sampling,
        ),
        transcript=transcript,
        unit=UnitRole.REASONER,
        operation="reason",
    ).text
    reflection = provider.complete(
        ProviderRequest(
            system_role=prompt.system_role,
            messages=(
                ContentItem.from_text(REFLECTION_INSTRUCTION),
                ContentItem.from_text(trace),
            ),
            sampling=provider.config.sampling,
        ),
        transcript=transcript,
        unit=UnitRole.REASONER,
        operation="reason",
    ).text
    return trace, reflection


def reason(
    prompt: PromptArtifact,
    strategy: ReasoningStrategy,
    provider: Provider,
    *,
    transcript: Transcript | None = None,
) -> PromptArtifact:
    """Produce the reasoned prompt consumed by planner, actor, and
    optimizer. Local strategies make zero provider calls; reflection
    variants make exactly two (trace, then reflection)."""
    if strategy.kind in _LOCAL_KINDS:
        decorated = apply_strategy(prompt, strategy)
        if transcript is not None:
            transcript.record(
                UnitRole.REASONER,
                "reason",
                "\n".join(prompt.text_segments()),
                "\n".join(decorated.text_segments()),
            )
        return decorated
    if strategy.kind is StrategyKind.SELF_REFLECTION:
        trace, reflection = _reflect(prompt, provider, transcript)
        base = prompt
    else:  # COT_AND_REFLECTION
        trace, reflection = _reflect(prompt, provider, transcript)
        base = apply_strategy(prompt, ReasoningStrategy.zero_shot_cot())
    return base.with_segments(
        ContentItem.from_text(f"Reasoning trace:\n{trace}"),
        ContentItem.from_text(f"Reflection on the trace:\n{reflection}"),
        strategy=strategy,
    )
