"""Textual-gradient-descent loop: forward evaluation, text loss, feedback
gradients, and variable updates, applied to plans and actor responses."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .core import (
    ContentItem,
    DEFAULT_EARLY_STOP_MARKER,
    PromptArtifact,
    Transcript,
    UnitRole,
)
from .errors import InvariantError, OptimizationAborted, ProviderError
from .providers import Provider, ProviderRequest

DEFAULT_TEXT_LOSS = (
    "critical evaluation instructions and analysis of the reflected input "
    "along with the initial questions"
)


@dataclass(frozen=True)
class Variable:
    """The text under optimization, with every prior value kept in order."""

    value: str
    role_note: str = "text under optimization"
    history: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "history", tuple(self.history))
        if not self.value.strip():
            raise InvariantError("variable value must be non-empty")


@dataclass(frozen=True)
class TextLoss:
    """Natural-language objective: the evaluation instruction plus the
    initial questions/task context it is judged against."""

    instruction: str = DEFAULT_TEXT_LOSS
    context: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "context", tuple(self.context))
        if not self.instruction.strip():
            raise InvariantError("loss instruction must be non-empty")


@dataclass(frozen=True)
class GradientNote:
    """Feedback on improving the variable; the textual gradient."""

    feedback: str
    produced_by: str = ""

    def __post_init__(self) -> None:
        if not self.feedback.strip():
            raise InvariantError("gradient feedback must be non-empty")


@dataclass(frozen=True)
class TGDConfig:
    iterations: int = 1
    step_directive: str | None = None
    early_stop_marker: str = DEFAULT_EARLY_STOP_MARKER

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise InvariantError("iterations must be >= 1")
        if not self.early_stop_marker:
            raise InvariantError("early_stop_marker must be non-empty")


def _complete(
    provider: Provider,
    system_role: str,
    segments: tuple[ContentItem, ...],
    operation: str,
    transcript: Transcript | None,
) -> str:
    return provider.complete(
        ProviderRequest(
            system_role=system_role,
            messages=segments,
            sampling=provider.config.sampling,
        ),
        transcript=transcript,
        unit=UnitRole.OPTIMIZER,
        operation=operation,
    ).text


def forward(
    variable: Variable,
    context: PromptArtifact,
    provider: Provider,
    *,
    transcript: Transcript | None = None,
) -> str:
    """Forward pass: one provider call producing the prediction the current
    variable value yields for the task context."""
    segments = context.segments + (
        ContentItem.from_text(f"Candidate {variable.role_note}:\n{variable.value}"),
        ContentItem.from_text(
            "Produce the response this candidate yields for the task above."
        ),
    )
    return _complete(provider, context.system_role, segments, "forward", transcript)


def compute_loss(
    prediction: str,
    loss: TextLoss,
    provider: Provider,
    *,
    system_role: str = "",
    transcript: Transcript | None = None,
) -> str:
    """One provider call evaluating the prediction against the loss
    instruction and its context."""
    if not prediction.strip():
        raise InvariantError("prediction must be non-empty")
    segments = [ContentItem.from_text(loss.instruction)]
    if loss.context:
        segments.append(
            ContentItem.from_text("Initial questions:\n" + "\n".join(loss.context))
        )
    segments.append(ContentItem.from_text(f"Prediction:\n{prediction}"))
    return _complete(provider, system_role, tuple(segments), "compute_loss", transcript)


def gradient(
    variable: Variable,
    prediction: str,
    evaluation: str,
    provider: Provider,
    *,
    system_role: str = "",
    transcript: Transcript | None = None,
) -> GradientNote:
    """One provider call turning (variable, prediction, evaluation) into
    concrete improvement feedback."""
    if not prediction.strip() or not evaluation.strip():
        raise InvariantError("gradient requires a prediction and an evaluation")
    segments = (
        ContentItem.from_text(
            "Below are a candidate under optimization, the prediction it "
            "produced, and a critical evaluation of that prediction."
        ),
        ContentItem.from_text(f"Candidate ({variable.role_note}):\n{variable.value}"),
        ContentItem.from_text(f"Prediction:\n{prediction}"),
        ContentItem.from_text(f"Evaluation:\n{evaluation}"),
        ContentItem.from_text(
            "Give concrete, actionable feedback on how to improve the candidate."
        ),
    )
    text = _complete(provider, system_role, segments, "gradient", transcript)
    return GradientNote(feedback=text, produced_by=provider.config.model_name)


def step(
    variable: Variable,
    grad: GradientNote,
    config: TGDConfig,
    provider: Provider,
    *,
    system_role: str = "",
    transcript: Transcript | None = None,
) -> Variable:
    """One provider call rewriting the variable with the feedback applied;
    the previous value is pushed onto the history."""
    segments = [
        ContentItem.from_text(
            f"Rewrite the following {variable.role_note} by applying the feedback."
        ),
        ContentItem.from_text(f"Current version:\n{variable.value}"),
        ContentItem.from_text(f"Feedback:\n{grad.feedback}"),
    ]
    if config.step_directive:
        segments.append(ContentItem.from_text(config.step_directive))
    segments.append(
        ContentItem.from_text(
            "Respond with only the improved text, or with the single marker "
            f"{config.early_stop_marker} if no further improvement is possible."
        )
    )
    text = _complete(provider, system_role, tuple(segments), "step", transcript)
    return replace(variable, value=text, history=variable.history + (variable.value,))


def optimize(
    initial: Variable,
    context: PromptArtifact,
    loss: TextLoss,
    config: TGDConfig,
    provider: Provider,
    *,
    transcript: Transcript | None = None,
) -> Variable:
    """Run the full loop: iterations of forward, loss, gradient, step,
    stopping early when a step output carries the early-stop marker.
    Provider errors abort with the partial history attached."""
    variable = initial
    system_role = context.system_role
    try:
        for _ in range(config.iterations):
            prediction = forward(variable, context, provider, transcript=transcript)
            evaluation = compute_loss(
                prediction, loss, provider, system_role=system_role, transcript=transcript
            )
            grad = gradient(
                variable,
                prediction,
                evaluation,
                provider,
                system_role=system_role,
                transcript=transcript,
            )
            variable = step(
                variable,
                grad,
                config,
                provider,
                system_role=system_role,
                transcript=transcript,
            )
            if config.early_stop_marker in variable.value:
                break
    except ProviderError as exc:
        raise OptimizationAborted(str(exc), partial=variable) from exc
    return variable


def resolved_value(variable: Variable, marker: str = DEFAULT_EARLY_STOP_MARKER) -> str:
    """The usable text of an optimized variable: when the loop halted on the
    marker, the last pre-marker value is the result."""
    if marker and marker in variable.value and variable.history:
        return variable.history[-1]
    return variable.value


from . import canonical  # noqa: E402  (registration only)

canonical.register(Variable, TextLoss, GradientNote, TGDConfig)
