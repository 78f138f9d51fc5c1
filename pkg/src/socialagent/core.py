"""Domain types shared by every unit: tasks, plans, prompts, configuration,
and the per-run invocation transcript."""

from __future__ import annotations

import hashlib
import threading
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import TYPE_CHECKING

from .errors import InvariantError

if TYPE_CHECKING:
    from .providers import ProviderConfig

VALID_ACTION_IDS = (1, 2, 3, 4)


class ContentKind(Enum):
    TEXT = "text"
    IMAGE_REF = "image_ref"


@dataclass(frozen=True)
class ImageRef:
    """Reference to image content (path or URL); bytes are inlined only at
    the provider wire boundary, never carried in domain values."""

    location: str
    media_type: str

    def __post_init__(self) -> None:
        if not self.location:
            raise InvariantError("ImageRef.location must be non-empty")
        if not self.media_type:
            raise InvariantError("ImageRef.media_type must be non-empty")


@dataclass(frozen=True)
class ContentItem:
    """One multimodal input: exactly one of text or image, matching kind."""

    kind: ContentKind
    text: str | None = None
    image: ImageRef | None = None

    def __post_init__(self) -> None:
        if self.kind is ContentKind.TEXT:
            if self.text is None or self.image is not None:
                raise InvariantError("text item must carry text and no image")
        else:
            if self.image is None or self.text is not None:
                raise InvariantError("image item must carry an image and no text")

    @classmethod
    def from_text(cls, text: str) -> ContentItem:
        return cls(kind=ContentKind.TEXT, text=text)

    @classmethod
    def from_image(cls, location: str, media_type: str) -> ContentItem:
        return cls(kind=ContentKind.IMAGE_REF, image=ImageRef(location, media_type))


class ActionName(Enum):
    QA = "qa"
    VQA = "vqa"
    TITLE_GENERATION = "title_generation"
    CATEGORIZATION = "categorization"


ACTION_NAMES_BY_ID: dict[int, ActionName] = {
    1: ActionName.QA,
    2: ActionName.VQA,
    3: ActionName.TITLE_GENERATION,
    4: ActionName.CATEGORIZATION,
}
ACTION_IDS_BY_NAME: dict[ActionName, int] = {v: k for k, v in ACTION_NAMES_BY_ID.items()}


@dataclass(frozen=True)
class Task:
    """A goal to solve, with the multimodal inputs it refers to and an
    optional restriction on which actions a plan may use."""

    id: str
    goal: str
    inputs: tuple[ContentItem, ...] = ()
    allowed_actions: frozenset[int] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if self.allowed_actions is not None:
            object.__setattr__(self, "allowed_actions", frozenset(self.allowed_actions))
        report = validate_task(self)
        if not report.ok:
            raise InvariantError("; ".join(report.problems))

    def permitted_actions(self) -> frozenset[int]:
        if self.allowed_actions is None:
            return frozenset(VALID_ACTION_IDS)
        return self.allowed_actions


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    problems: tuple[str, ...] = ()


def validate_task(task: Task) -> ValidationReport:
    """Report every violated Task invariant; never mutates the input."""
    problems: list[str] = []
    if not task.goal.strip():
        problems.append("empty goal")
    if task.allowed_actions is not None:
        bad = sorted(set(task.allowed_actions) - set(VALID_ACTION_IDS))
        if bad:
            problems.append(f"unknown action id(s): {bad}")
        if not task.allowed_actions:
            problems.append("allowed_actions is empty")
    return ValidationReport(ok=not problems, problems=tuple(problems))


@dataclass(frozen=True)
class EnvironmentContext:
    """The closed, static environment a task run executes in."""

    description: str = ""
    knowledge_refs: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "knowledge_refs", tuple(self.knowledge_refs))


@dataclass(frozen=True)
class ActionSpec:
    """One executable action: its id/name pair, instructions, and inputs."""

    action_id: int
    name: ActionName
    instructions: str
    inputs: tuple[ContentItem, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if self.action_id not in ACTION_NAMES_BY_ID:
            raise InvariantError(f"unknown action id {self.action_id}")
        if ACTION_NAMES_BY_ID[self.action_id] is not self.name:
            raise InvariantError(
                f"action id {self.action_id} does not match name {self.name.value}"
            )
        if not self.instructions.strip():
            raise InvariantError("action instructions must be non-empty")

    @classmethod
    def for_id(
        cls,
        action_id: int,
        instructions: str,
        inputs: tuple[ContentItem, ...] = (),
    ) -> ActionSpec:
        if action_id not in ACTION_NAMES_BY_ID:
            raise InvariantError(f"unknown action id {action_id}")
        return cls(action_id, ACTION_NAMES_BY_ID[action_id], instructions, inputs)


@dataclass(frozen=True)
class Plan:
    """An ordered action sequence plus the planner's verbatim output."""

    actions: tuple[ActionSpec, ...]
    rationale: str = ""
    raw: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", tuple(self.actions))
        if not self.actions:
            raise InvariantError("plan must contain at least one action")


class StrategyKind(Enum):
    NONE = "none"
    FEW_SHOT = "few_shot"
    ZERO_SHOT_COT = "zero_shot_cot"
    SELF_REFLECTION = "self_reflection"
    COT_AND_REFLECTION = "cot_and_reflection"


@dataclass(frozen=True)
class ReasoningStrategy:
    """Which prompting technique the reasoner applies; few-shot carries its
    demonstration pairs."""

    kind: StrategyKind = StrategyKind.NONE
    examples: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "examples", tuple((str(a), str(b)) for a, b in self.examples)
        )
        if self.kind is StrategyKind.FEW_SHOT and not self.examples:
            raise InvariantError("few-shot strategy requires at least one example")
        if self.kind is not StrategyKind.FEW_SHOT and self.examples:
            raise InvariantError(f"{self.kind.value} strategy carries no examples")

    @classmethod
    def none(cls) -> ReasoningStrategy:
        return cls(StrategyKind.NONE)

    @classmethod
    def few_shot(cls, examples: tuple[tuple[str, str], ...]) -> ReasoningStrategy:
        return cls(StrategyKind.FEW_SHOT, tuple(examples))

    @classmethod
    def zero_shot_cot(cls) -> ReasoningStrategy:
        return cls(StrategyKind.ZERO_SHOT_COT)

    @classmethod
    def self_reflection(cls) -> ReasoningStrategy:
        return cls(StrategyKind.SELF_REFLECTION)

    @classmethod
    def cot_and_reflection(cls) -> ReasoningStrategy:
        return cls(StrategyKind.COT_AND_REFLECTION)


class Provenance(Enum):
    USER_TASK = "user_task"
    PLANNER_OUTPUT = "planner_output"
    OPTIMIZER_FEEDBACK = "optimizer_feedback"
    CRITIC_FEEDBACK = "critic_feedback"
    REFINER_OUTPUT = "refiner_output"


@dataclass(frozen=True)
class PromptArtifact:
    """A composite prompt: system role, ordered segments, and the reasoning
    strategy that has been applied to it."""

    system_role: str
    segments: tuple[ContentItem, ...]
    strategy: ReasoningStrategy = field(default_factory=ReasoningStrategy.none)
    provenance: Provenance = Provenance.USER_TASK

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise InvariantError("prompt must contain at least one segment")

    def with_segments(self, *items: ContentItem, **changes) -> PromptArtifact:
        """Copy with extra segments appended (strategy material is additive)."""
        return replace(self, segments=self.segments + tuple(items), **changes)

    def text_segments(self) -> tuple[str, ...]:
        return tuple(s.text for s in self.segments if s.kind is ContentKind.TEXT)


class UnitRole(Enum):
    ROLE_WRITER = "role_writer"
    REASONER = "reasoner"
    PLANNER = "planner"
    OPTIMIZER = "optimizer"
    CRITIC = "critic"
    REFINER = "refiner"
    ACTOR = "actor"


@dataclass(frozen=True)
class SamplingConfig:
    """Decoding parameters: temperature plus nucleus cutoff (default 0.99)."""

    temperature: float = 0.0
    top_p: float = 0.99

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise InvariantError("temperature must be >= 0")
        if not (0 < self.top_p <= 1):
            raise InvariantError("top_p must be in (0, 1]")

    @classmethod
    def deterministic(cls) -> SamplingConfig:
        return cls(temperature=0.0, top_p=0.99)

    @classmethod
    def creative(cls) -> SamplingConfig:
        return cls(temperature=0.7, top_p=0.99)


DEFAULT_EARLY_STOP_MARKER = "NO_FURTHER_IMPROVEMENT"


@dataclass(frozen=True)
class EngineConfig:
    """Knobs for one engine run: gate threshold, trial budget, optimizer
    iteration count, the per-unit provider bindings, and the reasoning
    strategy applied at both reasoning sites."""

    role_bindings: dict[UnitRole, "ProviderConfig"] = field(default_factory=dict)
    theta: float = 0.1
    trials: int = 2
    tgd_iterations: int = 1
    step_directive: str | None = None
    strategy: ReasoningStrategy = field(default_factory=ReasoningStrategy.cot_and_reflection)
    early_stop_marker: str = DEFAULT_EARLY_STOP_MARKER

    def __post_init__(self) -> None:
        if not (0 <= self.theta <= 1):
            raise InvariantError("theta must be in [0, 1]")
        if self.trials < 1:
            raise InvariantError("trials must be >= 1")
        if self.tgd_iterations < 1:
            raise InvariantError("tgd_iterations must be >= 1")
        if not self.early_stop_marker:
            raise InvariantError("early_stop_marker must be non-empty")


def digest(text: str) -> str:
    """Short stable content digest used in transcripts and reports."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class TranscriptEvent:
    seq: int
    unit: UnitRole
    operation: str
    request_digest: str
    response_digest: str
    timestamp: float

    def label(self) -> tuple[str, str]:
        return (self.unit.value, self.operation)


class Transcript:
    """Append-only record of unit invocations for one task run.

    The engine owns one per run and appends sequentially; sharing a
    transcript across threads requires external synchronization (the
    internal lock only keeps the sequence counter coherent).
    """

    def __init__(self, events: tuple[TranscriptEvent, ...] = ()) -> None:
        self._events: list[TranscriptEvent] = list(events)
        self._lock = threading.Lock()

    def record(
        self, unit: UnitRole, operation: str, request_text: str, response_text: str
    ) -> TranscriptEvent:
        with self._lock:
            event = TranscriptEvent(
                seq=len(self._events),
                unit=unit,
                operation=operation,
                request_digest=digest(request_text),
                response_digest=digest(response_text),
                timestamp=time.time(),
            )
            self._events.append(event)
        return event

    @property
    def events(self) -> tuple[TranscriptEvent, ...]:
        return tuple(self._events)

    def to_jsonable(self) -> dict:
        return {
            "events": [
                {
                    "seq": e.seq,
                    "unit": e.unit.value,
                    "operation": e.operation,
                    "request_digest": e.request_digest,
                    "response_digest": e.response_digest,
                    "timestamp": e.timestamp,
                }
                for e in self._events
            ]
        }

    @classmethod
    def from_jsonable(cls, data: object) -> Transcript:
        from .errors import MalformedInputError

        if not isinstance(data, dict) or "events" not in data:
            raise MalformedInputError("Transcript: expected an object with 'events'")
        events = []
        for i, raw in enumerate(data["events"]):
            try:
                events.append(
                    TranscriptEvent(
                        seq=int(raw["seq"]),
                        unit=UnitRole(raw["unit"]),
                        operation=str(raw["operation"]),
                        request_digest=str(raw["request_digest"]),
                        response_digest=str(raw["response_digest"]),
                        timestamp=float(raw["timestamp"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedInputError(f"Transcript.events[{i}]: {exc}") from exc
        return cls(tuple(events))

    def signature(self) -> tuple[tuple[str, str], ...]:
        """(unit, operation) labels in invocation order, for conformance checks."""
        return tuple(e.label() for e in self._events)

    def count(self, unit: UnitRole | None = None, operation: str | None = None) -> int:
        return sum(
            1
            for e in self._events
            if (unit is None or e.unit is unit)
            and (operation is None or e.operation == operation)
        )

    def __len__(self) -> int:
        return len(self._events)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Transcript):
            return NotImplemented
        return self._events == list(other.events)


from . import canonical  # noqa: E402  (registration only)

canonical.register(
    ImageRef,
    ContentItem,
    Task,
    ValidationReport,
    EnvironmentContext,
    ActionSpec,
    Plan,
    ReasoningStrategy,
    PromptArtifact,
    SamplingConfig,
    EngineConfig,
    TranscriptEvent,
    Transcript,
)
