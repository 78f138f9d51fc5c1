"""Multimodal social-content analysis agent: a task-solving engine that
coordinates reasoner, planner, optimizer, critic, refiner, and actor units
over pluggable model providers."""

from . import canonical
from .actor import (
    ActionResult,
    CategoryPair,
    CategoryTaxonomy,
    ToolEntry,
    ToolStore,
    act,
    categorize_two_level,
    load_taxonomy,
    load_toolstore,
    lookup,
)
from .core import (
    ActionName,
    ActionSpec,
    ContentItem,
    ContentKind,
    EngineConfig,
    EnvironmentContext,
    ImageRef,
    Plan,
    PromptArtifact,
    Provenance,
    ReasoningStrategy,
    SamplingConfig,
    StrategyKind,
    Task,
    Transcript,
    TranscriptEvent,
    UnitRole,
    ValidationReport,
    validate_task,
)
from .critic import Critique, PlanChoice, RefinedInstructions, criticize, parse_critique, refine
from .divergence import (
    Distribution,
    EmbeddingVector,
    GateDecision,
    jsd,
    should_criticize,
    to_distribution,
)
from .engine import (
    RoleDescription,
    TaskResponse,
    TrialsOutcome,
    UnitSet,
    bootstrap_role,
    build_units,
    execute_actions,
    run_report,
    run_trials,
    solve,
)
from .errors import AgentError
from .evaluation import (
    EvalRecord,
    MetricReport,
    RunSetup,
    TaskKind,
    load_dataset,
    run_eval,
)
from .optimizer import (
    GradientNote,
    TGDConfig,
    TextLoss,
    Variable,
    compute_loss,
    forward,
    gradient,
    optimize,
    resolved_value,
    step,
)
from .planner import parse_plan, plan, replan
from .providers import (
    Backend,
    MockProvider,
    MockScript,
    MockScriptEntry,
    ProviderConfig,
    ProviderRequest,
    ProviderResponse,
    build_provider,
)
from .reasoner import COT_PHRASE, REFLECTION_INSTRUCTION, apply_strategy, reason

serialize = canonical.serialize
deserialize = canonical.deserialize

__version__ = "0.1.0"
