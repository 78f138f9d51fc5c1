"""Dataset loading, single-attempt evaluation runs over the engine, and
metric reports in the 0-100 convention."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from . import canonical, engine, metrics
from .actor import CategoryPair, CategoryTaxonomy, ToolStore
from .core import ContentItem, EngineConfig, EnvironmentContext, Task, UnitRole
from .errors import AgentError, DatasetFormatError, InvariantError
from .providers import MockScript, MockScriptEntry

REPORT_DECIMALS = 4


class TaskKind(Enum):
    QA = "qa"
    VQA = "vqa"
    TITLE = "title"
    CATEGORIZE = "categorize"


KIND_ACTION_IDS = {
    TaskKind.QA: 1,
    TaskKind.VQA: 2,
    TaskKind.TITLE: 3,
    TaskKind.CATEGORIZE: 4,
}

_KIND_GOALS = {
    TaskKind.QA: "Answer the question using the provided content.",
    TaskKind.VQA: "Answer the question using the provided multimodal content.",
    TaskKind.TITLE: "Generate a concise title for the provided content.",
    TaskKind.CATEGORIZE: "Classify the provided content into the predefined categories.",
}


@dataclass(frozen=True)
class EvalRecord:
    id: str
    inputs: tuple[ContentItem, ...]
    gold: str = ""
    gold_category: CategoryPair | None = None
    context: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "context", tuple(self.context))
        if not self.id:
            raise InvariantError("record id must be non-empty")
        if bool(self.gold) == (self.gold_category is not None):
            raise InvariantError("record needs exactly one of gold text or gold category")


@dataclass(frozen=True)
class RecordScore:
    id: str
    scores: dict[str, float]
    failed: bool = False


@dataclass(frozen=True)
class DisagreementEntry:
    gold: str
    predicted: str
    count: int


@dataclass(frozen=True)
class MetricReport:
    kind: str
    n: int
    per_record: tuple[RecordScore, ...]
    aggregates: dict[str, float]
    disagreements: dict[str, tuple[DisagreementEntry, ...]] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_record", tuple(self.per_record))


@dataclass(frozen=True)
class RunSetup:
    """Operator configuration: the engine knobs plus harness extras (paths
    to bundled stores and, for mock runs, per-record script overrides)."""

    engine: EngineConfig
    toolstore_path: str | None = None
    taxonomy_path: str | None = None
    record_scripts: dict[str, dict[UnitRole, tuple[MockScriptEntry, ...]]] = field(
        default_factory=dict
    )


def load_setup(path: str | Path) -> RunSetup:
    """Read a run configuration; store paths given as relative are resolved
    against the config file's own directory."""
    path = Path(path)
    value = canonical.deserialize(path.read_text(encoding="utf-8"))
    if not isinstance(value, RunSetup):
        raise InvariantError(f"{path} does not contain a RunSetup")
    base = path.resolve().parent

    def resolve(store_path: str | None) -> str | None:
        if store_path is None or Path(store_path).is_absolute():
            return store_path
        return str(base / store_path)

    return replace(
        value,
        toolstore_path=resolve(value.toolstore_path),
        taxonomy_path=resolve(value.taxonomy_path),
    )


def _require_str(payload: dict, line: int, *names: str) -> str:
    for name in names:
        value = payload.get(name)
        if isinstance(value, str) and value.strip():
            return value
    raise DatasetFormatError(f"missing field (one of: {', '.join(names)})", line=line)


def _context_passages(payload: dict) -> tuple[str, ...]:
    raw = payload.get("context")
    if raw is None:
        return ()
    passages: list[str] = []
    if isinstance(raw, list):
        for item in raw:
            if isinstance(item, str):
                passages.append(item)
            elif (
                isinstance(item, list)
                and len(item) == 2
                and isinstance(item[0], str)
                and isinstance(item[1], list)
            ):
                # multi-hop layout: [title, [sentences...]]
                passages.append(item[0] + ": " + " ".join(str(s) for s in item[1]))
    return tuple(passages)


def _image_items(payload: dict) -> tuple[ContentItem, ...]:
    images = payload.get("images") or []
    items = []
    for image in images:
        if isinstance(image, dict) and "location" in image:
            items.append(
                ContentItem.from_image(
                    image["location"], image.get("media_type", "image/jpeg")
                )
            )
    return tuple(items)


def _record_from_payload(payload: dict, kind: TaskKind, line: int) -> EvalRecord:
    record_id = _require_str(payload, line, "id", "_id")
    if kind in (TaskKind.QA, TaskKind.VQA):
        question = _require_str(payload, line, "question")
        gold = _require_str(payload, line, "answer", "gold")
        context = _context_passages(payload)
        inputs = (ContentItem.from_text(f"Question: {question}"),)
        inputs += tuple(ContentItem.from_text(p) for p in context)
        inputs += _image_items(payload)
        return EvalRecord(id=record_id, inputs=inputs, gold=gold, context=context)
    if kind is TaskKind.TITLE:
        text = _require_str(payload, line, "text", "section_text")
        gold = _require_str(payload, line, "title", "gold")
        inputs = (ContentItem.from_text(text),) + _image_items(payload)
        return EvalRecord(id=record_id, inputs=inputs, gold=gold)
    text = _require_str(payload, line, "text")
    level1 = _require_str(payload, line, "level1", "category_level_1")
    level2 = _require_str(payload, line, "level2", "category_level_2")
    return EvalRecord(
        id=record_id,
        inputs=(ContentItem.from_text(text),),
        gold_category=CategoryPair(level1=level1, level2=level2),
    )


def load_dataset(path: str | Path, kind: TaskKind) -> list[EvalRecord]:
    """Read line-delimited records in the public layout of each benchmark
    family; format problems are reported with their line number."""
    records: list[EvalRecord] = []
    for number, raw_line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not raw_line.strip():
            continue
        try:
            payload = json.loads(raw_line)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(f"invalid JSON ({exc.msg})", line=number) from exc
        if not isinstance(payload, dict):
            raise DatasetFormatError("record must be an object", line=number)
        records.append(_record_from_payload(payload, kind, number))
    return records


def build_task(record: EvalRecord, kind: TaskKind) -> Task:
    return Task(
        id=record.id,
        goal=_KIND_GOALS[kind],
        inputs=record.inputs,
        allowed_actions=frozenset({KIND_ACTION_IDS[kind]}),
    )


def _with_record_scripts(
    config: EngineConfig, overrides: dict[UnitRole, tuple[MockScriptEntry, ...]]
) -> EngineConfig:
    if not overrides:
        return config
    bindings = dict(config.role_bindings)
    for role, entries in overrides.items():
        bindings[role] = replace(bindings[role], script=MockScript(tuple(entries)))
    return replace(config, role_bindings=bindings)


def extract_prediction(
    response: engine.TaskResponse, kind: TaskKind
) -> str | CategoryPair | None:
    """The prediction to score: the result of the action matching the task
    kind, falling back to the last result."""
    wanted = KIND_ACTION_IDS[kind]
    chosen = None
    for result in response.results:
        if result.action_id == wanted:
            chosen = result
    if chosen is None and response.results:
        chosen = response.results[-1]
    if chosen is None:
        return None
    if kind is TaskKind.CATEGORIZE:
        return chosen.structured if isinstance(chosen.structured, CategoryPair) else None
    return chosen.answer


def _zero_scores(kind: TaskKind) -> dict[str, float]:
    if kind in (TaskKind.QA, TaskKind.VQA):
        return {"em": 0.0, "f1": 0.0, "p": 0.0, "r": 0.0}
    if kind is TaskKind.TITLE:
        return {"em": 0.0, "b4": 0.0, "rl_f1": 0.0, "rl_p": 0.0, "rl_r": 0.0}
    return {"l1_correct": 0.0, "l2_correct": 0.0}


def _score_text(kind: TaskKind, prediction: str, gold: str) -> dict[str, float]:
    if kind in (TaskKind.QA, TaskKind.VQA):
        overlap = metrics.token_f1(prediction, gold)
        return {
            "em": float(metrics.exact_match(prediction, gold)),
            "f1": overlap.f1,
            "p": overlap.precision,
            "r": overlap.recall,
        }
    rouge = metrics.rouge_l(prediction, gold)
    return {
        "em": float(metrics.exact_match(prediction, gold)),
        "b4": metrics.bleu4(prediction, gold),
        "rl_f1": rouge.f1,
        "rl_p": rouge.precision,
        "rl_r": rouge.recall,
    }


@dataclass(frozen=True)
class RecordOutcome:
    record: EvalRecord
    prediction: str | CategoryPair | None
    scores: dict[str, float]
    failed: bool
    transcript_events: int


def evaluate_record(
    record: EvalRecord,
    kind: TaskKind,
    config: EngineConfig,
    *,
    env: EnvironmentContext | None = None,
    tools: ToolStore | None = None,
    taxonomy: CategoryTaxonomy | None = None,
    record_scripts: dict[str, dict[UnitRole, tuple[MockScriptEntry, ...]]] | None = None,
) -> RecordOutcome:
    """One engine run for one record (single attempt, fresh providers);
    engine failures score zero and are flagged rather than raised."""
    effective = _with_record_scripts(config, (record_scripts or {}).get(record.id, {}))
    task = build_task(record, kind)
    try:
        response = engine.solve(
            task,
            env or EnvironmentContext(),
            effective,
            tools=tools,
            taxonomy=taxonomy,
        )
        if response.error is not None:
            raise AgentError(response.error)
    except AgentError:
        return RecordOutcome(record, None, _zero_scores(kind), True, 0)
    prediction = extract_prediction(response, kind)
    if prediction is None:
        return RecordOutcome(record, None, _zero_scores(kind), True, len(response.transcript))
    if kind is TaskKind.CATEGORIZE:
        assert record.gold_category is not None
        scores = {
            "l1_correct": float(prediction.level1 == record.gold_category.level1),
            "l2_correct": float(prediction.level2 == record.gold_category.level2),
        }
    else:
        scores = _score_text(kind, prediction, record.gold)
    return RecordOutcome(record, prediction, scores, False, len(response.transcript))


def _round(value: float) -> float:
    return round(value, REPORT_DECIMALS)


def _category_aggregates(outcomes: list[RecordOutcome]) -> dict[str, float]:
    preds = []
    golds = []
    for outcome in outcomes:
        gold = outcome.record.gold_category
        assert gold is not None
        golds.append((gold.level1, gold.level2))
        if isinstance(outcome.prediction, CategoryPair):
            preds.append((outcome.prediction.level1, outcome.prediction.level2))
        else:
            preds.append(("", ""))
    levels = metrics.hierarchical_scores(preds, golds)
    aggregates = {}
    for name, key in (("level1", "L1"), ("level2", "L2")):
        scores = levels[name]
        aggregates[f"{key}_Acc"] = _round(scores.accuracy * 100)
        aggregates[f"{key}_F1"] = _round(scores.f1 * 100)
        aggregates[f"{key}_P"] = _round(scores.precision * 100)
        aggregates[f"{key}_R"] = _round(scores.recall * 100)
    return aggregates


def _disagreements(outcomes: list[RecordOutcome]) -> dict[str, tuple[DisagreementEntry, ...]]:
    """Mismatch counts per (gold, predicted) pair at each level, most
    frequent first."""
    report: dict[str, tuple[DisagreementEntry, ...]] = {}
    for level, index in (("level1", 0), ("level2", 1)):
        counts: dict[tuple[str, str], int] = {}
        for outcome in outcomes:
            gold = outcome.record.gold_category
            assert gold is not None
            gold_label = (gold.level1, gold.level2)[index]
            if isinstance(outcome.prediction, CategoryPair):
                pred_label = (outcome.prediction.level1, outcome.prediction.level2)[index]
            else:
                pred_label = ""
            if pred_label != gold_label:
                key = (gold_label, pred_label)
                counts[key] = counts.get(key, 0) + 1
        ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0][0], kv[0][1]))
        report[level] = tuple(
            DisagreementEntry(gold=g, predicted=p, count=c) for (g, p), c in ordered
        )
    return report


_AGGREGATE_KEYS = {
    TaskKind.QA: (("em", "EM"), ("f1", "F1"), ("p", "P"), ("r", "R")),
    TaskKind.VQA: (("em", "EM"), ("f1", "F1"), ("p", "P"), ("r", "R")),
    TaskKind.TITLE: (
        ("em", "EM"),
        ("b4", "B4"),
        ("rl_f1", "RL_F1"),
        ("rl_p", "RL_P"),
        ("rl_r", "RL_R"),
    ),
}


def run_eval(
    dataset: list[EvalRecord],
    task_kind: TaskKind,
    config: EngineConfig,
    *,
    env: EnvironmentContext | None = None,
    tools: ToolStore | None = None,
    taxonomy: CategoryTaxonomy | None = None,
    record_scripts: dict[str, dict[UnitRole, tuple[MockScriptEntry, ...]]] | None = None,
    workers: int = 4,
) -> MetricReport:
    """Evaluate every record with exactly one engine run each, then report
    per-record scores and 0-100 aggregates, ordered by record id."""
    if not dataset:
        raise InvariantError("dataset must contain at least one record")
    if workers < 1:
        raise InvariantError("workers must be >= 1")

    def work(record: EvalRecord) -> RecordOutcome:
        return evaluate_record(
            record,
            task_kind,
            config,
            env=env,
            tools=tools,
            taxonomy=taxonomy,
            record_scripts=record_scripts,
        )

    if workers == 1:
        outcomes = [work(record) for record in dataset]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(work, dataset))
    outcomes.sort(key=lambda outcome: outcome.record.id)

    per_record = tuple(
        RecordScore(
            id=outcome.record.id,
            scores={k: _round(v) for k, v in sorted(outcome.scores.items())},
            failed=outcome.failed,
        )
        for outcome in outcomes
    )
    disagreements = None
    if task_kind is TaskKind.CATEGORIZE:
        aggregates = _category_aggregates(outcomes)
        disagreements = _disagreements(outcomes)
    else:
        n = len(outcomes)
        aggregates = {
            label: _round(sum(o.scores[key] for o in outcomes) / n * 100)
            for key, label in _AGGREGATE_KEYS[task_kind]
        }
    return MetricReport(
        kind=task_kind.value,
        n=len(outcomes),
        per_record=per_record,
        aggregates=aggregates,
        disagreements=disagreements,
    )


canonical.register(
    EvalRecord, RecordScore, DisagreementEntry, MetricReport, RunSetup
)
