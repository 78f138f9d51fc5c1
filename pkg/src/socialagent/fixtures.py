"""Bundled fixtures: synthetic mini-datasets, a sample knowledge store and
taxonomy, fully scripted run configurations, protocol reference sequences,
and the golden reports they must reproduce byte-for-byte."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import canonical, engine, evaluation
from .actor import CategoryTaxonomy, ToolEntry, ToolStore, load_taxonomy, load_toolstore
from .core import (
    ContentItem,
    EngineConfig,
    EnvironmentContext,
    ReasoningStrategy,
    Task,
    UnitRole,
)
from .evaluation import RunSetup, TaskKind, load_dataset, run_eval
from .providers import Backend, MockScript, MockScriptEntry, ProviderConfig

GOLDEN_WORKERS = 2


def fixture_dir() -> Path:
    return Path(str(resources.files("socialagent"))) / "fixtures"


def fixture_path(name: str) -> Path:
    return fixture_dir() / name


# ---------------------------------------------------------------------------
# scripted plan blocks

QA_PLAN_BLOCK = (
    "The task needs one direct question-answering step.\n"
    "```json\n"
    '{"actions": [{"id": 1, "instructions": "Answer the question using the '
    'provided content."}], "rationale": "a single QA action suffices"}\n'
    "```"
)

TITLE_PLAN_BLOCK = (
    "A single headline-writing step covers the task.\n"
    "```json\n"
    '{"actions": [{"id": 3, "instructions": "Write a concise title for the '
    'provided content."}], "rationale": "one title-generation action"}\n'
    "```"
)

CATEGORY_PLAN_BLOCK = (
    "Classification is the only required step.\n"
    "```json\n"
    '{"actions": [{"id": 4, "instructions": "Classify the content into the '
    'predefined categories."}], "rationale": "one categorization action"}\n'
    "```"
)

COMPOSITE_PLAN_BLOCK = (
    "Title first, then categorize.\n"
    "```json\n"
    '{"actions": [{"id": 3, "instructions": "Write a headline."}, '
    '{"id": 4, "instructions": "Classify the content."}], '
    '"rationale": "summary plus classification"}\n'
    "```"
)

ALT_COMPOSITE_PLAN_BLOCK = (
    "Reordering for better coverage.\n"
    "```json\n"
    '{"actions": [{"id": 4, "instructions": "Classify the content first."}, '
    '{"id": 3, "instructions": "Write a headline from the category view."}], '
    '"rationale": "classification-led summary"}\n'
    "```"
)

REPLAN_BLOCK = (
    "Following the corrective instructions.\n"
    "```json\n"
    '{"actions": [{"id": 1, "instructions": "Answer the question directly, '
    'citing the passage."}], "rationale": "focused single action"}\n'
    "```"
)

ALT_QA_PLAN_BLOCK = (
    "An alternative breakdown.\n"
    "```json\n"
    '{"actions": [{"id": 1, "instructions": "Scan the passage, then answer '
    'in one sentence."}], "rationale": "scan-then-answer"}\n'
    "```"
)


def _mock(model_name: str, *responses: str, **kwargs) -> ProviderConfig:
    return ProviderConfig(
        backend=Backend.MOCK,
        model_name=model_name,
        script=MockScript.of(*responses),
        **kwargs,
    )


def _entries(*responses: str) -> tuple[MockScriptEntry, ...]:
    return tuple(MockScriptEntry(response=r) for r in responses)


def _optimizer_script(trial_blocks: list[str], action_rounds: int) -> list[str]:
    """Scripted responses for the optimizer unit: a forward/loss/gradient/
    step quartet per planning trial, then one quartet per action round."""
    script: list[str] = []
    for block in trial_blocks:
        script += ["forward prediction", "critical evaluation", "improvement feedback", block]
    for index in range(action_rounds):
        script += [
            f"action forward {index + 1}",
            f"action evaluation {index + 1}",
            f"action feedback {index + 1}",
            f"polish the response (round {index + 1})",
        ]
    return script


def _eval_bindings(plan_block: str) -> dict[UnitRole, ProviderConfig]:
    """Static per-unit scripts for one evaluation record; the actor script
    comes from the per-record overrides."""
    return {
        UnitRole.ROLE_WRITER: _mock("role-scribe", "You are a careful social-content analyst."),
        UnitRole.REASONER: _mock("unit-reasoner"),
        UnitRole.PLANNER: _mock("unit-planner", plan_block),
        UnitRole.OPTIMIZER: _mock("unit-optimizer", *_optimizer_script([plan_block], 1)),
        UnitRole.CRITIC: _mock("unit-critic"),
        UnitRole.REFINER: _mock("unit-refiner"),
        UnitRole.ACTOR: _mock("unit-actor"),
    }


# ---------------------------------------------------------------------------
# mini datasets

QA_DATASET = [
    {
        "id": "qa-01",
        "question": "What is the capital of France?",
        "answer": "paris",
        "context": ["France's capital and largest city is Paris."],
    },
    {
        "id": "qa-02",
        "question": "Which landmark dominates the Champ de Mars?",
        "answer": "the eiffel tower",
        "context": ["The Eiffel Tower stands on the Champ de Mars in Paris."],
    },
    {
        "id": "qa-03",
        "question": "What is the largest animal on Earth?",
        "answer": "blue whale",
        "context": ["The blue whale is the largest animal known to have lived."],
    },
    {
        "id": "qa-04",
        "question": "In which year did humans first land on the Moon?",
        "answer": "1969",
        "context": ["Apollo 11 landed the first humans on the Moon in 1969."],
    },
    {
        "id": "qa-05",
        "question": "Who discovered radium?",
        "answer": "marie curie",
        "context": ["Radium was discovered by Marie and Pierre Curie in 1898."],
    },
]

QA_ACTOR_SCRIPTS = {
    "qa-01": ("Checking the passage.\nANSWER: paris", "ANSWER: Paris"),
    "qa-02": ("ANSWER: tower", "ANSWER: eiffel tower paris"),
    "qa-03": ("ANSWER: a whale", "ANSWER: whale"),
    "qa-04": ("ANSWER: 1968", "ANSWER: 1969"),
    "qa-05": ("ANSWER: isaac newton", "ANSWER: albert einstein"),
}

TITLE_DATASET = [
    {
        "id": "tg-01",
        "text": "A new solar farm pushed the region's power output to an all-time high.",
        "title": "solar power reaches record output",
    },
    {
        "id": "tg-02",
        "text": "After months of debate the city council voted to fund a new park downtown.",
        "title": "city council approves new park",
    },
    {
        "id": "tg-03",
        "text": "A decade-long survey charts how the reef's coral cover has shrunk.",
        "title": "scientists map coral reef decline",
    },
    {
        "id": "tg-04",
        "text": "The family-run bakery took the top prize at the national pastry fair.",
        "title": "local bakery wins national award",
    },
    {
        "id": "tg-05",
        "text": "Heavy snow shut every pass road in the high country overnight.",
        "title": "storm closes mountain roads",
    },
]

TITLE_ACTOR_SCRIPTS = {
    "tg-01": ("TITLE: record solar output", "TITLE: solar power reaches record output"),
    "tg-02": ("TITLE: park approved", "TITLE: council approves new park plan"),
    "tg-03": ("TITLE: reef survey", "TITLE: scientists map reef decline"),
    "tg-04": ("TITLE: bakery prize", "TITLE: bakery wins award"),
    "tg-05": ("TITLE: snow news", "TITLE: severe weather update"),
}

CATEGORY_DATASET = [
    {"id": "cc-01", "text": "Club season opens on the center court.", "level1": "sport", "level2": "tennis"},
    {"id": "cc-02", "text": "The league announced its relegation rules.", "level1": "sport", "level2": "football"},
    {"id": "cc-03", "text": "Ballot counting continued through the night.", "level1": "politics", "level2": "elections"},
    {"id": "cc-04", "text": "The ministry published its housing directive.", "level1": "politics", "level2": "policy"},
    {"id": "cc-05", "text": "The probe returned images from the outer belt.", "level1": "science", "level2": "space"},
    {"id": "cc-06", "text": "Researchers sequenced the wetland microbes.", "level1": "science", "level2": "biology"},
]

CATEGORY_ACTOR_SCRIPTS = {
    "cc-01": ("CATEGORY: sport", "CATEGORY: tennis", "CATEGORY: sport", "CATEGORY: tennis"),
    "cc-02": ("CATEGORY: sport", "CATEGORY: football", "CATEGORY: sport", "CATEGORY: tennis"),
    "cc-03": ("CATEGORY: politics", "CATEGORY: elections", "CATEGORY: politics", "CATEGORY: elections"),
    "cc-04": ("CATEGORY: politics", "CATEGORY: policy", "CATEGORY: science", "CATEGORY: space"),
    "cc-05": ("CATEGORY: science", "CATEGORY: space", "CATEGORY: science", "CATEGORY: space"),
    "cc-06": ("CATEGORY: science", "CATEGORY: biology", "CATEGORY: science", "CATEGORY: space"),
}


def taxonomy() -> CategoryTaxonomy:
    return CategoryTaxonomy(
        level1=("sport", "politics", "science"),
        level2={
            "sport": ("tennis", "football"),
            "politics": ("elections", "policy"),
            "science": ("space", "biology"),
        },
    )


def toolstore() -> ToolStore:
    return ToolStore(
        entries={
            "solar": ToolEntry(
                title="Solar energy basics",
                facts=(
                    "Photovoltaic cells convert sunlight directly into electricity.",
                    "Grid output peaks around midday for solar farms.",
                ),
            ),
            "reef": ToolEntry(
                title="Coral reef ecology",
                facts=("Coral bleaching is driven by sustained heat stress.",),
            ),
        }
    )


def qa_setup() -> RunSetup:
    return RunSetup(
        engine=EngineConfig(
            role_bindings=_eval_bindings(QA_PLAN_BLOCK),
            theta=0.1,
            trials=1,
            tgd_iterations=1,
            strategy=ReasoningStrategy.none(),
        ),
        record_scripts={
            record_id: {UnitRole.ACTOR: _entries(*script)}
            for record_id, script in QA_ACTOR_SCRIPTS.items()
        },
    )


def title_setup() -> RunSetup:
    return RunSetup(
        engine=EngineConfig(
            role_bindings=_eval_bindings(TITLE_PLAN_BLOCK),
            theta=0.1,
            trials=1,
            tgd_iterations=1,
            strategy=ReasoningStrategy.none(),
        ),
        record_scripts={
            record_id: {UnitRole.ACTOR: _entries(*script)}
            for record_id, script in TITLE_ACTOR_SCRIPTS.items()
        },
    )


def category_setup() -> RunSetup:
    return RunSetup(
        engine=EngineConfig(
            role_bindings=_eval_bindings(CATEGORY_PLAN_BLOCK),
            theta=0.1,
            trials=1,
            tgd_iterations=1,
            strategy=ReasoningStrategy.none(),
        ),
        taxonomy_path="taxonomy.json",  # resolved against the config file's directory
        record_scripts={
            record_id: {UnitRole.ACTOR: _entries(*script)}
            for record_id, script in CATEGORY_ACTOR_SCRIPTS.items()
        },
    )


# ---------------------------------------------------------------------------
# single-task solve / plan fixtures

def example_task() -> Task:
    return Task(
        id="example-001",
        goal="Answer the question using the provided content.",
        inputs=(
            ContentItem.from_text("Question: Which landmark dominates the Champ de Mars?"),
            ContentItem.from_text("The Eiffel Tower stands on the Champ de Mars in Paris."),
        ),
        allowed_actions=frozenset({1}),
    )


def solve_setup() -> RunSetup:
    return RunSetup(
        engine=EngineConfig(
            role_bindings={
                UnitRole.ROLE_WRITER: _mock("role-scribe", "You are a careful social-content analyst."),
                UnitRole.REASONER: _mock("unit-reasoner"),
                UnitRole.PLANNER: _mock("unit-planner", QA_PLAN_BLOCK),
                UnitRole.OPTIMIZER: _mock(
                    "unit-optimizer", *_optimizer_script([QA_PLAN_BLOCK], 1)
                ),
                UnitRole.CRITIC: _mock("unit-critic"),
                UnitRole.REFINER: _mock("unit-refiner"),
                UnitRole.ACTOR: _mock(
                    "unit-actor", "ANSWER: a tower", "ANSWER: the eiffel tower"
                ),
            },
            theta=0.1,
            trials=2,
            tgd_iterations=1,
            strategy=ReasoningStrategy.zero_shot_cot(),
        )
    )


def plan_task() -> Task:
    return Task(
        id="plan-demo-001",
        goal="Summarize the post and classify it for the monitoring feed.",
        inputs=(ContentItem.from_text("Post: the council passed the new parks budget today."),),
        allowed_actions=frozenset({1, 3, 4}),
    )


def plan_identical_setup() -> RunSetup:
    """Optimizer echoes the planner's output: the gate sees divergence 0."""
    return RunSetup(
        engine=EngineConfig(
            role_bindings={
                UnitRole.ROLE_WRITER: _mock("role-scribe", "You are a planning analyst."),
                UnitRole.REASONER: _mock("unit-reasoner"),
                UnitRole.PLANNER: _mock("unit-planner", COMPOSITE_PLAN_BLOCK),
                UnitRole.OPTIMIZER: _mock(
                    "unit-optimizer", *_optimizer_script([COMPOSITE_PLAN_BLOCK], 0)
                ),
                UnitRole.CRITIC: _mock("unit-critic"),
                UnitRole.REFINER: _mock("unit-refiner"),
                UnitRole.ACTOR: _mock("unit-actor"),
            },
            theta=0.1,
            trials=2,
            tgd_iterations=1,
            strategy=ReasoningStrategy.none(),
        )
    )


def plan_divergent_setup() -> RunSetup:
    """Optimizer rewrites the plan; forced embeddings make the gate fire,
    the critic prefers plan A, and the refiner feeds a replan."""
    critic = ProviderConfig(
        backend=Backend.MOCK,
        model_name="unit-critic",
        script=MockScript.of(
            "VERDICT: A\nFEEDBACK: Keep the headline first; classification should use it."
        ),
        embedding_overrides={
            COMPOSITE_PLAN_BLOCK: (2.0, 0.0),
            ALT_COMPOSITE_PLAN_BLOCK: (0.0, 2.0),
        },
    )
    return RunSetup(
        engine=EngineConfig(
            role_bindings={
                UnitRole.ROLE_WRITER: _mock("role-scribe", "You are a planning analyst."),
                UnitRole.REASONER: _mock("unit-reasoner"),
                UnitRole.PLANNER: _mock(
                    "unit-planner", COMPOSITE_PLAN_BLOCK, COMPOSITE_PLAN_BLOCK
                ),
                UnitRole.OPTIMIZER: _mock(
                    "unit-optimizer",
                    *_optimizer_script([ALT_COMPOSITE_PLAN_BLOCK, COMPOSITE_PLAN_BLOCK], 0),
                ),
                UnitRole.CRITIC: critic,
                UnitRole.REFINER: _mock(
                    "unit-refiner",
                    "Keep the title action before categorization and reuse its output.",
                ),
                UnitRole.ACTOR: _mock("unit-actor"),
            },
            theta=0.05,
            trials=2,
            tgd_iterations=1,
            strategy=ReasoningStrategy.none(),
        )
    )


# ---------------------------------------------------------------------------
# protocol scenarios with hand-derived reference sequences

_TRIAL_BLOCK = [
    ("reasoner", "reason"),
    ("planner", "plan"),
    ("optimizer", "forward"),
    ("optimizer", "compute_loss"),
    ("optimizer", "gradient"),
    ("optimizer", "step"),
]
_REPLAN_BLOCK_SEQ = [
    ("reasoner", "reason"),
    ("planner", "replan"),
    ("optimizer", "forward"),
    ("optimizer", "compute_loss"),
    ("optimizer", "gradient"),
    ("optimizer", "step"),
]
_GATE = [("critic", "embed"), ("critic", "embed")]
_ACTION_BLOCK = [
    ("reasoner", "reason"),
    ("actor", "act"),
    ("optimizer", "forward"),
    ("optimizer", "compute_loss"),
    ("optimizer", "gradient"),
    ("optimizer", "step"),
    ("actor", "act"),
]

SCENARIO_SEQUENCES: dict[str, tuple[tuple[str, str], ...]] = {
    # gate passes on trial 0: break straight to action execution
    "scenario_a": tuple(
        [("role_writer", "bootstrap_role")] + _TRIAL_BLOCK + _GATE + _ACTION_BLOCK
    ),
    # gate fires on trial 0: one critic + one refiner, one replan cycle
    "scenario_b": tuple(
        [("role_writer", "bootstrap_role")]
        + _TRIAL_BLOCK
        + _GATE
        + [("critic", "criticize"), ("refiner", "refine")]
        + _REPLAN_BLOCK_SEQ
        + _ACTION_BLOCK
    ),
    # single trial: the gate is never evaluated
    "scenario_c": tuple(
        [("role_writer", "bootstrap_role")] + _TRIAL_BLOCK + _ACTION_BLOCK
    ),
}


def scenario_task() -> Task:
    return Task(
        id="scenario-001",
        goal="Answer the question using the provided content.",
        inputs=(ContentItem.from_text("Question: what did the probe photograph?"),),
        allowed_actions=frozenset({1}),
    )


def scenario_setup(name: str) -> RunSetup:
    actor = _mock("unit-actor", "ANSWER: the outer belt", "ANSWER: the outer asteroid belt")
    common = {
        UnitRole.ROLE_WRITER: _mock("role-scribe", "You are a careful analyst."),
        UnitRole.REASONER: _mock("unit-reasoner"),
        UnitRole.ACTOR: actor,
    }
    if name == "scenario_a":
        bindings = {
            **common,
            UnitRole.PLANNER: _mock("unit-planner", QA_PLAN_BLOCK),
            UnitRole.OPTIMIZER: _mock("unit-optimizer", *_optimizer_script([QA_PLAN_BLOCK], 1)),
            UnitRole.CRITIC: _mock("unit-critic"),
            UnitRole.REFINER: _mock("unit-refiner"),
        }
        trials = 2
    elif name == "scenario_b":
        critic = ProviderConfig(
            backend=Backend.MOCK,
            model_name="unit-critic",
            script=MockScript.of(
                "VERDICT: A\nFEEDBACK: Tie the answer to the cited passage."
            ),
            embedding_overrides={
                QA_PLAN_BLOCK: (2.0, 0.0),
                ALT_QA_PLAN_BLOCK: (0.0, 2.0),
            },
        )
        bindings = {
            **common,
            UnitRole.PLANNER: _mock("unit-planner", QA_PLAN_BLOCK, REPLAN_BLOCK),
            UnitRole.OPTIMIZER: _mock(
                "unit-optimizer",
                *_optimizer_script([ALT_QA_PLAN_BLOCK, REPLAN_BLOCK], 1),
            ),
            UnitRole.CRITIC: critic,
            UnitRole.REFINER: _mock(
                "unit-refiner", "Plan a single QA action citing the passage."
            ),
        }
        trials = 2
    elif name == "scenario_c":
        bindings = {
            **common,
            UnitRole.PLANNER: _mock("unit-planner", QA_PLAN_BLOCK),
            UnitRole.OPTIMIZER: _mock("unit-optimizer", *_optimizer_script([QA_PLAN_BLOCK], 1)),
            UnitRole.CRITIC: _mock("unit-critic"),
            UnitRole.REFINER: _mock("unit-refiner"),
        }
        trials = 1
    else:
        raise ValueError(f"unknown scenario {name!r}")
    return RunSetup(
        engine=EngineConfig(
            role_bindings=bindings,
            theta=0.1,
            trials=trials,
            tgd_iterations=1,
            strategy=ReasoningStrategy.zero_shot_cot(),
        )
    )


# ---------------------------------------------------------------------------
# regeneration and integrity checking

_DATASETS = {
    "mini_qa.jsonl": (QA_DATASET, TaskKind.QA),
    "mini_title.jsonl": (TITLE_DATASET, TaskKind.TITLE),
    "mini_category.jsonl": (CATEGORY_DATASET, TaskKind.CATEGORIZE),
}

_EVAL_FIXTURES = {
    "qa": ("mini_qa.jsonl", "qa_eval_config.json", "golden_qa_report.json", TaskKind.QA),
    "title": (
        "mini_title.jsonl",
        "title_eval_config.json",
        "golden_title_report.json",
        TaskKind.TITLE,
    ),
    "categorize": (
        "mini_category.jsonl",
        "category_eval_config.json",
        "golden_category_report.json",
        TaskKind.CATEGORIZE,
    ),
}


def _dataset_text(rows: list[dict]) -> str:
    return "\n".join(json.dumps(row, sort_keys=True, ensure_ascii=False) for row in rows) + "\n"


def _resolve_store(path: str | None) -> str | None:
    if path is None or Path(path).is_absolute():
        return path
    return str(fixture_dir() / path)


def _eval_report_text(setup: RunSetup, dataset_name: str, kind: TaskKind) -> str:
    records = load_dataset(fixture_path(dataset_name), kind)
    taxonomy_path = _resolve_store(setup.taxonomy_path)
    toolstore_path = _resolve_store(setup.toolstore_path)
    taxonomy_obj = load_taxonomy(taxonomy_path) if taxonomy_path else None
    tools = load_toolstore(toolstore_path) if toolstore_path else None
    report = run_eval(
        records,
        kind,
        setup.engine,
        tools=tools,
        taxonomy=taxonomy_obj,
        record_scripts=setup.record_scripts,
        workers=GOLDEN_WORKERS,
    )
    return canonical.serialize(report)


def _solve_report_text(setup: RunSetup, task: Task) -> str:
    response = engine.solve(task, EnvironmentContext(), setup.engine)
    return engine.run_report(task, response)


def regenerate(target: Path | None = None) -> list[str]:
    """Write every fixture file (datasets, stores, configs, reference
    sequences) and regenerate the golden reports from their scripts."""
    target = target or fixture_dir()
    target.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    def write(name: str, text: str) -> None:
        (target / name).write_text(text, encoding="utf-8")
        written.append(name)

    for name, (rows, _) in _DATASETS.items():
        write(name, _dataset_text(rows))
    write("taxonomy.json", canonical.serialize(taxonomy()))
    write("toolstore.json", canonical.serialize(toolstore()))

    setups = {
        "qa_eval_config.json": qa_setup(),
        "title_eval_config.json": title_setup(),
        "category_eval_config.json": category_setup(),
        "solve_config.json": solve_setup(),
        "plan_identical_config.json": plan_identical_setup(),
        "plan_divergent_config.json": plan_divergent_setup(),
        "scenario_a_config.json": scenario_setup("scenario_a"),
        "scenario_b_config.json": scenario_setup("scenario_b"),
        "scenario_c_config.json": scenario_setup("scenario_c"),
    }
    for name, setup in setups.items():
        write(name, canonical.serialize(setup))

    write("example_task.json", canonical.serialize(example_task()))
    write("plan_task.json", canonical.serialize(plan_task()))
    write("scenario_task.json", canonical.serialize(scenario_task()))

    for name, sequence in SCENARIO_SEQUENCES.items():
        write(
            f"{name}_sequence.json",
            canonical.dumps({"sequence": [list(pair) for pair in sequence]}),
        )

    for dataset_name, config_name, golden_name, kind in _EVAL_FIXTURES.values():
        write(golden_name, _eval_report_text(setups[config_name], dataset_name, kind))
    write("golden_solve_report.json", _solve_report_text(solve_setup(), example_task()))
    return written


@dataclass(frozen=True)
class IntegrityReport:
    ok: bool
    checked: tuple[str, ...]
    failures: tuple[str, ...]


def fixture_integrity_check() -> IntegrityReport:
    """Verify every bundled fixture parses under its loader and that each
    golden report regenerates byte-identically from its scripts."""
    checked: list[str] = []
    failures: list[str] = []

    def check(name: str, fn) -> None:
        checked.append(name)
        try:
            fn()
        except Exception as exc:  # report-style: collect, never raise
            failures.append(f"{name}: {exc}")

    for name, (rows, kind) in _DATASETS.items():
        check(
            name,
            lambda name=name, rows=rows, kind=kind: _expect(
                len(load_dataset(fixture_path(name), kind)) == len(rows),
                "record count mismatch",
            ),
        )
    check("taxonomy.json", lambda: load_taxonomy(fixture_path("taxonomy.json")))
    check("toolstore.json", lambda: load_toolstore(fixture_path("toolstore.json")))

    for config_name in (
        "qa_eval_config.json",
        "title_eval_config.json",
        "category_eval_config.json",
        "solve_config.json",
        "plan_identical_config.json",
        "plan_divergent_config.json",
        "scenario_a_config.json",
        "scenario_b_config.json",
        "scenario_c_config.json",
    ):
        check(config_name, lambda name=config_name: evaluation.load_setup(fixture_path(name)))
    for task_name in ("example_task.json", "plan_task.json", "scenario_task.json"):
        check(task_name, lambda name=task_name: canonical.deserialize(
            fixture_path(name).read_text(encoding="utf-8")
        ))

    for dataset_name, config_name, golden_name, kind in _EVAL_FIXTURES.values():
        def regen(dataset_name=dataset_name, config_name=config_name, golden_name=golden_name, kind=kind):
            setup = evaluation.load_setup(fixture_path(config_name))
            fresh = _eval_report_text(setup, dataset_name, kind)
            committed = fixture_path(golden_name).read_text(encoding="utf-8")
            _expect(fresh == committed, "regenerated report differs from committed golden")
        check(golden_name, regen)

    def regen_solve():
        setup = evaluation.load_setup(fixture_path("solve_config.json"))
        task = canonical.deserialize(fixture_path("example_task.json").read_text(encoding="utf-8"))
        fresh = _solve_report_text(setup, task)
        committed = fixture_path("golden_solve_report.json").read_text(encoding="utf-8")
        _expect(fresh == committed, "regenerated report differs from committed golden")

    check("golden_solve_report.json", regen_solve)

    for name, sequence in SCENARIO_SEQUENCES.items():
        def match(name=name, sequence=sequence):
            data = json.loads(fixture_path(f"{name}_sequence.json").read_text(encoding="utf-8"))
            committed = tuple(tuple(pair) for pair in data["sequence"])
            _expect(committed == sequence, "committed sequence differs from the protocol reference")
        check(f"{name}_sequence.json", match)

    return IntegrityReport(ok=not failures, checked=tuple(checked), failures=tuple(failures))


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise AssertionError(message)


if __name__ == "__main__":
    names = regenerate()
    print(f"wrote {len(names)} fixture files to {fixture_dir()}")
    report = fixture_integrity_check()
    print("integrity:", "ok" if report.ok else "FAILED")
    for failure in report.failures:
        print(" -", failure)
