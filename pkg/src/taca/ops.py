"""Command-level operations shared by the CLI and the HTTP service."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .events import COMPONENT_STATUS, EA_MEASUREMENT, QA_MEASUREMENT, Diagnostic
from .kb import KnowledgeBase, ServiceError
from .model import schema as s
from .model.counting import ElementCount, count_elements
from .model.hypothetical import generate_hypothetical, predicted_elements
from .model.scenario import ScenarioError, load_scenario, serialize
from .sim import RunResult, check_behaviors, run_scenario

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_MISSION = 2
EXIT_INTERNAL = 3

QUERIES = {
    "selectable-actions": 0,
    "selectable-designs": 1,
    "selectable-configs": 1,
    "adaptable-functions": 0,
    "adaptable-components": 0,
    "status": 1,
    "parameters": 1,
}


def bundled_scenarios() -> list[str]:
    root = resources.files("taca") / "scenarios"
    return sorted(p.name[: -len(".rosa")] for p in root.iterdir() if p.name.endswith(".rosa"))


def bundled_text(name: str) -> str:
    return (resources.files("taca") / "scenarios" / f"{name}.rosa").read_text()


def read_scenario(path_or_name: str) -> str:
    """Read a scenario file; a bare bundled scenario name also works."""
    p = Path(path_or_name)
    if p.exists():
        return p.read_text()
    if path_or_name in bundled_scenarios():
        return bundled_text(path_or_name)
    raise FileNotFoundError(path_or_name)


@dataclass
class ValidationReport:
    valid: bool
    counts: ElementCount | None = None
    error: str | None = None
    line: int = 0
    column: int = 0

    def to_text(self) -> str:
        if self.valid:
            return f"{self.counts}\n"
        return f"error: {self.error}\n"


def validate_text(text: str) -> ValidationReport:
    try:
        doc, store = load_scenario(text)
        check_behaviors(doc)
    except ScenarioError as exc:
        return ValidationReport(False, error=str(exc), line=exc.line, column=exc.column)
    return ValidationReport(True, counts=count_elements(store))


@dataclass
class RunOutcome:
    exit_code: int
    result: str
    metrics_text: str = ""
    trace_text: str = ""
    error: str | None = None


def run_text(text: str, max_ticks: int = 1000, seed: int = 0) -> RunOutcome:
    try:
        doc, _ = load_scenario(text)
        check_behaviors(doc)
    except ScenarioError as exc:
        return RunOutcome(EXIT_INVALID, "invalid", error=str(exc))
    res: RunResult = run_scenario(doc, max_ticks, seed)
    code = EXIT_OK if res.metrics.result == "success" else EXIT_MISSION
    return RunOutcome(code, res.metrics.result, res.metrics.to_text(), res.trace_text())


def parse_overrides(items: list[str]) -> dict[str, str]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ValueError(f"expected key=value, got {item!r}")
        out[key] = value
    return out


def apply_overrides(kb: KnowledgeBase, overrides: dict[str, str]) -> None:
    """Ingest measurement (or component status) overrides at the current tick."""
    for key, value in overrides.items():
        inst = kb.store.find(s.MEASURE, key)
        if inst is not None:
            kind = EA_MEASUREMENT if inst.type_name == s.ENVIRONMENTAL_ATTRIBUTE else QA_MEASUREMENT
        elif kb.store.find(s.COMPONENT, key) is not None:
            kind = COMPONENT_STATUS
        else:
            raise ServiceError(f"unknown measure or component {key!r}")
        if not kb.ingest(Diagnostic("cli", kind, key, value, kb.tick)):
            raise ServiceError(f"override {key}={value} rejected")


def query_text(
    text: str,
    query: str,
    args: list[str] | None = None,
    overrides: dict[str, str] | None = None,
    require: list[str] | None = None,
) -> list[str]:
    """Evaluate a named derived set on a freshly loaded model.

    ``require`` opens a request for each named action first, which makes the
    adaptable sets meaningful.
    """
    args = list(args or [])
    if query not in QUERIES:
        raise ServiceError(f"unknown query {query!r}; choose from {', '.join(QUERIES)}")
    if len(args) != QUERIES[query]:
        raise ServiceError(f"query {query!r} takes {QUERIES[query]} argument(s)")
    _, store = load_scenario(text)
    kb = KnowledgeBase(store)
    apply_overrides(kb, overrides or {})
    for action in require or []:
        kb.call("action/request", {"action": action, "operation": "start"})
    if query == "selectable-actions":
        return kb.call("action/selectable")
    if query == "adaptable-functions":
        return kb.call("function/adaptable")
    if query == "adaptable-components":
        return kb.call("component/adaptable")
    if query == "selectable-designs":
        return [c["name"] for c in kb.call("function_designs/selectable", {"function": args[0]})["candidates"]]
    if query == "selectable-configs":
        return [
            c["name"] for c in kb.call("component_configuration/selectable", {"component": args[0]})["candidates"]
        ]
    if query == "parameters":
        return [f"{p['key']}={p['value']}" for p in kb.call("component_parameters/get", {"component": args[0]})]
    inst = store.find(s.ACTION, args[0]) or store.find(s.FUNCTION, args[0]) or store.find(s.COMPONENT, args[0])
    if inst is None:
        inst = store.find(s.FUNCTION_DESIGN, args[0]) or store.find(s.COMPONENT_CONFIGURATION, args[0])
    if inst is None:
        raise ServiceError(f"unknown element {args[0]!r}")
    return [kb.engine.status(inst.id)]


@dataclass
class GenerateOutcome:
    scenario: str
    predicted: int
    counted: int
    per_action: list[int] = field(default_factory=list)


def generate(n_actions: int, n_sa: int, n_pa: int) -> GenerateOutcome:
    doc = generate_hypothetical(n_actions, [(n_sa, n_pa)] * n_actions)
    text = serialize(doc)
    _, store = load_scenario(text)
    per = predicted_elements(n_sa, n_pa)
    return GenerateOutcome(text, per * n_actions, count_elements(store).total, [per] * n_actions)
