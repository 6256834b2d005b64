"""Deterministic tick-based managed subsystem and scenario runner.

One tick is one simulated second. Each tick runs in lockstep:

1. plant physics advance and due timeline events are injected
2. monitors report diagnostics, which the knowledge base ingests
3. the managing loop drains its event queue
4. the mission tree is ticked, then the event queue is drained again

The plant is a handful of scalars. Its constants come from the scenario's
plant section; the defaults below are plumbing values, not measured ones.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from typing import Any, Callable

from .bt import BehaviorTree, Status, build_tree
from .events import COMPONENT_STATUS, EA_MEASUREMENT, QA_MEASUREMENT, Diagnostic
from .kb import KnowledgeBase
from .mapek import Engine, ProcessStartError
from .model import schema as s
from .model.scenario import ScenarioDocument, ScenarioError, load_scenario, populate

log = logging.getLogger(__name__)

PLANT_DEFAULTS: dict[str, Any] = {
    "battery": 1.0,
    "discharge_rate": 0.0,
    "recharge_rate": 0.05,
    "recharge_target": 1.0,
    "water_visibility": 4.0,
    "water_visibility_walk": 0.0,
    "light_level": 1.0,
    "measurement_period": 1,
    "search_rate": 1.0,
    "search_target": 40.0,
    "altitude_factor_high": 1.0,
    "altitude_factor_medium": 0.6,
    "altitude_factor_low": 0.3,
    "inspect_rate": 1.0,
    "inspect_target": 20.0,
    "motion_components": "",
    "backup_motion_components": "",
    "search_component": "",
    "inspect_component": "",
    "recharge_component": "",
    "drive_component": "",
    "start_position": "",
    "corridor_cost": 3,
    "task_duration": 3,
}

# plant variables reported by monitors under these measure names
MONITORED = {"battery_level": "battery", "water_visibility": "water_visibility", "light_level": "light_level"}

FIXED_BEHAVIORS = (
    "search",
    "inspect",
    "recharge",
    "pipeline_found",
    "inspection_done",
    "battery_ok",
    "hold",
    "succeed",
    "fail",
)
BEHAVIOR_PREFIXES = ("goto:", "task:", "untouched:", "done:")


def _csv(value: Any) -> list[str]:
    return [v for v in str(value).split(",") if v] if value not in ("", None) else []


def _fmt(v: float) -> str:
    return format(round(float(v), 6), "g")


# -- processes ---------------------------------------------------------------


@dataclass
class SimProcess:
    component: str
    state: str = "stopped"
    pid: int | None = None
    parameters: dict[str, str] = field(default_factory=dict)
    start_failures: set[int] = field(default_factory=set)
    failed: bool = False

    @property
    def healthy(self) -> bool:
        return self.state == "running" and not self.failed


class ProcessTable:
    """Simulated process supervisor; pids are assigned monotonically."""

    def __init__(self, clock: Callable[[], int], first_pid: int = 100):
        self._clock = clock
        self._next_pid = first_pid
        self.procs: dict[str, SimProcess] = {}
        self.operations: list[tuple[int, str, str]] = []

    def proc(self, component: str) -> SimProcess:
        return self.procs.setdefault(component, SimProcess(component))

    def start(self, component: str, parameters: dict[str, str]) -> int:
        p = self.proc(component)
        now = self._clock()
        due = sorted(t for t in p.start_failures if t <= now)
        if due:
            p.start_failures.discard(due[0])
            self.operations.append((now, "start-refused", component))
            raise ProcessStartError(f"{component} refused to start")
        if p.state != "running":
            p.state = "running"
            p.pid = self._next_pid
            self._next_pid += 1
        p.parameters = dict(parameters)
        self.operations.append((now, "start", component))
        return p.pid

    def stop(self, component: str) -> None:
        p = self.proc(component)
        p.state, p.pid = "stopped", None
        self.operations.append((self._clock(), "stop", component))

    def set_parameters(self, component: str, parameters: dict[str, str]) -> None:
        self.proc(component).parameters.update(parameters)
        self.operations.append((self._clock(), "set-parameters", component))

    def healthy(self, component: str) -> bool:
        p = self.procs.get(component)
        return p is not None and p.healthy

    def running(self) -> list[str]:
        return sorted(c for c, p in self.procs.items() if p.state == "running")


# -- plant -------------------------------------------------------------------


@dataclass
class PlantState:
    tick: int = 0
    battery: float = 1.0
    water_visibility: float = 4.0
    light_level: float = 1.0
    pipeline_found: bool = False
    search_progress: float = 0.0
    inspected_distance: float = 0.0
    search_ticks: int | None = None
    recharging: bool = False
    position: str = ""
    route: list[str] = field(default_factory=list)
    progress: dict[str, float] = field(default_factory=dict)
    started: set[str] = field(default_factory=set)
    done: set[str] = field(default_factory=set)

    def snapshot(self) -> dict[str, Any]:
        return {
            "battery": round(self.battery, 6),
            "water_visibility": round(self.water_visibility, 6),
            "light_level": round(self.light_level, 6),
            "pipeline_found": self.pipeline_found,
            "search_progress": round(self.search_progress, 6),
            "inspected_distance": round(self.inspected_distance, 6),
            "position": self.position,
            "route": list(self.route),
            "done": sorted(self.done),
        }


class Simulator:
    def __init__(self, doc: ScenarioDocument, seed: int = 0):
        self.doc = doc
        self.params = {**PLANT_DEFAULTS, **doc.plant}
        self.rng = random.Random(seed)
        self.plant = PlantState(
            battery=float(self.params["battery"]),
            water_visibility=float(self.params["water_visibility"]),
            light_level=float(self.params["light_level"]),
            position=str(self.params["start_position"]),
        )
        self.processes = ProcessTable(lambda: self.plant.tick)
        self._measure_kinds = {
            d.name: d.kind for d in doc.model if d.kind in ("measure", "quality-attribute", "environmental-attribute")
        }

    # -- helpers

    def p(self, key: str, default: Any = None) -> Any:
        return self.params.get(key, default)

    def motion_ok(self) -> bool:
        main = _csv(self.p("motion_components"))
        backup = _csv(self.p("backup_motion_components"))
        if main and all(self.processes.healthy(c) for c in main):
            return True
        if backup and all(self.processes.healthy(c) for c in backup):
            return True
        return not main and not backup

    def _diag_kind(self, measure: str) -> str:
        return EA_MEASUREMENT if self._measure_kinds.get(measure) == "environmental-attribute" else QA_MEASUREMENT

    def _measurement(self, measure: str, value: float, tick: int) -> Diagnostic:
        return Diagnostic("monitor", self._diag_kind(measure), measure, _fmt(value), tick)

    # -- step

    def step(self, tick: int) -> list[Diagnostic]:
        """Advance the plant to ``tick`` and return the diagnostics it emits."""
        pl = self.plant
        pl.tick = tick
        out: list[Diagnostic] = []
        if tick > 0:
            consumers = _csv(self.p("motion_components")) + _csv(self.p("backup_motion_components"))
            drive = self.p("drive_component")
            if drive:
                consumers.append(drive)
            if any(self.processes.healthy(c) for c in consumers):
                pl.battery = max(0.0, pl.battery - float(self.p("discharge_rate")))
            walk = float(self.p("water_visibility_walk"))
            if walk:
                pl.water_visibility = max(0.0, pl.water_visibility + self.rng.uniform(-walk, walk))

        reported: set[str] = set()
        for ev in self.doc.timeline:
            if ev.tick != tick:
                continue
            if ev.kind == "measure":
                attr = MONITORED.get(ev.target)
                if attr is not None:
                    setattr(pl, attr, min(1.0, max(0.0, ev.value)) if attr == "battery" else ev.value)
                out.append(self._measurement(ev.target, ev.value, tick))
                reported.add(ev.target)
            elif ev.kind == "fail":
                self.processes.proc(ev.target).failed = True
                out.append(Diagnostic("monitor", COMPONENT_STATUS, ev.target, "failure", tick))
            elif ev.kind == "recover":
                self.processes.proc(ev.target).failed = False
                out.append(Diagnostic("monitor", COMPONENT_STATUS, ev.target, "ok", tick))
            elif ev.kind == "refuse-start":
                self.processes.proc(ev.target).start_failures.add(tick)

        period = int(self.p("measurement_period"))
        if period > 0 and tick % period == 0:
            for measure, attr in MONITORED.items():
                if measure in self._measure_kinds and measure not in reported:
                    out.append(self._measurement(measure, getattr(pl, attr), tick))
        return out

    # -- behaviors

    def behavior(self, name: str) -> "SimBehavior":
        if name in FIXED_BEHAVIORS:
            fn = getattr(self, f"_b_{name}")
            return SimBehavior(name, fn, getattr(self, f"_h_{name}", None))
        for prefix in BEHAVIOR_PREFIXES:
            if name.startswith(prefix) and len(name) > len(prefix):
                arg = name[len(prefix) :]
                kind = prefix[:-1]
                return SimBehavior(
                    name, lambda: getattr(self, f"_b_{kind}")(arg), lambda: getattr(self, f"_h_{kind}")(arg)
                )
        raise ScenarioError(f"unknown behavior {name!r}")

    def _b_search(self) -> Status:
        pl = self.plant
        if pl.pipeline_found:
            return Status.SUCCESS
        comp = self.p("search_component")
        if self.processes.healthy(comp) and self.motion_ok():
            altitude = self.processes.proc(comp).parameters.get("altitude", "")
            factor = float(self.p(f"altitude_factor_{altitude}", 0.0))
            pl.search_progress += float(self.p("search_rate")) * factor
            if pl.search_progress >= float(self.p("search_target")) - 1e-9:
                pl.pipeline_found = True
                pl.search_ticks = pl.tick
                return Status.SUCCESS
        return Status.RUNNING

    def _inspection_done(self) -> bool:
        return self.plant.inspected_distance >= float(self.p("inspect_target")) - 1e-9

    def _b_inspect(self) -> Status:
        pl = self.plant
        if self._inspection_done():
            return Status.SUCCESS
        if not pl.pipeline_found:
            return Status.FAILURE
        if self.processes.healthy(self.p("inspect_component")) and self.motion_ok():
            pl.inspected_distance += float(self.p("inspect_rate"))
            if self._inspection_done():
                return Status.SUCCESS
        return Status.RUNNING

    def _b_recharge(self) -> Status:
        pl = self.plant
        target = float(self.p("recharge_target"))
        if not pl.recharging and pl.battery >= target - 1e-9:
            return Status.SUCCESS
        pl.recharging = True
        if self.processes.healthy(self.p("recharge_component")) and self.motion_ok():
            pl.battery = min(1.0, pl.battery + float(self.p("recharge_rate")))
            if pl.battery >= target - 1e-9:
                pl.recharging = False
                return Status.SUCCESS
        return Status.RUNNING

    def _b_pipeline_found(self) -> Status:
        return Status.SUCCESS if self.plant.pipeline_found else Status.FAILURE

    def _b_inspection_done(self) -> Status:
        return Status.SUCCESS if self._inspection_done() else Status.FAILURE

    def _b_battery_ok(self) -> Status:
        # fails while a started recharge has not reached its target (hysteresis)
        return Status.FAILURE if self.plant.recharging else Status.SUCCESS

    def _b_hold(self) -> Status:
        return Status.RUNNING

    def _b_succeed(self) -> Status:
        return Status.SUCCESS

    def _b_fail(self) -> Status:
        return Status.FAILURE

    def _b_goto(self, corridor: str) -> Status:
        pl = self.plant
        if corridor in pl.route:
            return Status.SUCCESS
        drive = self.p("drive_component")
        if not drive or self.processes.healthy(drive):
            key = f"goto:{corridor}"
            pl.progress[key] = pl.progress.get(key, 0) + 1
            cost = float(self.p(f"corridor_cost_{corridor}", self.p("corridor_cost")))
            if pl.progress[key] >= cost:
                pl.route.append(corridor)
                pl.position = corridor
                return Status.SUCCESS
        return Status.RUNNING

    def _h_goto(self, corridor: str) -> None:
        self.plant.progress.pop(f"goto:{corridor}", None)

    def _b_task(self, name: str) -> Status:
        pl = self.plant
        if name in pl.done:
            return Status.SUCCESS
        pl.started.add(name)
        needs = _csv(self.p(f"needs_{name}", ""))
        if all(self.processes.healthy(c) for c in needs):
            key = f"task:{name}"
            pl.progress[key] = pl.progress.get(key, 0) + 1
            if pl.progress[key] >= float(self.p(f"duration_{name}", self.p("task_duration"))):
                pl.done.add(name)
                return Status.SUCCESS
        return Status.RUNNING

    def _h_task(self, name: str) -> None:
        self.plant.progress.pop(f"task:{name}", None)

    def _b_untouched(self, name: str) -> Status:
        return Status.FAILURE if name in self.plant.started else Status.SUCCESS

    def _h_untouched(self, name: str) -> None:
        pass

    def _b_done(self, name: str) -> Status:
        return Status.SUCCESS if name in self.plant.done else Status.FAILURE

    def _h_done(self, name: str) -> None:
        pass


class SimBehavior:
    def __init__(self, name: str, tick_fn: Callable[[], Status], halt_fn: Callable[[], None] | None = None):
        self.name = name
        self._tick = tick_fn
        self._halt = halt_fn

    def tick(self) -> Status:
        return self._tick()

    def halt(self) -> None:
        if self._halt is not None:
            self._halt()


def check_behaviors(doc: ScenarioDocument) -> None:
    """Reject mission behavior names the simulator does not provide."""
    if doc.mission is None:
        return
    for n in doc.mission.walk():
        name = n.args[1] if n.kind == "action" else n.args[0] if n.kind == "leaf" else None
        if name is None:
            continue
        if name in FIXED_BEHAVIORS:
            continue
        if any(name.startswith(p) and len(name) > len(p) for p in BEHAVIOR_PREFIXES):
            continue
        raise ScenarioError(f"unknown behavior {name!r}", n.line, 1)


# -- runs --------------------------------------------------------------------


@dataclass
class Metrics:
    result: str = "running"
    ticks: int = 0
    search_ticks: int | None = None
    inspected_distance: float = 0.0
    plans: int = 0
    plans_failed: int = 0
    route: list[str] = field(default_factory=list)
    actions: list[str] = field(default_factory=list)
    reaction_ticks: dict[str, int | None] = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [
            f"result: {self.result}",
            f"ticks: {self.ticks}",
            f"search_ticks: {'none' if self.search_ticks is None else self.search_ticks}",
            f"inspected_distance: {_fmt(self.inspected_distance)}",
            f"plans: {self.plans}",
            f"plans_failed: {self.plans_failed}",
            f"route: {','.join(self.route)}",
            f"actions: {','.join(self.actions)}",
        ]
        for label in sorted(self.reaction_ticks):
            v = self.reaction_ticks[label]
            lines.append(f"reaction_ticks.{label}: {'none' if v is None else v}")
        return "\n".join(lines) + "\n"


@dataclass
class RunResult:
    metrics: Metrics
    trace: list[dict[str, Any]]
    kb: KnowledgeBase

    def trace_text(self) -> str:
        return "".join(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n" for r in self.trace)


def run_scenario(
    doc: ScenarioDocument,
    max_ticks: int = 1000,
    seed: int = 0,
    rebuild_components: bool = False,
) -> RunResult:
    """Run ``doc`` until the mission succeeds or fails, or ``max_ticks`` pass."""
    if max_ticks < 1:
        raise ValueError("max_ticks must be >= 1")
    check_behaviors(doc)
    store = s.new_store()
    populate(doc, store)
    kb = KnowledgeBase(store)
    sim = Simulator(doc, seed)
    engine = Engine(kb, sim.processes, rebuild=rebuild_components)
    action_names = {d.name for d in doc.model if d.kind == "action"}
    tree = build_tree(doc.mission, sim.behavior, action_names) if doc.mission else None

    trace: list[dict[str, Any]] = []
    metrics = Metrics()
    reactions: list[int] = []  # ticks at which an adaptive response happened
    result = "timeout"
    tick = 0
    for tick in range(max_ticks):
        kb.tick = tick
        ops_before = len(sim.processes.operations)
        events_before = len(kb.bus.log)
        diags = sim.step(tick)
        engine.ingest(diags)
        engine.drain()
        if tree is not None:
            status, bt_trace = tree.tick(kb)
        else:
            status, bt_trace = Status.SUCCESS, []
        if status is Status.RUNNING:
            # once the mission is over the managing loop stops with it
            engine.drain()

        idx = kb.index()
        plans = [kb.plan_record(p.id) for p in idx.plans if p.end_time == tick and p.start_time is not None]
        plans = [p for p in plans if p["activations"] or p["deactivations"] or p["parameter_adaptations"]]
        opened = [idx.names[r.action] for r in idx.required_actions if r.start_time == tick]
        closed = [
            [idx.names[r.action], r.result] for r in idx.required_actions if r.end_time == tick
        ]
        if plans or opened:
            reactions.append(tick)
        metrics.actions.extend(opened)
        trace.append(
            {
                "tick": tick,
                "plant": sim.plant.snapshot(),
                "diagnostics": [[d.kind, d.key, d.value] for d in diags],
                "events": [[e.kind, e.epoch] for e in kb.bus.log[events_before:]],
                "bt": [list(x) for x in bt_trace],
                "opened": opened,
                "closed": closed,
                "plans": plans,
                "operations": [[op, c] for _, op, c in sim.processes.operations[ops_before:]],
                "selected": {
                    "designs": sorted(d.name for d in idx.designs.values() if d.is_selected),
                    "configurations": sorted(c.name for c in idx.configurations.values() if c.is_selected),
                },
                "active": sorted(idx.names[c] for c in idx.components if c in idx.active),
                "status": status.value,
            }
        )
        if status is not Status.RUNNING:
            result = status.value
            break

    idx = kb.index()
    metrics.result = result
    metrics.ticks = tick + 1
    metrics.search_ticks = sim.plant.search_ticks
    metrics.inspected_distance = sim.plant.inspected_distance
    executed = [p for p in idx.plans if p.result is not None and (p.activations or p.deactivations or p.parameter_adaptations)]
    metrics.plans = len(executed)
    metrics.plans_failed = sum(1 for p in executed if p.result == "failed")
    metrics.route = list(sim.plant.route)
    for ev in doc.timeline:
        if ev.label is None or ev.tick > tick:
            continue
        later = [t for t in reactions if t >= ev.tick]
        value = later[0] - ev.tick if later else None
        prev = metrics.reaction_ticks.get(ev.label)
        if ev.label not in metrics.reaction_ticks or (value is None or (prev is not None and value > prev)):
            metrics.reaction_ticks[ev.label] = value
    return RunResult(metrics, trace, kb)


def run_text(text: str, max_ticks: int = 1000, seed: int = 0, rebuild_components: bool = False) -> RunResult:
    doc, _ = load_scenario(text)
    return run_scenario(doc, max_ticks, seed, rebuild_components)
