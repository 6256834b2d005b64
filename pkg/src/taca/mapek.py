"""The managing loop: planner, executor and a FIFO engine driving them.

Planner and executor keep no state between events. They read and write the
knowledge base only through its named services, so either can be torn down and
rebuilt between two events without changing what the loop does.
"""

from __future__ import annotations

import logging
from typing import Any, Protocol

from .events import (
    ACTION_UPDATE,
    COMPONENT_STATUS,
    MONITORING_DATA,
    RECONFIGURATION_PLAN,
    Diagnostic,
    Event,
    EventBus,
)
from .kb import PLAN_COMPLETED, PLAN_FAILED, KnowledgeBase

__all__ = [
    "Diagnostic",
    "Engine",
    "Event",
    "EventBus",
    "Executor",
    "Planner",
    "ProcessManager",
    "ProcessStartError",
    "choose_best",
]

log = logging.getLogger(__name__)

MAX_PLANNING_ROUNDS = 8
MAX_EVENTS_PER_DRAIN = 10_000


class ProcessStartError(Exception):
    pass


class ProcessManager(Protocol):
    """What the executor needs from the managed subsystem."""

    def start(self, component: str, parameters: dict[str, str]) -> int: ...

    def stop(self, component: str) -> None: ...

    def set_parameters(self, component: str, parameters: dict[str, str]) -> None: ...


def choose_best(response: dict[str, Any]) -> dict[str, Any] | None:
    """Pick a candidate from a ``*/selectable`` response.

    Candidates arrive sorted by (priority, name). When a preferred measure is
    set, candidates estimated on it come first, best estimate first; the sort
    is stable so priority and name still break ties.
    """
    cands = response.get("candidates") or []
    if not cands:
        return None
    measure = response.get("preferred_measure")
    if measure is None:
        return cands[0]

    def key(c: dict[str, Any]) -> tuple[int, float]:
        for e in c["estimations"]:
            if e["measure"] == measure:
                return (0, -e["value"] if e["type"] == "maximize" else e["value"])
        return (1, 0.0)

    return sorted(cands, key=key)[0]


class Planner:
    """Selects designs and configurations for adaptable elements."""

    def plan(self, kb: KnowledgeBase) -> int | None:
        plan_id = None
        for _ in range(MAX_PLANNING_ROUNDS):
            fds, ccs = [], []
            for f in kb.call("function/adaptable"):
                best = choose_best(kb.call("function_designs/selectable", {"function": f}))
                if best is None:
                    log.info("no selectable design for %s", f)
                elif not best["selected"]:
                    fds.append(best["name"])
            for c in kb.call("component/adaptable"):
                best = choose_best(kb.call("component_configuration/selectable", {"component": c}))
                if best is None:
                    log.info("no selectable configuration for %s", c)
                elif not best["selected"]:
                    ccs.append(best["name"])
            if not fds and not ccs:
                break
            plan_id = kb.call(
                "select_configuration", {"function_designs": fds, "component_configurations": ccs}
            )
        if plan_id is None:
            diff = kb.call("architecture/diff")
            if diff["activations"] or diff["deactivations"]:
                plan_id = kb.call("select_configuration", {})
        return plan_id


class Executor:
    """Applies the latest unexecuted reconfiguration plan to the managed processes."""

    def execute(self, kb: KnowledgeBase, processes: ProcessManager) -> str | None:
        plan = kb.call("reconfiguration_plan/get_latest")
        if not plan or plan["result"] is not None:
            return None
        refused = []
        for comp in plan["deactivations"]:
            processes.stop(comp)
            kb.call("component/active/set", {"component": comp, "active": False})
        for comp in plan["activations"]:
            params = _params(kb, comp)
            try:
                pid = processes.start(comp, params)
            except ProcessStartError as exc:
                log.warning("component %s refused to start: %s", comp, exc)
                refused.append(comp)
                continue
            kb.call("component/active/set", {"component": comp, "active": True, "pid": pid})
        for comp in dict.fromkeys(plan["adapted_components"]):
            if comp not in plan["activations"]:
                processes.set_parameters(comp, _params(kb, comp))
        result = PLAN_FAILED if refused else PLAN_COMPLETED
        kb.call("reconfiguration_plan/result/set", {"id": plan["id"], "result": result})
        for comp in refused:
            kb.ingest(Diagnostic("executor", COMPONENT_STATUS, comp, "failure", kb.tick))
        return result


def _params(kb: KnowledgeBase, comp: str) -> dict[str, str]:
    return {p["key"]: p["value"] for p in kb.call("component_parameters/get", {"component": comp})}


class Engine:
    """Handles events one at a time, in publication order, each to completion.

    With ``rebuild=True`` the planner and executor are recreated before every
    event, which must not change behaviour.
    """

    def __init__(self, kb: KnowledgeBase, processes: ProcessManager, rebuild: bool = False):
        self.kb = kb
        self.processes = processes
        self.rebuild = rebuild
        self.planner = Planner()
        self.executor = Executor()
        self.handled: list[Event] = []

    @property
    def bus(self) -> EventBus:
        return self.kb.bus

    def ingest(self, diagnostics: list[Diagnostic]) -> None:
        for d in diagnostics:
            self.kb.ingest(d)

    def drain(self) -> list[Event]:
        done = []
        while (event := self.bus.pop()) is not None:
            if len(done) >= MAX_EVENTS_PER_DRAIN:
                raise RuntimeError("event storm: drain did not converge")
            if self.rebuild:
                self.planner = Planner()
                self.executor = Executor()
            if event.kind in (MONITORING_DATA, ACTION_UPDATE):
                self.planner.plan(self.kb)
            elif event.kind == RECONFIGURATION_PLAN:
                self.executor.execute(self.kb, self.processes)
            done.append(event)
        self.handled.extend(done)
        return done
