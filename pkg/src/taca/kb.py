"""Knowledge base: the store, status inference and the named service surface.

Every managing component talks to the system only through :meth:`KnowledgeBase.call`
and the event bus, so components hold no state of their own. Responses are plain
JSON-compatible data and depend only on store contents.
"""

from __future__ import annotations

import logging
from typing import Any, Callable

from .events import (
    ACTION_UPDATE,
    COMPONENT_STATUS,
    EA_MEASUREMENT,
    MONITORING_DATA,
    QA_MEASUREMENT,
    RECONFIGURATION_PLAN,
    Diagnostic,
    Event,
    EventBus,
)
from .inference import FAILURE, StatusEngine
from .model import schema as s
from .model.views import ModelIndex
from .store import Store, pattern_from_dict

log = logging.getLogger(__name__)

PLAN_COMPLETED = "completed"
PLAN_FAILED = "failed"


class ServiceError(Exception):
    pass


class KnowledgeBase:
    def __init__(self, store: Store, bus: EventBus | None = None):
        self.store = store
        self.engine = StatusEngine(store)
        self.bus = bus or EventBus()
        self.tick = 0
        self._services: dict[str, Callable[..., Any]] = {
            "function/adaptable": self._function_adaptable,
            "function_designs/selectable": self._fd_selectable,
            "function_designs/priority": self._fd_priority,
            "component/adaptable": self._component_adaptable,
            "component_configuration/selectable": self._cc_selectable,
            "component_configuration/priority": self._cc_priority,
            "select_configuration": self._select_configuration,
            "reconfiguration_plan/get_latest": self._plan_latest,
            "reconfiguration_plan/result/set": self._plan_result_set,
            "component/active/set": self._component_active_set,
            "component_parameters/get": self._component_parameters,
            "action/selectable": self._action_selectable,
            "action/request": self._action_request,
            "query": self._query,
            "architecture/diff": self._architecture_diff,
        }

    @property
    def service_names(self) -> list[str]:
        return list(self._services)

    def call(self, name: str, request: dict[str, Any] | None = None) -> Any:
        fn = self._services.get(name)
        if fn is None:
            raise ServiceError(f"unknown service {name!r}")
        return fn(**(request or {}))

    # -- helpers -------------------------------------------------------------

    def index(self) -> ModelIndex:
        return self.engine.index()

    def _id(self, type_name: str, name: str) -> int:
        inst = self.store.find(type_name, name)
        if inst is None:
            raise ServiceError(f"unknown {type_name} {name!r}")
        return inst.id

    def _publish(self, kind: str) -> None:
        self.bus.publish(Event(kind, self.store.epoch, self.tick))

    def name(self, iid: int) -> str:
        return self.index().names[iid]

    def _candidate(self, iid: int, idx: ModelIndex, views: dict) -> dict[str, Any]:
        v = views[iid]
        return {
            "name": v.name,
            "priority": v.priority,
            "selected": v.is_selected,
            "estimations": [
                {"measure": idx.names[e.measure], "value": e.value, "type": e.type}
                for e in idx.estimations_on.get(iid, [])
            ],
        }

    def preferred_measure(self, element: int) -> str | None:
        """Preferred measure of the first open request whose action needs ``element``.

        ``element`` is a function or a component; components are related through
        the selected designs of required functions.
        """
        idx = self.index()
        for ra in idx.open_required_actions():
            if ra.preferred_measure is None:
                continue
            funcs = idx.requirements.get(ra.action, [])
            if element in funcs:
                return idx.names[ra.preferred_measure]
            for f in funcs:
                d = idx.selected_design(f)
                if d is not None and element in idx.designs[d].members:
                    return idx.names[ra.preferred_measure]
        return None

    # -- monitor ingestion ---------------------------------------------------

    def ingest(self, d: Diagnostic) -> bool:
        """Store a diagnostic and publish monitoring data; False when rejected."""
        try:
            self._ingest(d)
        except (ServiceError, ValueError) as exc:
            log.error("diagnostic rejected: %s (%s)", exc, d)
            return False
        self._publish(MONITORING_DATA)
        return True

    def _ingest(self, d: Diagnostic) -> None:
        if d.kind in (QA_MEASUREMENT, EA_MEASUREMENT):
            inst = self.store.find(s.MEASURE, d.key)
            if inst is None:
                raise ServiceError(f"unknown measure {d.key!r}")
            wrong = s.ENVIRONMENTAL_ATTRIBUTE if d.kind == QA_MEASUREMENT else s.QUALITY_ATTRIBUTE
            if inst.type_name == wrong:
                raise ServiceError(f"{d.kind} cannot target {inst.type_name} {d.key!r}")
            value = float(d.value)
            latest = self.index().latest_measurement.get(inst.id)
            if latest is not None and d.tick < latest[0]:
                raise ServiceError(f"measurement for {d.key!r} at tick {d.tick} is older than {latest[0]}")
            self.store.insert(s.MEASUREMENT, {"value": value, "time": d.tick}, {"measure": [inst.id]})
        elif d.kind == COMPONENT_STATUS:
            cid = self._id(s.COMPONENT, d.key)
            if d.value == FAILURE:
                self.store.set_attribute(cid, "status", FAILURE)
            elif d.value in ("ok", "recovered"):
                self.store.delete_attribute(cid, "status")
            else:
                raise ServiceError(f"unknown component status {d.value!r}")
        else:
            raise ServiceError(f"unknown diagnostic kind {d.kind!r}")

    # -- model services ------------------------------------------------------

    def _function_adaptable(self) -> list[str]:
        return [self.name(f) for f in self.engine.adaptable_functions()]

    def _component_adaptable(self) -> list[str]:
        return [self.name(c) for c in self.engine.adaptable_components()]

    def _fd_selectable(self, function: str) -> dict[str, Any]:
        fid = self._id(s.FUNCTION, function)
        idx = self.index()
        return {
            "candidates": [self._candidate(d, idx, idx.designs) for d in self.engine.selectable_function_designs(fid)],
            "preferred_measure": self.preferred_measure(fid),
        }

    def _fd_priority(self, function: str) -> str | None:
        cands = self.engine.selectable_function_designs(self._id(s.FUNCTION, function))
        return self.name(cands[0]) if cands else None

    def _cc_selectable(self, component: str) -> dict[str, Any]:
        cid = self._id(s.COMPONENT, component)
        idx = self.index()
        return {
            "candidates": [
                self._candidate(c, idx, idx.configurations)
                for c in self.engine.selectable_component_configurations(cid)
            ],
            "preferred_measure": self.preferred_measure(cid),
        }

    def _cc_priority(self, component: str) -> str | None:
        cands = self.engine.selectable_component_configurations(self._id(s.COMPONENT, component))
        return self.name(cands[0]) if cands else None

    def _action_selectable(self) -> list[str]:
        return [self.name(a) for a in self.engine.selectable_actions()]

    def _component_parameters(self, component: str) -> list[dict[str, str]]:
        cid = self._id(s.COMPONENT, component)
        idx = self.index()
        cc = idx.selected_configuration(cid)
        if cc is None:
            return []
        out = []
        for p in idx.configurations[cc].members:
            inst = self.store.get(p)
            out.append({"key": inst.get("key"), "value": inst.get("value")})
        return out

    def _query(self, pattern: dict[str, Any]) -> list[dict[str, Any]]:
        return self.store.match(pattern_from_dict(pattern))

    # -- actions -------------------------------------------------------------

    def _action_request(
        self,
        action: str,
        operation: str,
        preferred_measure: str | None = None,
        result: str | None = None,
    ) -> int:
        aid = self._id(s.ACTION, action)
        open_ras = [r for r in self.index().open_required_actions() if r.action == aid]
        if operation == "start":
            if open_ras:
                raise ServiceError(f"action {action!r} already has an open request")
            roles = {"action": [aid]}
            if preferred_measure is not None:
                roles["preferred-measure"] = [self._id(s.MEASURE, preferred_measure)]
            rid = self.store.insert(s.REQUIRED_ACTION, {"start-time": self.tick}, roles)
        elif operation == "stop":
            if not open_ras:
                raise ServiceError(f"action {action!r} has no open request")
            rid = open_ras[0].id
            self.store.set_attribute(rid, "end-time", self.tick)
            self.store.set_attribute(rid, "result", result or "success")
        else:
            raise ServiceError(f"unknown action request operation {operation!r}")
        self._publish(ACTION_UPDATE)
        return rid

    # -- reconfiguration -----------------------------------------------------

    def goal_components(self) -> set[int]:
        """Components of the selected designs of every required function."""
        idx = self.index()
        snap = self.engine.snapshot()
        goal: set[int] = set()
        for f in idx.functions:
            if snap.required[f]:
                d = idx.selected_design(f)
                if d is not None:
                    goal.update(idx.designs[d].members)
        return goal

    def _architecture_diff(self) -> dict[str, list[str]]:
        idx = self.index()
        goal = self.goal_components()
        return {
            "activations": [idx.names[c] for c in idx.components if c in goal and c not in idx.active],
            "deactivations": [idx.names[c] for c in idx.components if c in idx.active and c not in goal],
        }

    def _select_configuration(
        self,
        function_designs: list[str] | None = None,
        component_configurations: list[str] | None = None,
    ) -> int:
        """Apply a selection delta and record the resulting reconfiguration plan.

        A plan that has not been executed yet absorbs later deltas, so one
        planning pass yields one plan event.
        """
        fds = [self._id(s.FUNCTION_DESIGN, n) for n in function_designs or []]
        ccs = [self._id(s.COMPONENT_CONFIGURATION, n) for n in component_configurations or []]
        idx = self.index()
        owners = [idx.designs[d].owner for d in fds]
        if len(set(owners)) != len(owners):
            raise ServiceError("conflicting delta: two designs selected for one function")
        cowners = [idx.configurations[c].owner for c in ccs]
        if len(set(cowners)) != len(cowners):
            raise ServiceError("conflicting delta: two configurations selected for one component")

        for d in fds:
            for other in idx.designs_of[idx.designs[d].owner]:
                if other != d and idx.designs[other].is_selected:
                    self.store.set_attribute(other, "is-selected", False)
            if not idx.designs[d].is_selected:
                self.store.set_attribute(d, "is-selected", True)
        changed_ccs = []
        for c in ccs:
            for other in idx.configurations_of[idx.configurations[c].owner]:
                if other != c and idx.configurations[other].is_selected:
                    self.store.set_attribute(other, "is-selected", False)
            if not idx.configurations[c].is_selected:
                self.store.set_attribute(c, "is-selected", True)
                changed_ccs.append(c)

        idx = self.index()
        goal = self.goal_components()
        activations = [c for c in idx.components if c in goal and c not in idx.active]
        deactivations = [c for c in idx.components if c in idx.active and c not in goal]
        pending = next((p for p in reversed(idx.plans) if p.result is None), None)
        adaptations = list(pending.parameter_adaptations) if pending else []
        # a re-selected configuration supersedes an earlier pending one for the same component
        for c in changed_ccs:
            owner = idx.configurations[c].owner
            adaptations = [a for a in adaptations if idx.configurations[a].owner != owner]
            adaptations.append(c)
        adaptations = [a for a in adaptations if idx.configurations[a].owner in goal]
        roles = {
            "component-activation": activations,
            "component-deactivation": deactivations,
            "parameter-adaptation": sorted(adaptations),
        }
        start = pending.start_time if pending else self.tick
        if pending is not None:
            self.store.delete(pending.id)
        empty = not (activations or deactivations or adaptations)
        attrs: dict[str, Any] = {"start-time": start}
        if empty and pending is None:
            attrs.update({"end-time": self.tick, "result": PLAN_COMPLETED})
        pid = self.store.insert(s.RECONFIGURATION_PLAN, attrs, roles)
        if pending is None and not empty:
            self._publish(RECONFIGURATION_PLAN)
        return pid

    def plan_record(self, plan_id: int) -> dict[str, Any]:
        idx = self.index()
        p = next(p for p in idx.plans if p.id == plan_id)
        return {
            "id": p.id,
            "activations": [idx.names[c] for c in p.activations],
            "deactivations": [idx.names[c] for c in p.deactivations],
            "parameter_adaptations": [idx.names[c] for c in p.parameter_adaptations],
            "adapted_components": [idx.names[idx.configurations[c].owner] for c in p.parameter_adaptations],
            "start_time": p.start_time,
            "end_time": p.end_time,
            "result": p.result,
        }

    def _plan_latest(self) -> dict[str, Any]:
        plans = self.index().plans
        return self.plan_record(plans[-1].id) if plans else {}

    def _plan_result_set(self, id: int, result: str) -> None:
        if result not in (PLAN_COMPLETED, PLAN_FAILED):
            raise ServiceError(f"unknown plan result {result!r}")
        if id not in {p.id for p in self.index().plans}:
            raise ServiceError(f"unknown reconfiguration plan {id}")
        self.store.set_attribute(id, "end-time", self.tick)
        self.store.set_attribute(id, "result", result)

    def _component_active_set(self, component: str, active: bool, pid: int | None = None) -> None:
        cid = self._id(s.COMPONENT, component)
        if active:
            if pid is None:
                raise ServiceError("an active component needs a pid")
            self.store.set_attribute(cid, "pid", pid)
            self.store.set_attribute(cid, "is-active", True)
        else:
            self.store.set_attribute(cid, "is-active", False)
            if self.store.get(cid).get("pid") is not None:
                self.store.delete_attribute(cid, "pid")
