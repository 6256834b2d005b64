"""Typed projections over a populated store.

A :class:`ModelIndex` is rebuilt per store epoch and only reads stored facts,
never rule-inferred ones, so the inference layer can use it without recursion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..store import Instance, Store
from . import schema as s


@dataclass
class ConstraintView:
    id: int
    measure: int
    constrained: int
    operator: str
    value: float


@dataclass
class EstimationView:
    id: int
    measure: int
    estimated: int
    value: float
    type: str


@dataclass
class DesignView:
    """A function design or a component configuration."""

    id: int
    name: str
    owner: int
    members: list[int]
    priority: int
    is_selected: bool


@dataclass
class RequiredActionView:
    id: int
    action: int
    preferred_measure: int | None
    start_time: int | None
    end_time: int | None
    result: str | None

    @property
    def is_open(self) -> bool:
        return self.end_time is None


@dataclass
class PlanView:
    id: int
    activations: list[int]
    deactivations: list[int]
    parameter_adaptations: list[int]
    start_time: int | None
    end_time: int | None
    result: str | None


def _one(inst: Instance, role: str) -> int:
    return inst.roles[role][0]


@dataclass
class ModelIndex:
    epoch: int
    names: dict[int, str] = field(default_factory=dict)
    actions: list[int] = field(default_factory=list)
    functions: list[int] = field(default_factory=list)
    components: list[int] = field(default_factory=list)
    measures: list[int] = field(default_factory=list)
    always_improve: set[int] = field(default_factory=set)
    failed: set[int] = field(default_factory=set)
    active: set[int] = field(default_factory=set)
    requirements: dict[int, list[int]] = field(default_factory=dict)
    designs: dict[int, DesignView] = field(default_factory=dict)
    designs_of: dict[int, list[int]] = field(default_factory=dict)
    configurations: dict[int, DesignView] = field(default_factory=dict)
    configurations_of: dict[int, list[int]] = field(default_factory=dict)
    constraints: list[ConstraintView] = field(default_factory=list)
    constraints_on: dict[int, list[ConstraintView]] = field(default_factory=dict)
    estimations_on: dict[int, list[EstimationView]] = field(default_factory=dict)
    latest_measurement: dict[int, tuple[int, float]] = field(default_factory=dict)
    required_actions: list[RequiredActionView] = field(default_factory=list)
    plans: list[PlanView] = field(default_factory=list)

    @classmethod
    def build(cls, store: Store) -> "ModelIndex":
        idx = cls(epoch=store.epoch)
        for inst in store.instances(s.ACTION):
            idx.actions.append(inst.id)
            idx.names[inst.id] = inst.get("name")
        for inst in store.instances(s.FUNCTION):
            idx.functions.append(inst.id)
            idx.names[inst.id] = inst.get("name")
            idx.designs_of[inst.id] = []
            if inst.get("always-improve", False):
                idx.always_improve.add(inst.id)
        for inst in store.instances(s.COMPONENT):
            idx.components.append(inst.id)
            idx.names[inst.id] = inst.get("name")
            idx.configurations_of[inst.id] = []
            if inst.get("always-improve", False):
                idx.always_improve.add(inst.id)
            if inst.get("status") == "failure":
                idx.failed.add(inst.id)
            if inst.get("is-active", False):
                idx.active.add(inst.id)
        for inst in store.instances(s.MEASURE):
            idx.measures.append(inst.id)
            idx.names[inst.id] = inst.get("name")
        for inst in store.instances(s.FUNCTIONAL_REQUIREMENT):
            for a in inst.roles.get("action", []):
                idx.requirements.setdefault(a, []).extend(inst.roles.get("required-function", []))
        for inst in store.instances(s.FUNCTION_DESIGN):
            d = DesignView(
                inst.id,
                inst.get("name"),
                _one(inst, "function"),
                list(inst.roles.get("required-component", [])),
                inst.get("priority", 0),
                bool(inst.get("is-selected", False)),
            )
            idx.names[inst.id] = d.name
            idx.designs[inst.id] = d
            idx.designs_of.setdefault(d.owner, []).append(inst.id)
        for inst in store.instances(s.COMPONENT_CONFIGURATION):
            d = DesignView(
                inst.id,
                inst.get("name"),
                _one(inst, "component"),
                list(inst.roles.get("parameter", [])),
                inst.get("priority", 0),
                bool(inst.get("is-selected", False)),
            )
            idx.names[inst.id] = d.name
            idx.configurations[inst.id] = d
            idx.configurations_of.setdefault(d.owner, []).append(inst.id)
        for inst in store.instances(s.CONSTRAINT):
            c = ConstraintView(
                inst.id,
                _one(inst, "measure"),
                _one(inst, "constrained"),
                inst.get("operator"),
                inst.get("value"),
            )
            idx.constraints.append(c)
            idx.constraints_on.setdefault(c.constrained, []).append(c)
        for inst in store.instances(s.ESTIMATION):
            e = EstimationView(
                inst.id,
                _one(inst, "measure"),
                _one(inst, "estimated"),
                inst.get("value"),
                inst.get("type"),
            )
            idx.estimations_on.setdefault(e.estimated, []).append(e)
        for inst in store.instances(s.MEASUREMENT):
            m = _one(inst, "measure")
            stamp = (inst.get("time", 0), inst.id)
            prev = idx.latest_measurement.get(m)
            # latest by (time, write order)
            if prev is None or stamp >= prev[0]:
                idx.latest_measurement[m] = (stamp, inst.get("value"))
        idx.latest_measurement = {m: (v[0][0], v[1]) for m, v in idx.latest_measurement.items()}
        for inst in store.instances(s.REQUIRED_ACTION):
            pm = inst.roles.get("preferred-measure")
            idx.required_actions.append(
                RequiredActionView(
                    inst.id,
                    _one(inst, "action"),
                    pm[0] if pm else None,
                    inst.get("start-time"),
                    inst.get("end-time"),
                    inst.get("result"),
                )
            )
        for inst in store.instances(s.RECONFIGURATION_PLAN):
            idx.plans.append(
                PlanView(
                    inst.id,
                    list(inst.roles.get("component-activation", [])),
                    list(inst.roles.get("component-deactivation", [])),
                    list(inst.roles.get("parameter-adaptation", [])),
                    inst.get("start-time"),
                    inst.get("end-time"),
                    inst.get("result"),
                )
            )
        return idx

    def open_required_actions(self) -> list[RequiredActionView]:
        return [r for r in self.required_actions if r.is_open]

    def selected_design(self, function: int) -> int | None:
        for d in self.designs_of.get(function, []):
            if self.designs[d].is_selected:
                return d
        return None

    def selected_configuration(self, component: int) -> int | None:
        for c in self.configurations_of.get(component, []):
            if self.configurations[c].is_selected:
                return c
        return None
