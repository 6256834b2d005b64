"""Status inference over the knowledge model.

Statuses are computed by stratified evaluation, one stratum per element kind
in dependency order, and memoized per store epoch. The rule set is fixed:

* constraint: violated iff the latest measurement of its measure fails the
  predicate; satisfied when no measurement exists yet
* component configuration: unfeasible iff one of its constraints is violated
* component: failure > unfeasible > configuration error > unsolved > feasible
* function design: unfeasible iff one of its constraints is violated or a
  required component is in failure or unfeasible
* function: unfeasible when every design is unfeasible; otherwise, for
  required functions, configuration error / unsolved / solved
* action: unfeasible iff one of its constraints is violated or a required
  function is unfeasible
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from .model.views import ConstraintView, ModelIndex
from .store import Store

SATISFIED = "satisfied"
VIOLATED = "violated"
FEASIBLE = "feasible"
UNFEASIBLE = "unfeasible"
FAILURE = "failure"
CONFIGURATION_ERROR = "configuration error"
UNSOLVED = "unsolved"
SOLVED = "solved"

STRATA = ("constraint", "configuration/component", "design", "function", "action")

EQ_TOLERANCE = 1e-9


def compare(operator: str, measured: float, threshold: float) -> bool:
    if operator == ">":
        return measured > threshold
    if operator == ">=":
        return measured >= threshold
    if operator == "<":
        return measured < threshold
    if operator == "<=":
        return measured <= threshold
    if operator == "==":
        return math.isclose(measured, threshold, rel_tol=0.0, abs_tol=EQ_TOLERANCE)
    raise ValueError(f"unknown operator {operator!r}")


@dataclass
class StatusSnapshot:
    epoch: int
    statuses: dict[int, str] = field(default_factory=dict)
    required: dict[int, bool] = field(default_factory=dict)

    def __getitem__(self, iid: int) -> str:
        return self.statuses[iid]


# -- required-ness -----------------------------------------------------------


def required_elements(idx: ModelIndex) -> tuple[set[int], set[int], set[int]]:
    """Actions with an open request, the functions they need, and the
    components of the selected designs of those functions."""
    actions = {r.action for r in idx.open_required_actions()}
    functions = {f for a in actions for f in idx.requirements.get(a, [])}
    components: set[int] = set()
    for f in functions:
        d = idx.selected_design(f)
        if d is not None:
            components.update(idx.designs[d].members)
    return actions, functions, components


# -- rules -------------------------------------------------------------------


def constraint_status(c: ConstraintView, idx: ModelIndex) -> str:
    latest = idx.latest_measurement.get(c.measure)
    if latest is None:
        return SATISFIED
    return SATISFIED if compare(c.operator, latest[1], c.value) else VIOLATED


def _violated(iid: int, idx: ModelIndex, cstat: dict[int, str]) -> bool:
    return any(cstat[c.id] == VIOLATED for c in idx.constraints_on.get(iid, []))


def component_configuration_status(cc: int, idx: ModelIndex, cstat: dict[int, str]) -> str:
    return UNFEASIBLE if _violated(cc, idx, cstat) else FEASIBLE


def component_status(
    comp: int,
    idx: ModelIndex,
    cstat: dict[int, str],
    ccstat: dict[int, str],
    required: bool,
) -> str:
    if comp in idx.failed:
        return FAILURE
    if _violated(comp, idx, cstat):
        return UNFEASIBLE
    configs = idx.configurations_of.get(comp, [])
    if required and configs:
        selected = idx.selected_configuration(comp)
        if selected is not None and ccstat[selected] == UNFEASIBLE:
            return CONFIGURATION_ERROR
        if selected is None:
            return UNSOLVED
    return FEASIBLE


def function_design_status(fd: int, idx: ModelIndex, cstat: dict[int, str], compstat: dict[int, str]) -> str:
    if _violated(fd, idx, cstat):
        return UNFEASIBLE
    if any(compstat[m] in (FAILURE, UNFEASIBLE) for m in idx.designs[fd].members):
        return UNFEASIBLE
    return FEASIBLE


def function_status(f: int, idx: ModelIndex, fdstat: dict[int, str], required: bool) -> str:
    designs = idx.designs_of.get(f, [])
    if designs and all(fdstat[d] == UNFEASIBLE for d in designs):
        return UNFEASIBLE
    if not required:
        return SOLVED
    if not designs:
        return UNFEASIBLE
    selected = idx.selected_design(f)
    if selected is not None and fdstat[selected] == UNFEASIBLE:
        return CONFIGURATION_ERROR
    if selected is None:
        return UNSOLVED
    return SOLVED


def action_status(a: int, idx: ModelIndex, cstat: dict[int, str], fstat: dict[int, str]) -> str:
    if _violated(a, idx, cstat):
        return UNFEASIBLE
    if any(fstat[f] == UNFEASIBLE for f in idx.requirements.get(a, [])):
        return UNFEASIBLE
    return FEASIBLE


def evaluate(idx: ModelIndex) -> StatusSnapshot:
    """Evaluate every status rule, stratum by stratum."""
    req_actions, req_functions, req_components = required_elements(idx)

    cstat = {c.id: constraint_status(c, idx) for c in idx.constraints}
    ccstat = {cc: component_configuration_status(cc, idx, cstat) for cc in idx.configurations}
    compstat = {
        comp: component_status(comp, idx, cstat, ccstat, comp in req_components) for comp in idx.components
    }
    fdstat = {fd: function_design_status(fd, idx, cstat, compstat) for fd in idx.designs}
    fstat = {f: function_status(f, idx, fdstat, f in req_functions) for f in idx.functions}
    astat = {a: action_status(a, idx, cstat, fstat) for a in idx.actions}

    snap = StatusSnapshot(idx.epoch)
    for part in (cstat, ccstat, compstat, fdstat, fstat, astat):
        snap.statuses.update(part)
    for a in idx.actions:
        snap.required[a] = a in req_actions
    for f in idx.functions:
        snap.required[f] = f in req_functions
    for c in idx.components:
        snap.required[c] = c in req_components
    return snap


# -- engine ------------------------------------------------------------------


class StatusEngine:
    """Epoch-memoized status inference attached to a store as a derived view."""

    def __init__(self, store: Store):
        self.store = store
        self._memo: tuple[ModelIndex, StatusSnapshot] | None = None
        store.attach_view(self)

    def _current(self) -> tuple[ModelIndex, StatusSnapshot]:
        if self._memo is None or self._memo[0].epoch != self.store.epoch:
            idx = ModelIndex.build(self.store)
            self._memo = (idx, evaluate(idx))
        return self._memo

    def index(self) -> ModelIndex:
        return self._current()[0]

    def snapshot(self) -> StatusSnapshot:
        return self._current()[1]

    def derived_attributes(self, store: Store) -> dict[int, dict[str, Any]]:
        snap = self.snapshot()
        out: dict[int, dict[str, Any]] = {iid: {"status": st} for iid, st in snap.statuses.items()}
        for iid, req in snap.required.items():
            out[iid]["is-required"] = req
        return out

    def status(self, iid: int) -> str:
        return self.snapshot().statuses[iid]

    # -- derived sets, ordered by instance id unless stated otherwise

    def selectable_actions(self) -> list[int]:
        idx, snap = self._current()
        return [a for a in idx.actions if snap.statuses[a] != UNFEASIBLE]

    def adaptable_functions(self) -> list[int]:
        idx, snap = self._current()
        return [
            f
            for f in idx.functions
            if snap.required[f]
            and (snap.statuses[f] in (UNSOLVED, CONFIGURATION_ERROR) or f in idx.always_improve)
        ]

    def adaptable_components(self) -> list[int]:
        idx, snap = self._current()
        return [
            c
            for c in idx.components
            if snap.required[c]
            and idx.configurations_of.get(c)
            and (snap.statuses[c] in (UNSOLVED, CONFIGURATION_ERROR) or c in idx.always_improve)
        ]

    def selectable_function_designs(self, function: int) -> list[int]:
        """Feasible designs of ``function`` sorted by (priority, name)."""
        idx, snap = self._current()
        ds = [d for d in idx.designs_of.get(function, []) if snap.statuses[d] == FEASIBLE]
        return sorted(ds, key=lambda d: (idx.designs[d].priority, idx.designs[d].name))

    def selectable_component_configurations(self, component: int) -> list[int]:
        idx, snap = self._current()
        cs = [c for c in idx.configurations_of.get(component, []) if snap.statuses[c] == FEASIBLE]
        return sorted(cs, key=lambda c: (idx.configurations[c].priority, idx.configurations[c].name))
