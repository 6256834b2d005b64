"""Minimal synthetic models used to study how modeling effort grows.

Each action gets the smallest model that still supports adaptation: one
function with one design over one component, one configuration with one
parameter, its own quality attribute, and a constraint on every design and
configuration. Every extra structural adaptation adds an alternative design
backed by a fresh component; every extra parameter adaptation adds an
alternative configuration of the base component.
"""

from __future__ import annotations

from typing import Sequence

from .scenario import Decl, ScenarioDocument

BASE_ELEMENTS = 10
PER_STRUCTURAL = 6
PER_PARAMETER = 3


def predicted_elements(n_sa: int, n_pa: int) -> int:
    return BASE_ELEMENTS + PER_STRUCTURAL * n_sa + PER_PARAMETER * n_pa


def generate_hypothetical(n_actions: int, adaptations: Sequence[tuple[int, int]]) -> ScenarioDocument:
    """Build a document with ``n_actions`` blocks; ``adaptations[i]`` is (n_sa, n_pa) for action i."""
    if n_actions < 1:
        raise ValueError("n_actions must be >= 1")
    if len(adaptations) != n_actions:
        raise ValueError("need one (n_sa, n_pa) pair per action")
    doc = ScenarioDocument()
    m = doc.model
    for i, (n_sa, n_pa) in enumerate(adaptations, start=1):
        if n_sa < 0 or n_pa < 0:
            raise ValueError("adaptation counts must be >= 0")
        a, f, qa = f"a{i}", f"f{i}", f"qa{i}"
        m += [
            Decl("action", a),
            Decl("function", f, attrs={"always-improve": False}),
            Decl("quality-attribute", qa),
            Decl("requires", a, refs=[f]),
        ]

        def block(comp: str, design: str, prio: int) -> None:
            cfg, param = f"{comp}_cfg0", f"{comp}_p0"
            m.extend(
                [
                    Decl("component", comp, attrs={"always-improve": False, "lifecycle-managed": False}),
                    Decl("parameter", param, attrs={"key": "level", "value": "0"}),
                    Decl("design", design, refs=[f, comp], attrs={"priority": prio}),
                    Decl("configuration", cfg, refs=[comp, param], attrs={"priority": 1}),
                    Decl("constraint", "", refs=[qa, design], attrs={"operator": ">=", "value": float(prio)}),
                    Decl("constraint", "", refs=[qa, cfg], attrs={"operator": ">=", "value": 0.0}),
                ]
            )

        base = f"c{i}_0"
        block(base, f"fd{i}_0", 1)
        for j in range(1, n_sa + 1):
            block(f"c{i}_{j}", f"fd{i}_{j}", j + 1)
        for k in range(1, n_pa + 1):
            cfg, param = f"{base}_cfg{k}", f"{base}_p{k}"
            m += [
                Decl("parameter", param, attrs={"key": "level", "value": str(k)}),
                Decl("configuration", cfg, refs=[base, param], attrs={"priority": k + 1}),
                Decl("constraint", "", refs=[qa, cfg], attrs={"operator": ">=", "value": float(k)}),
            ]
    return doc
