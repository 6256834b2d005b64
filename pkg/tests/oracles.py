"""Independent reference implementations used as test oracles.

Nothing here imports the inference module or the model index: statuses are
recomputed straight from raw store instances by naive repeated rule
application, and pattern matches by brute-force enumeration.
"""

from __future__ import annotations

import itertools
import random
from typing import Any

from taca.model import schema as s
from taca.store import Clause, Pattern, Store, Var

OPS = {
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "==": lambda a, b: abs(a - b) <= 1e-9,
}


def _stored(inst, attr, default=None):
    vals = inst.attributes.get(attr)
    return vals[-1] if vals else default


def naive_statuses(store: Store) -> dict[int, str]:
    """Apply every rule to every element, in reverse id order, until nothing changes."""
    insts = {i.id: i for i in store.instances()}

    def of(t):
        return [i for i in insts.values() if store.schema.is_a(i.type_name, t)]

    latest: dict[int, tuple[tuple[int, int], float]] = {}
    for m in of(s.MEASUREMENT):
        key = (_stored(m, "time", 0), m.id)
        mid = m.roles["measure"][0]
        if mid not in latest or key > latest[mid][0]:
            latest[mid] = (key, _stored(m, "value"))

    constraints = of(s.CONSTRAINT)
    ras = [r for r in of(s.REQUIRED_ACTION) if _stored(r, "end-time") is None]
    frs = of(s.FUNCTIONAL_REQUIREMENT)
    fds = of(s.FUNCTION_DESIGN)
    ccs = of(s.COMPONENT_CONFIGURATION)

    status: dict[int, str] = {}
    required: dict[int, bool] = {}

    def violated(iid):
        return any(status.get(c.id) == "violated" for c in constraints if c.roles["constrained"][0] == iid)

    elements = sorted(insts, reverse=True)
    changed = True
    rounds = 0
    while changed:
        rounds += 1
        assert rounds < 50, "naive evaluation failed to converge"
        changed = False
        new_req: dict[int, bool] = {}
        for a in of(s.ACTION):
            new_req[a.id] = any(r.roles["action"][0] == a.id for r in ras)
        for f in of(s.FUNCTION):
            new_req[f.id] = any(
                required.get(fr.roles["action"][0], False) and f.id in fr.roles["required-function"] for fr in frs
            )
        for c in of(s.COMPONENT):
            new_req[c.id] = any(
                _stored(d, "is-selected", False)
                and required.get(d.roles["function"][0], False)
                and c.id in d.roles["required-component"]
                for d in fds
            )
        if new_req != required:
            required = new_req
            changed = True
        for iid in elements:
            inst = insts[iid]
            t = inst.type_name
            if t == s.CONSTRAINT:
                m = latest.get(inst.roles["measure"][0])
                ok = m is None or OPS[_stored(inst, "operator")](m[1], _stored(inst, "value"))
                new = "satisfied" if ok else "violated"
            elif t == s.COMPONENT_CONFIGURATION:
                new = "unfeasible" if violated(iid) else "feasible"
            elif t == s.COMPONENT:
                mine = [c for c in ccs if c.roles["component"][0] == iid]
                sel = [c for c in mine if _stored(c, "is-selected", False)]
                if _stored(inst, "status") == "failure":
                    new = "failure"
                elif violated(iid):
                    new = "unfeasible"
                elif required.get(iid) and mine and sel and status.get(sel[0].id) == "unfeasible":
                    new = "configuration error"
                elif required.get(iid) and mine and not sel:
                    new = "unsolved"
                else:
                    new = "feasible"
            elif t == s.FUNCTION_DESIGN:
                bad = violated(iid) or any(
                    status.get(c) in ("failure", "unfeasible") for c in inst.roles["required-component"]
                )
                new = "unfeasible" if bad else "feasible"
            elif t == s.FUNCTION:
                mine = [d for d in fds if d.roles["function"][0] == iid]
                sel = [d for d in mine if _stored(d, "is-selected", False)]
                if mine and all(status.get(d.id) == "unfeasible" for d in mine):
                    new = "unfeasible"
                elif not required.get(iid):
                    new = "solved"
                elif not mine:
                    new = "unfeasible"
                elif sel and status.get(sel[0].id) == "unfeasible":
                    new = "configuration error"
                elif not sel:
                    new = "unsolved"
                else:
                    new = "solved"
            elif t == s.ACTION:
                funcs = [f for fr in frs if fr.roles["action"][0] == iid for f in fr.roles["required-function"]]
                bad = violated(iid) or any(status.get(f) == "unfeasible" for f in funcs)
                new = "unfeasible" if bad else "feasible"
            else:
                continue
            if status.get(iid) != new:
                status[iid] = new
                changed = True
    return status


def random_model(seed: int) -> Store:
    """A small random model with runtime facts: requests, selections, failures, measurements."""
    rng = random.Random(seed)
    st = s.new_store()
    measures = [st.insert(s.QUALITY_ATTRIBUTE, {"name": f"m{i}"}) for i in range(rng.randint(1, 3))]
    actions = [st.insert(s.ACTION, {"name": f"a{i}"}) for i in range(rng.randint(1, 4))]
    functions = [st.insert(s.FUNCTION, {"name": f"f{i}"}) for i in range(rng.randint(1, 4))]
    comps = [
        st.insert(s.COMPONENT, {"name": f"c{i}", "always-improve": rng.random() < 0.2})
        for i in range(rng.randint(1, 5))
    ]
    params = [st.insert(s.PARAMETER, {"key": "k", "value": str(i)}) for i in range(3)]
    for a in actions:
        fs = rng.sample(functions, rng.randint(1, len(functions)))
        st.insert(s.FUNCTIONAL_REQUIREMENT, {}, {"action": [a], "required-function": fs})
    designs = []
    for f in functions:
        n = rng.randint(0 if rng.random() < 0.1 else 1, 3)
        sel = rng.randrange(n + 1) if n else None
        for j in range(n):
            members = rng.sample(comps, rng.randint(1, min(2, len(comps))))
            designs.append(
                st.insert(
                    s.FUNCTION_DESIGN,
                    {"name": f"fd_{f}_{j}", "priority": rng.randint(1, 3), "is-selected": sel == j},
                    {"function": [f], "required-component": members},
                )
            )
    configs = []
    for c in comps:
        n = rng.randint(0, 3)
        sel = rng.randrange(n + 1) if n else None
        for j in range(n):
            configs.append(
                st.insert(
                    s.COMPONENT_CONFIGURATION,
                    {"name": f"cc_{c}_{j}", "priority": j + 1, "is-selected": sel == j},
                    {"component": [c], "parameter": [rng.choice(params)]},
                )
            )
    targets = actions + comps + designs + configs
    for _ in range(rng.randint(0, 6)):
        st.insert(
            s.CONSTRAINT,
            {"operator": rng.choice(list(OPS)), "value": rng.choice([0.25, 0.5, 0.75])},
            {"measure": [rng.choice(measures)], "constrained": [rng.choice(targets)]},
        )
    for t in range(rng.randint(0, 4)):
        st.insert(
            s.MEASUREMENT,
            {"value": rng.choice([0.0, 0.25, 0.4, 0.5, 0.6, 0.75, 1.0]), "time": t},
            {"measure": [rng.choice(measures)]},
        )
    for a in actions:
        if rng.random() < 0.6:
            attrs = {"start-time": 0}
            if rng.random() < 0.2:
                attrs["end-time"] = 1
            st.insert(s.REQUIRED_ACTION, attrs, {"action": [a]})
    for c in comps:
        if rng.random() < 0.15:
            st.set_attribute(c, "status", "failure")
    return st


# -- brute-force pattern matching --------------------------------------------


def _clause_ok(store: Store, c: Clause, b: dict[str, Any]) -> list[dict[str, Any]]:
    """Extensions of ``b`` (over attribute variables) under which clause ``c`` holds."""
    iid = b[c.var]
    inst = store.get(iid)
    if c.type is not None and not store.schema.is_a(inst.type_name, c.type):
        return []
    if any(store.values(iid, a) for a in c.lacks):
        return []
    for role, v in c.role_vars():
        if b[v] not in inst.roles.get(role, []):
            return []
    outs = [dict(b)]
    for attr, pred in c.has.items():
        vals = store.values(iid, attr)
        nxt = []
        for o in outs:
            if isinstance(pred, Var):
                for v in vals:
                    if pred.name in o and o[pred.name] != v:
                        continue
                    nxt.append({**o, pred.name: v})
            elif callable(pred):
                if any(pred(v) for v in vals):
                    nxt.append(o)
            elif pred in vals:
                nxt.append(o)
        outs = nxt
    return outs


def _solutions(store: Store, clauses: list[Clause], base: dict[str, Any]) -> list[dict[str, Any]]:
    inst_vars = []
    for c in clauses:
        for v in [c.var, *(v for _, v in c.role_vars())]:
            if v not in base and v not in inst_vars:
                inst_vars.append(v)
    out = []
    ids = store.ids()
    for combo in itertools.product(ids, repeat=len(inst_vars)):
        partial = [{**base, **dict(zip(inst_vars, combo))}]
        for c in clauses:
            partial = [e for p in partial for e in _clause_ok(store, c, p)]
        out.extend(partial)
    return out


def brute_force_match(store: Store, pattern: Pattern) -> list[dict[str, Any]]:
    results = []
    for b in _solutions(store, pattern.clauses, {}):
        if any(_solutions(store, block, b) for block in pattern.negations):
            continue
        if b not in results:
            results.append(b)
    return results
