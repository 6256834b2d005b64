"""End-to-end acceptance criteria; each test reports one PASS/FAIL line."""

from __future__ import annotations

import io
import itertools
import json
import time

from conftest import TABLE_SCENARIOS, cached_run
from oracles import naive_statuses, random_model
from test_inference import RULE_CASES
from update_golden import golden_path

from taca.cli import cmd_validate
from taca.events import EA_MEASUREMENT, QA_MEASUREMENT, Diagnostic
from taca.inference import StatusEngine
from taca.kb import KnowledgeBase
from taca.mapek import Engine
from taca.model import schema as s
from taca.model.counting import count_elements
from taca.model.hypothetical import generate_hypothetical, predicted_elements
from taca.model.scenario import load_scenario, serialize
from taca.ops import bundled_scenarios, bundled_text
from taca.service.client import LocalBackend
from taca.sim import ProcessTable, run_text


def rows(name, **kw):
    return [json.loads(line) for line in cached_run(name, **kw).trace_text().splitlines()]


def matches_golden(name, **kw) -> bool:
    return cached_run(name, **kw).trace_text() == golden_path(name).read_text()


def first_tick(trace, pred):
    return next((r["tick"] for r in trace if pred(r)), None)


def test_01_rule_suite(acceptance):
    start = time.perf_counter()
    failures = [k for k, (factory, element, expected) in RULE_CASES.items() if factory().status(element) != expected]
    elapsed = time.perf_counter() - start
    rules = {k.split("/")[0] for k in RULE_CASES}
    ok = (
        not failures
        and len(RULE_CASES) >= 20
        and len(rules) == 6
        and "component/configuration-error" in RULE_CASES
        and elapsed < 1.0
    )
    acceptance(1, "rule-suite exactness", ok, f"{len(RULE_CASES)} cases, {len(rules)} rules, {elapsed:.3f}s, failures={failures}")


def test_02_suave_visibility_thresholds(acceptance):
    _, store = load_scenario(bundled_text("suave"))
    kb = KnowledgeBase(store)
    engine = Engine(kb, ProcessTable(lambda: kb.tick))
    kb.call("action/request", {"action": "search_pipeline", "operation": "start"})
    engine.drain()
    high = next(c.id for c in kb.index().constraints if kb.name(c.constrained) == "High")
    picked, violated = [], []
    for tick, wv in enumerate([4.0, 3.25, 3.0, 1.0, 4.0], start=1):
        kb.tick = tick
        engine.ingest([Diagnostic("monitor", EA_MEASUREMENT, "water_visibility", str(wv), tick)])
        engine.drain()
        idx = kb.index()
        picked.append(next(c.name for c in idx.configurations.values() if c.is_selected))
        violated.append(kb.engine.status(high) == "violated")
    seq_ok = (
        picked[0] == "High"
        and picked[1] != "High"
        and picked[2] in ("Medium", "Low")
        and picked[3] == "Low"
        and picked[4] == "High"
    )
    flips_ok = violated == [wv <= 3.25 for wv in [4.0, 3.25, 3.0, 1.0, 4.0]]
    # boundary sweep: violated exactly when WV <= 3.25
    sweep = [3.0, 3.2, 3.249999, 3.25, 3.250001, 3.3, 5.0]
    for i, wv in enumerate(sweep, start=10):
        kb.tick = i
        kb.ingest(Diagnostic("monitor", EA_MEASUREMENT, "water_visibility", str(wv), i))
        flips_ok &= (kb.engine.status(high) == "violated") == (wv <= 3.25)
    acceptance(2, "SUAVE U2 thresholds", seq_ok and flips_ok, f"configs={picked}")


def test_03_suave_battery_co_adaptation(acceptance):
    _, store = load_scenario(bundled_text("suave_extended"))
    kb = KnowledgeBase(store)
    kb.ingest(Diagnostic("monitor", QA_MEASUREMENT, "battery_level", "0.24", 1))
    statuses = {a: kb.engine.status(store.find(s.ACTION, a).id) for a in ("search_pipeline", "inspect_pipeline")}
    sole = kb.call("action/selectable") == ["recharge"]
    trace = rows("suave_extended")
    drop = first_tick(trace, lambda r: any(d[1] == "battery_level" and float(d[2]) < 0.25 for d in r["diagnostics"]))
    opened = first_tick(trace, lambda r: "recharge" in r["opened"])
    planned = first_tick(
        trace,
        lambda r: r["tick"] >= drop and any("recharge_node" in p["activations"] and p["result"] == "completed" for p in r["plans"]),
    )
    ok = (
        set(statuses.values()) == {"unfeasible"}
        and sole
        and drop is not None
        and opened is not None
        and planned is not None
        and opened - drop <= 2
        and planned - drop <= 2
        and matches_golden("suave_extended")
    )
    acceptance(3, "SUAVE U3 co-adaptation", ok, f"drop tick {drop}, recharge opened {opened}, plan {planned}, golden match")


def test_04_suave_thruster_round_trip(acceptance):
    trace = rows("suave")
    fail = first_tick(trace, lambda r: ["Component status", "thruster_1", "failure"] in r["diagnostics"])
    ok_tick = first_tick(trace, lambda r: ["Component status", "thruster_1", "ok"] in r["diagnostics"])
    designs = {r["tick"]: r["selected"]["designs"] for r in trace}
    ok = (
        "maintain" in designs[fail - 1]
        and "recover" in designs[fail]
        and "maintain" not in designs[fail]
        and "maintain" in designs[ok_tick]
        and "recover" not in designs[ok_tick]
        and matches_golden("suave")
    )
    acceptance(4, "SUAVE U1 round trip", ok, f"failure at {fail}, recovery at {ok_tick}, golden match")


def test_05_element_counts(acceptance):
    expected = {"suave": (18, 12, 30), "suave_extended": (22, 16, 38), "agv": (18, 36, 54), "uav": (24, 16, 40)}
    got = {}
    for name in TABLE_SCENARIOS:
        out = io.StringIO()
        code = cmd_validate(LocalBackend(), name, out)
        words = out.getvalue().split()
        got[name] = (int(words[0]), int(words[2]), int(words[4])) if code == 0 else None
    acceptance(5, "element counts", got == expected, str(got))


def test_06_growth_formula(acceptance):
    start = time.perf_counter()
    bad = []
    for n_actions, n_sa, n_pa in itertools.product(range(1, 4), range(6), range(6)):
        _, store = load_scenario(serialize(generate_hypothetical(n_actions, [(n_sa, n_pa)] * n_actions)))
        per_action = count_elements(store).total / n_actions
        if per_action != 10 + 6 * n_sa + 3 * n_pa or per_action != predicted_elements(n_sa, n_pa):
            bad.append((n_actions, n_sa, n_pa, per_action))
    elapsed = time.perf_counter() - start
    acceptance(6, "growth formula", not bad and elapsed < 5.0, f"108 combinations, {elapsed:.2f}s, mismatches={bad}")


def test_07_agv_route(acceptance):
    nominal = cached_run("agv").metrics.route
    failed = cached_run("agv_kinect_failure")
    trace = rows("agv_kinect_failure")
    dropped = any("kinect" in p["deactivations"] for r in trace for p in r["plans"])
    last_active = trace[-1]["active"]
    ok = (
        nominal == ["C1"]
        and failed.metrics.route == ["C4", "C3", "C2"]
        and dropped
        and "kinect" not in last_active
        and matches_golden("agv")
        and matches_golden("agv_kinect_failure")
    )
    acceptance(7, "AGV co-adaptation", ok, f"nominal {nominal}, with failure {failed.metrics.route}, active at end {last_active}")


def test_08_uav_scenarios(acceptance):
    low = cached_run("uav_low_battery").metrics.actions
    a3 = cached_run("uav_battery_for_a3").metrics.actions
    grip = rows("uav_gripper_failure")
    opened = [(r["tick"], a) for r in grip for a in r["opened"]]
    closed = [(r["tick"], a) for r in grip for a, _ in r["closed"]]
    a5_close = max((t for t, a in closed if a == "land_fold_gripper"), default=None)
    a3_open = min((t for t, a in opened if a == "analyze_on_site"), default=None)
    order = [a for _, a in opened]
    ok = (
        low == ["return_recharge"]
        and "analyze_on_site" in a3
        and "pickup_analyze" not in a3
        and order == ["search_samples", "pickup_analyze", "land_fold_gripper", "analyze_on_site"]
        and a5_close is not None
        and a3_open is not None
        and a3_open >= a5_close
        and all(matches_golden(n) for n in ("uav_low_battery", "uav_battery_for_a3", "uav_gripper_failure"))
    )
    acceptance(8, "UAV scenarios", ok, f"1: {low}; 2: {a3}; 3: {order}, A5 closed {a5_close}, A3 opened {a3_open}")


def test_09_statelessness(acceptance):
    ok = all(matches_golden(n, rebuild=True) for n in ("suave_extended", "suave"))
    acceptance(9, "planner/executor rebuilt per event", ok, "golden traces unchanged")


def test_10_oracle_equivalence(acceptance):
    start = time.perf_counter()
    mismatched = [seed for seed in range(200) if StatusEngine(m := random_model(seed)).snapshot().statuses != naive_statuses(m)]
    elapsed = time.perf_counter() - start
    acceptance(10, "stratified == naive fixpoint", not mismatched and elapsed < 10.0, f"200 models, {elapsed:.2f}s, mismatches={mismatched}")


def test_11_determinism(acceptance):
    names = ("suave", "suave_extended", "agv", "agv_kinect_failure", "uav_low_battery", "uav_battery_for_a3", "uav_gripper_failure")
    same = [run_text(bundled_text(n), seed=7).trace_text() == run_text(bundled_text(n), seed=7).trace_text() for n in names]
    acceptance(11, "byte-identical reruns", all(same), f"{sum(same)}/{len(names)} identical")


def test_12_reaction_bound(acceptance):
    reactions = {}
    for name in bundled_scenarios():
        for label, value in cached_run(name).metrics.reaction_ticks.items():
            reactions[f"{name}.{label}"] = value
    ok = bool(reactions) and all(v is not None and v <= 2 for v in reactions.values())
    acceptance(12, "reaction within 2 ticks", ok, ", ".join(f"{k}={v}" for k, v in sorted(reactions.items())))
