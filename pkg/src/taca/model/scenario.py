"""Scenario files: parse, validate, load into a store, and serialize.

A scenario file is line oriented. The first non-blank line is the version
header ``rosa-scenario v1``; ``#`` starts a comment. Four sections follow,
each opened by an unindented keyword and holding indented lines::

    model
      action <name>
      function <name> [always-improve]
      component <name> [always-improve] [lifecycle] [package=<p>] [executable=<e>]
      parameter <label> <key> <value>
      measure <name>
      quality-attribute <name>
      environmental-attribute <name>
      requires <action> : <function>...
      design <name> for <function> : <component>... [priority=<n>]
      configuration <name> for <component> : <parameter-label>... [priority=<n>]
      constraint <measure> <op> <value> on <element>
      estimation <measure> <value> <maximize|minimize> on <element>
    timeline
      <tick> measure <measure> <value> [label=<label>]
      <tick> fail|recover|refuse-start <component> [label=<label>]
    plant
      <key> = <value>
    mission
      sequence | fallback              (composite, children indented below)
      feasible <action>
      action <action> <behavior> [prefer=<measure>]
      leaf <behavior>

Element names share one namespace across the model. Parameter labels are
local to the file and are not stored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Iterable

from ..store import Store
from . import schema as s

HEADER = "rosa-scenario v1"
SECTIONS = ("model", "timeline", "plant", "mission")
MEASURE_KINDS = {
    "measure": s.MEASURE,
    "quality-attribute": s.QUALITY_ATTRIBUTE,
    "environmental-attribute": s.ENVIRONMENTAL_ATTRIBUTE,
}
EVENT_KINDS = ("measure", "fail", "recover", "refuse-start")
COMPOSITES = ("sequence", "fallback")


class ScenarioError(Exception):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(f"{where}{message}")


# -- document model ----------------------------------------------------------


@dataclass
class Decl:
    """One model declaration.

    ``kind`` is the declaration keyword; ``refs`` lists referenced element
    names (or parameter labels) in grammar order.
    """

    kind: str
    name: str
    refs: list[str] = field(default_factory=list)
    attrs: dict[str, Any] = field(default_factory=dict)
    line: int = 0


@dataclass
class TimelineEvent:
    tick: int
    kind: str
    target: str
    value: float | None = None
    label: str | None = None
    line: int = 0


@dataclass
class MissionNode:
    kind: str
    args: list[str] = field(default_factory=list)
    options: dict[str, str] = field(default_factory=dict)
    children: list["MissionNode"] = field(default_factory=list)
    line: int = 0

    def walk(self) -> Iterable["MissionNode"]:
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass
class ScenarioDocument:
    model: list[Decl] = field(default_factory=list)
    timeline: list[TimelineEvent] = field(default_factory=list)
    plant: dict[str, Any] = field(default_factory=dict)
    mission: MissionNode | None = None

    def decls(self, *kinds: str) -> list[Decl]:
        return [d for d in self.model if d.kind in kinds]


# -- tokenizing --------------------------------------------------------------

_TOKEN = re.compile(r"\S+")
_OPTION = re.compile(r"^[A-Za-z_][\w-]*=")


def _tokens(text: str, lineno: int) -> list[tuple[str, int]]:
    out = []
    for m in _TOKEN.finditer(text):
        tok, col = m.group(), m.start() + 1
        # split a trailing or leading ':' off a name so "a: b" and "a : b" agree
        if tok != ":" and tok.endswith(":"):
            out.append((tok[:-1], col))
            out.append((":", col + len(tok) - 1))
        else:
            out.append((tok, col))
    return out


def _number(tok: str, line: int, col: int, what: str = "number") -> float:
    try:
        return float(tok)
    except ValueError:
        raise ScenarioError(f"expected {what}, got {tok!r}", line, col) from None


def _integer(tok: str, line: int, col: int, what: str = "integer") -> int:
    try:
        return int(tok)
    except ValueError:
        raise ScenarioError(f"expected {what}, got {tok!r}", line, col) from None


def _split_options(toks: list[tuple[str, int]]) -> tuple[list[tuple[str, int]], dict[str, tuple[str, int]]]:
    plain, opts = [], {}
    for tok, col in toks:
        if _OPTION.match(tok):
            k, v = tok.split("=", 1)
            opts[k] = (v, col)
        else:
            plain.append((tok, col))
    return plain, opts


# -- parsing -----------------------------------------------------------------


def parse_scenario(text: str) -> ScenarioDocument:
    """Parse and cross-check scenario text; raises :class:`ScenarioError`."""
    doc = ScenarioDocument()
    lines = text.splitlines()
    section = None
    seen_header = False
    mission_lines: list[tuple[int, int, str]] = []
    seen_sections: set[str] = set()

    for lineno, raw in enumerate(lines, start=1):
        content = raw.split("#", 1)[0].rstrip()
        if not content.strip():
            continue
        if not seen_header:
            if content.strip() != HEADER:
                raise ScenarioError(f"missing header {HEADER!r}", lineno, 1)
            seen_header = True
            continue
        indent = len(content) - len(content.lstrip())
        if indent == 0:
            word = content.strip()
            if word not in SECTIONS:
                raise ScenarioError(f"unknown section {word!r}", lineno, 1)
            if word in seen_sections:
                raise ScenarioError(f"duplicate section {word!r}", lineno, 1)
            seen_sections.add(word)
            section = word
            continue
        if section is None:
            raise ScenarioError("indented line outside any section", lineno, indent + 1)
        toks = _tokens(content, lineno)
        if section == "model":
            doc.model.append(_parse_decl(toks, lineno))
        elif section == "timeline":
            doc.timeline.append(_parse_event(toks, lineno))
        elif section == "plant":
            key, value = _parse_plant(toks, lineno)
            if key in doc.plant:
                raise ScenarioError(f"duplicate plant parameter {key!r}", lineno, toks[0][1])
            doc.plant[key] = value
        else:
            mission_lines.append((lineno, indent, content.strip()))

    if not seen_header:
        raise ScenarioError(f"missing header {HEADER!r}", 1, 1)
    if mission_lines:
        doc.mission = _parse_mission(mission_lines)
    validate_document(doc)
    return doc


def _expect_name(toks: list[tuple[str, int]], i: int, line: int, what: str) -> str:
    if i >= len(toks):
        col = toks[-1][1] + len(toks[-1][0]) if toks else 1
        raise ScenarioError(f"expected {what}", line, col)
    tok, col = toks[i]
    if tok in (":", "for", "on") or _OPTION.match(tok):
        raise ScenarioError(f"expected {what}, got {tok!r}", line, col)
    return tok


def _expect(toks: list[tuple[str, int]], i: int, word: str, line: int) -> None:
    if i >= len(toks) or toks[i][0] != word:
        col = toks[i][1] if i < len(toks) else toks[-1][1] + len(toks[-1][0])
        got = toks[i][0] if i < len(toks) else "end of line"
        raise ScenarioError(f"expected {word!r}, got {got!r}", line, col)


def _no_extra(toks: list[tuple[str, int]], n: int, line: int) -> None:
    if len(toks) > n:
        raise ScenarioError(f"unexpected token {toks[n][0]!r}", line, toks[n][1])


def _bool_flags(opts_plain: list[tuple[str, int]], allowed: set[str], line: int) -> set[str]:
    flags = set()
    for tok, col in opts_plain:
        if tok not in allowed:
            raise ScenarioError(f"unexpected token {tok!r}", line, col)
        flags.add(tok)
    return flags


def _parse_decl(toks: list[tuple[str, int]], line: int) -> Decl:
    kw, kcol = toks[0]
    plain, opts = _split_options(toks)
    if kw == "action":
        name = _expect_name(plain, 1, line, "action name")
        _no_extra(plain, 2, line)
        _reject_opts(opts, set(), line)
        return Decl(kw, name, line=line)
    if kw == "function":
        name = _expect_name(plain, 1, line, "function name")
        flags = _bool_flags(plain[2:], {"always-improve"}, line)
        _reject_opts(opts, set(), line)
        return Decl(kw, name, attrs={"always-improve": "always-improve" in flags}, line=line)
    if kw == "component":
        name = _expect_name(plain, 1, line, "component name")
        flags = _bool_flags(plain[2:], {"always-improve", "lifecycle"}, line)
        _reject_opts(opts, {"package", "executable"}, line)
        attrs: dict[str, Any] = {
            "always-improve": "always-improve" in flags,
            "lifecycle-managed": "lifecycle" in flags,
        }
        for k in ("package", "executable"):
            if k in opts:
                attrs[k] = opts[k][0]
        return Decl(kw, name, attrs=attrs, line=line)
    if kw == "parameter":
        label = _expect_name(plain, 1, line, "parameter label")
        key = _expect_name(plain, 2, line, "parameter key")
        value = _expect_name(plain, 3, line, "parameter value")
        _no_extra(plain, 4, line)
        _reject_opts(opts, set(), line)
        return Decl(kw, label, attrs={"key": key, "value": value}, line=line)
    if kw in MEASURE_KINDS:
        name = _expect_name(plain, 1, line, "measure name")
        _no_extra(plain, 2, line)
        _reject_opts(opts, set(), line)
        return Decl(kw, name, line=line)
    if kw == "requires":
        action = _expect_name(plain, 1, line, "action name")
        _expect(plain, 2, ":", line)
        funcs = [_expect_name(plain, i, line, "function name") for i in range(3, max(len(plain), 4))]
        _reject_opts(opts, set(), line)
        return Decl(kw, action, refs=funcs, line=line)
    if kw in ("design", "configuration"):
        name = _expect_name(plain, 1, line, f"{kw} name")
        _expect(plain, 2, "for", line)
        owner = _expect_name(plain, 3, line, "owner name")
        _expect(plain, 4, ":", line)
        what = "component name" if kw == "design" else "parameter label"
        members = [_expect_name(plain, i, line, what) for i in range(5, max(len(plain), 6))]
        _reject_opts(opts, {"priority"}, line)
        attrs = {}
        if "priority" in opts:
            v, c = opts["priority"]
            attrs["priority"] = _integer(v, line, c, "integer priority")
        return Decl(kw, name, refs=[owner, *members], attrs=attrs, line=line)
    if kw == "constraint":
        measure = _expect_name(plain, 1, line, "measure name")
        if len(plain) < 3:
            raise ScenarioError("expected operator", line, kcol)
        op, ocol = plain[2]
        if op not in s.OPERATORS:
            raise ScenarioError(f"unknown operator {op!r}", line, ocol)
        if len(plain) < 4:
            raise ScenarioError("expected threshold", line, ocol)
        value = _number(plain[3][0], line, plain[3][1], "numeric threshold")
        _expect(plain, 4, "on", line)
        target = _expect_name(plain, 5, line, "constrained element")
        _no_extra(plain, 6, line)
        _reject_opts(opts, set(), line)
        return Decl(kw, "", refs=[measure, target], attrs={"operator": op, "value": value}, line=line)
    if kw == "estimation":
        measure = _expect_name(plain, 1, line, "measure name")
        if len(plain) < 3:
            raise ScenarioError("expected estimated value", line, kcol)
        value = _number(plain[2][0], line, plain[2][1], "estimated value")
        if len(plain) < 4 or plain[3][0] not in s.ESTIMATION_TYPES:
            col = plain[3][1] if len(plain) > 3 else plain[2][1]
            raise ScenarioError("expected 'maximize' or 'minimize'", line, col)
        _expect(plain, 4, "on", line)
        target = _expect_name(plain, 5, line, "estimated element")
        _no_extra(plain, 6, line)
        _reject_opts(opts, set(), line)
        return Decl(kw, "", refs=[measure, target], attrs={"value": value, "type": plain[3][0]}, line=line)
    raise ScenarioError(f"unknown declaration {kw!r}", line, kcol)


def _reject_opts(opts: dict[str, tuple[str, int]], allowed: set[str], line: int) -> None:
    for k, (_, col) in opts.items():
        if k not in allowed:
            raise ScenarioError(f"unknown option {k!r}", line, col)


def _parse_event(toks: list[tuple[str, int]], line: int) -> TimelineEvent:
    plain, opts = _split_options(toks)
    tick = _integer(plain[0][0], line, plain[0][1], "tick")
    if tick < 0:
        raise ScenarioError("tick must be non-negative", line, plain[0][1])
    if len(plain) < 2:
        raise ScenarioError("expected event kind", line, plain[0][1])
    kind, kcol = plain[1]
    if kind not in EVENT_KINDS:
        raise ScenarioError(f"unknown event kind {kind!r}", line, kcol)
    target = _expect_name(plain, 2, line, "event target")
    value = None
    n = 3
    if kind == "measure":
        if len(plain) < 4:
            raise ScenarioError("expected measured value", line, plain[2][1])
        value = _number(plain[3][0], line, plain[3][1], "measured value")
        n = 4
    _no_extra(plain, n, line)
    _reject_opts(opts, {"label"}, line)
    label = opts["label"][0] if "label" in opts else None
    return TimelineEvent(tick, kind, target, value, label, line)


def _plant_value(tok: str) -> Any:
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        return float(tok)
    except ValueError:
        return tok


def _parse_plant(toks: list[tuple[str, int]], line: int) -> tuple[str, Any]:
    if len(toks) != 3 or toks[1][0] != "=":
        raise ScenarioError("expected '<key> = <value>'", line, toks[0][1])
    return toks[0][0], _plant_value(toks[2][0])


def _parse_mission(lines: list[tuple[int, int, str]]) -> MissionNode:
    stack: list[tuple[int, MissionNode]] = []
    root: MissionNode | None = None
    for lineno, indent, content in lines:
        toks = _tokens(content, lineno)
        # token columns are relative to the stripped content
        toks = [(t, c + indent) for t, c in toks]
        node = _mission_node(toks, lineno)
        while stack and stack[-1][0] >= indent:
            stack.pop()
        if not stack:
            if root is not None:
                raise ScenarioError("mission must have a single root node", lineno, indent + 1)
            root = node
        else:
            parent = stack[-1][1]
            if parent.kind not in COMPOSITES:
                raise ScenarioError(f"{parent.kind!r} node cannot have children", lineno, indent + 1)
            parent.children.append(node)
        stack.append((indent, node))
    assert root is not None
    for n in root.walk():
        if n.kind in COMPOSITES and not n.children:
            raise ScenarioError(f"{n.kind!r} node has no children", n.line, 1)
    return root


def _mission_node(toks: list[tuple[str, int]], line: int) -> MissionNode:
    plain, opts = _split_options(toks)
    kind, kcol = plain[0]
    arity = {"sequence": 0, "fallback": 0, "feasible": 1, "action": 2, "leaf": 1}
    if kind not in arity:
        raise ScenarioError(f"unknown mission node {kind!r}", line, kcol)
    n = arity[kind]
    if len(plain) - 1 < n:
        raise ScenarioError(f"{kind!r} expects {n} argument(s)", line, kcol)
    _no_extra(plain, n + 1, line)
    _reject_opts(opts, {"prefer"} if kind == "action" else set(), line)
    return MissionNode(kind, [t for t, _ in plain[1:]], {k: v for k, (v, _) in opts.items()}, line=line)


# -- cross-reference validation ---------------------------------------------


def validate_document(doc: ScenarioDocument) -> None:
    kinds: dict[str, str] = {}
    lines: dict[str, int] = {}
    labels: dict[str, Decl] = {}
    named = ("action", "function", "component", "design", "configuration", *MEASURE_KINDS)
    for d in doc.model:
        if d.kind == "parameter":
            if d.name in labels:
                raise ScenarioError(f"duplicate parameter label {d.name!r}", d.line, 1)
            labels[d.name] = d
        elif d.kind in named:
            if d.name in kinds:
                raise ScenarioError(
                    f"duplicate key {d.name!r} (first declared on line {lines[d.name]})", d.line, 1
                )
            kinds[d.name] = d.kind
            lines[d.name] = d.line

    def ref(name: str, allowed: tuple[str, ...], d: Decl, what: str) -> str:
        kind = kinds.get(name)
        if kind is None:
            raise ScenarioError(f"unknown reference {name!r} ({what})", d.line, 1)
        if kind not in allowed:
            raise ScenarioError(f"{name!r} is a {kind}, expected {what}", d.line, 1)
        return kind

    measures = tuple(MEASURE_KINDS)
    required_functions: set[str] = set()
    designed: set[str] = set()
    seen_requires: set[str] = set()
    for d in doc.model:
        if d.kind == "requires":
            ref(d.name, ("action",), d, "action")
            if d.name in seen_requires:
                raise ScenarioError(f"duplicate functional requirement for {d.name!r}", d.line, 1)
            seen_requires.add(d.name)
            for f in d.refs:
                ref(f, ("function",), d, "function")
                required_functions.add(f)
        elif d.kind == "design":
            ref(d.refs[0], ("function",), d, "function")
            designed.add(d.refs[0])
            for c in d.refs[1:]:
                ref(c, ("component",), d, "component")
        elif d.kind == "configuration":
            ref(d.refs[0], ("component",), d, "component")
            for p in d.refs[1:]:
                if p not in labels:
                    raise ScenarioError(f"unknown reference {p!r} (parameter label)", d.line, 1)
        elif d.kind == "constraint":
            ref(d.refs[0], measures, d, "measure")
            kind = kinds.get(d.refs[1])
            if kind is None:
                raise ScenarioError(f"unknown reference {d.refs[1]!r} (constrained element)", d.line, 1)
            if kind not in ("action", "component", "design", "configuration"):
                raise ScenarioError(f"constraint on disallowed element kind {kind!r}", d.line, 1)
        elif d.kind == "estimation":
            ref(d.refs[0], measures, d, "measure")
            kind = kinds.get(d.refs[1])
            if kind is None:
                raise ScenarioError(f"unknown reference {d.refs[1]!r} (estimated element)", d.line, 1)
            if kind not in ("component", "design", "configuration"):
                raise ScenarioError(f"estimation on disallowed element kind {kind!r}", d.line, 1)
    for f in sorted(required_functions - designed):
        line = next(d.line for d in doc.model if d.kind == "requires" and f in d.refs)
        raise ScenarioError(f"function {f!r} is required but has no design", line, 1)

    last = 0
    for ev in doc.timeline:
        if ev.tick < last:
            raise ScenarioError("timeline ticks must be non-decreasing", ev.line, 1)
        last = ev.tick
        if ev.kind == "measure":
            if kinds.get(ev.target) not in measures:
                raise ScenarioError(f"unknown measure {ev.target!r}", ev.line, 1)
        elif kinds.get(ev.target) != "component":
            raise ScenarioError(f"unknown component {ev.target!r}", ev.line, 1)

    if doc.mission is not None:
        for n in doc.mission.walk():
            if n.kind in ("feasible", "action") and kinds.get(n.args[0]) != "action":
                raise ScenarioError(f"unknown action {n.args[0]!r}", n.line, 1)
            pref = n.options.get("prefer")
            if pref is not None and kinds.get(pref) not in measures:
                raise ScenarioError(f"unknown measure {pref!r}", n.line, 1)


# -- loading -----------------------------------------------------------------


def populate(doc: ScenarioDocument, store: Store) -> dict[str, int]:
    """Insert every model declaration into ``store``; returns name -> id."""
    ids: dict[str, int] = {}
    params: dict[str, int] = {}
    for d in doc.model:
        if d.kind == "action":
            ids[d.name] = store.insert(s.ACTION, {"name": d.name})
        elif d.kind == "function":
            ids[d.name] = store.insert(s.FUNCTION, {"name": d.name, **d.attrs})
        elif d.kind == "component":
            ids[d.name] = store.insert(s.COMPONENT, {"name": d.name, **d.attrs})
        elif d.kind == "parameter":
            params[d.name] = store.insert(s.PARAMETER, dict(d.attrs))
        elif d.kind in MEASURE_KINDS:
            ids[d.name] = store.insert(MEASURE_KINDS[d.kind], {"name": d.name})
    for d in doc.model:
        if d.kind == "requires":
            store.insert(
                s.FUNCTIONAL_REQUIREMENT,
                {},
                {"action": [ids[d.name]], "required-function": [ids[f] for f in d.refs]},
            )
        elif d.kind == "design":
            ids[d.name] = store.insert(
                s.FUNCTION_DESIGN,
                {"name": d.name, "priority": d.attrs.get("priority", 1), "is-selected": False},
                {"function": [ids[d.refs[0]]], "required-component": [ids[c] for c in d.refs[1:]]},
            )
        elif d.kind == "configuration":
            ids[d.name] = store.insert(
                s.COMPONENT_CONFIGURATION,
                {"name": d.name, "priority": d.attrs.get("priority", 1), "is-selected": False},
                {"component": [ids[d.refs[0]]], "parameter": [params[p] for p in d.refs[1:]]},
            )
    for d in doc.model:
        if d.kind == "constraint":
            store.insert(
                s.CONSTRAINT,
                {"operator": d.attrs["operator"], "value": d.attrs["value"]},
                {"measure": [ids[d.refs[0]]], "constrained": [ids[d.refs[1]]]},
            )
        elif d.kind == "estimation":
            store.insert(
                s.ESTIMATION,
                {"value": d.attrs["value"], "type": d.attrs["type"]},
                {"measure": [ids[d.refs[0]]], "estimated": [ids[d.refs[1]]]},
            )
    return ids


def load_scenario(text: str) -> tuple[ScenarioDocument, Store]:
    """Parse ``text`` and return the document with a freshly populated store.

    Nothing is returned on error, so a failed load never leaves a partial store.
    """
    doc = parse_scenario(text)
    store = s.new_store()
    populate(doc, store)
    return doc, store


# -- serializing -------------------------------------------------------------


def _fmt_num(v: float) -> str:
    return repr(float(v)) if not float(v).is_integer() else f"{float(v):.1f}"


def _fmt_decl(d: Decl) -> str:
    if d.kind in ("action", *MEASURE_KINDS):
        return f"{d.kind} {d.name}"
    if d.kind == "function":
        return f"function {d.name}" + (" always-improve" if d.attrs.get("always-improve") else "")
    if d.kind == "component":
        parts = [f"component {d.name}"]
        if d.attrs.get("always-improve"):
            parts.append("always-improve")
        if d.attrs.get("lifecycle-managed"):
            parts.append("lifecycle")
        for k in ("package", "executable"):
            if k in d.attrs:
                parts.append(f"{k}={d.attrs[k]}")
        return " ".join(parts)
    if d.kind == "parameter":
        return f"parameter {d.name} {d.attrs['key']} {d.attrs['value']}"
    if d.kind == "requires":
        return f"requires {d.name} : {' '.join(d.refs)}"
    if d.kind in ("design", "configuration"):
        line = f"{d.kind} {d.name} for {d.refs[0]} : {' '.join(d.refs[1:])}"
        if "priority" in d.attrs:
            line += f" priority={d.attrs['priority']}"
        return line
    if d.kind == "constraint":
        return f"constraint {d.refs[0]} {d.attrs['operator']} {_fmt_num(d.attrs['value'])} on {d.refs[1]}"
    if d.kind == "estimation":
        return f"estimation {d.refs[0]} {_fmt_num(d.attrs['value'])} {d.attrs['type']} on {d.refs[1]}"
    raise ValueError(d.kind)


def _fmt_node(node: MissionNode, depth: int, out: list[str]) -> None:
    parts = [node.kind, *node.args, *(f"{k}={v}" for k, v in node.options.items())]
    out.append("  " * (depth + 1) + " ".join(parts))
    for c in node.children:
        _fmt_node(c, depth + 1, out)


def serialize(doc: ScenarioDocument) -> str:
    out = [HEADER, "model"]
    out += [f"  {_fmt_decl(d)}" for d in doc.model]
    if doc.timeline:
        out.append("timeline")
        for ev in doc.timeline:
            line = f"  {ev.tick} {ev.kind} {ev.target}"
            if ev.value is not None:
                line += f" {_fmt_num(ev.value)}"
            if ev.label:
                line += f" label={ev.label}"
            out.append(line)
    if doc.plant:
        out.append("plant")
        out += [f"  {k} = {v}" for k, v in doc.plant.items()]
    if doc.mission is not None:
        out.append("mission")
        _fmt_node(doc.mission, 0, out)
    return "\n".join(out) + "\n"


def model_from_store(store: Store) -> list[Decl]:
    """Rebuild model declarations from the design-time content of ``store``."""
    decls: list[Decl] = []
    names: dict[int, str] = {}
    labels: dict[int, str] = {}
    for inst in store.instances(s.MEASURE):
        names[inst.id] = inst.get("name")
    for inst in store.instances():
        t = inst.type_name
        if t == s.ACTION:
            names[inst.id] = inst.get("name")
            decls.append(Decl("action", inst.get("name")))
        elif t == s.FUNCTION:
            names[inst.id] = inst.get("name")
            decls.append(Decl("function", inst.get("name"), attrs={"always-improve": inst.get("always-improve", False)}))
        elif t == s.COMPONENT:
            names[inst.id] = inst.get("name")
            attrs = {
                "always-improve": inst.get("always-improve", False),
                "lifecycle-managed": inst.get("lifecycle-managed", False),
            }
            for k in ("package", "executable"):
                if inst.get(k) is not None:
                    attrs[k] = inst.get(k)
            decls.append(Decl("component", inst.get("name"), attrs=attrs))
        elif t == s.PARAMETER:
            labels[inst.id] = f"p{len(labels) + 1}"
            decls.append(Decl("parameter", labels[inst.id], attrs={"key": inst.get("key"), "value": inst.get("value")}))
        elif t in (s.MEASURE, s.QUALITY_ATTRIBUTE, s.ENVIRONMENTAL_ATTRIBUTE):
            kind = {v: k for k, v in MEASURE_KINDS.items()}[t]
            decls.append(Decl(kind, inst.get("name")))
        elif t in (s.FUNCTION_DESIGN, s.COMPONENT_CONFIGURATION):
            names[inst.id] = inst.get("name")
    for inst in store.instances():
        t = inst.type_name
        if t == s.FUNCTIONAL_REQUIREMENT:
            decls.append(
                Decl("requires", names[inst.roles["action"][0]], refs=[names[f] for f in inst.roles["required-function"]])
            )
        elif t == s.FUNCTION_DESIGN:
            decls.append(
                Decl(
                    "design",
                    inst.get("name"),
                    refs=[names[inst.roles["function"][0]], *(names[c] for c in inst.roles["required-component"])],
                    attrs={"priority": inst.get("priority", 1)},
                )
            )
        elif t == s.COMPONENT_CONFIGURATION:
            decls.append(
                Decl(
                    "configuration",
                    inst.get("name"),
                    refs=[names[inst.roles["component"][0]], *(labels[p] for p in inst.roles["parameter"])],
                    attrs={"priority": inst.get("priority", 1)},
                )
            )
        elif t == s.CONSTRAINT:
            decls.append(
                Decl(
                    "constraint",
                    "",
                    refs=[names[inst.roles["measure"][0]], names[inst.roles["constrained"][0]]],
                    attrs={"operator": inst.get("operator"), "value": inst.get("value")},
                )
            )
        elif t == s.ESTIMATION:
            decls.append(
                Decl(
                    "estimation",
                    "",
                    refs=[names[inst.roles["measure"][0]], names[inst.roles["estimated"][0]]],
                    attrs={"value": inst.get("value"), "type": inst.get("type")},
                )
            )
    return decls
