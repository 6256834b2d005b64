"""Reactive behavior trees whose actions are gated by knowledge-base feasibility.

Composites are memory-less: every tick starts again from the first child, so a
feasibility condition placed before an action is re-checked on every tick.
Running children that end up not being ticked are halted.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, Protocol

from .kb import KnowledgeBase, ServiceError
from .model.scenario import MissionNode

log = logging.getLogger(__name__)


class Status(enum.Enum):
    SUCCESS = "success"
    FAILURE = "failure"
    RUNNING = "running"


class Behavior(Protocol):
    def tick(self) -> Status: ...

    def halt(self) -> None: ...


@dataclass
class TickContext:
    kb: KnowledgeBase
    trace: list[tuple[str, str]] = field(default_factory=list)


class Node:
    label = "node"

    def __init__(self) -> None:
        self.path = ""
        self.status: Status | None = None

    def tick(self, ctx: TickContext) -> Status:
        st = self._tick(ctx)
        self.status = st
        ctx.trace.append((self.path, st.value))
        return st

    def _tick(self, ctx: TickContext) -> Status:
        raise NotImplementedError

    def halt(self, ctx: TickContext) -> None:
        self.status = None

    @property
    def running(self) -> bool:
        return self.status is Status.RUNNING

    def children(self) -> list["Node"]:
        return []

    def assign_paths(self, prefix: str = "") -> None:
        self.path = f"{prefix}/{self.label}" if prefix else self.label
        for i, c in enumerate(self.children()):
            c.assign_paths(f"{self.path}[{i}]")


class _Composite(Node):
    def __init__(self, children: list[Node]):
        super().__init__()
        if not children:
            raise ValueError(f"{self.label} needs at least one child")
        self._children = list(children)

    def children(self) -> list[Node]:
        return self._children

    def _halt_from(self, start: int, ctx: TickContext) -> None:
        for c in self._children[start:]:
            if c.running:
                c.halt(ctx)

    def halt(self, ctx: TickContext) -> None:
        self._halt_from(0, ctx)
        super().halt(ctx)


class Sequence(_Composite):
    label = "sequence"

    def _tick(self, ctx: TickContext) -> Status:
        for i, c in enumerate(self._children):
            st = c.tick(ctx)
            if st is not Status.SUCCESS:
                self._halt_from(i + 1, ctx)
                return st
        return Status.SUCCESS


class Fallback(_Composite):
    label = "fallback"

    def _tick(self, ctx: TickContext) -> Status:
        for i, c in enumerate(self._children):
            st = c.tick(ctx)
            if st is not Status.FAILURE:
                self._halt_from(i + 1, ctx)
                return st
        return Status.FAILURE


class IsActionFeasible(Node):
    def __init__(self, action: str):
        super().__init__()
        self.action = action
        self.label = f"feasible({action})"

    def _tick(self, ctx: TickContext) -> Status:
        return Status.SUCCESS if self.action in ctx.kb.call("action/selectable") else Status.FAILURE


class DomainLeaf(Node):
    def __init__(self, name: str, behavior: Behavior):
        super().__init__()
        self.behavior = behavior
        self.label = f"leaf({name})"

    def _tick(self, ctx: TickContext) -> Status:
        return self.behavior.tick()

    def halt(self, ctx: TickContext) -> None:
        self.behavior.halt()
        super().halt(ctx)


class RosaAction(Node):
    """Runs a domain behavior and mirrors its lifetime as a required action in the KB."""

    def __init__(self, action: str, behavior: Behavior, preferred_measure: str | None = None):
        super().__init__()
        self.action = action
        self.behavior = behavior
        self.preferred_measure = preferred_measure
        self.label = f"action({action})"
        self.is_open = False

    def _request(self, ctx: TickContext, operation: str, result: str | None = None) -> None:
        req = {"action": self.action, "operation": operation}
        if operation == "start" and self.preferred_measure:
            req["preferred_measure"] = self.preferred_measure
        if result is not None:
            req["result"] = result
        ctx.kb.call("action/request", req)

    def _tick(self, ctx: TickContext) -> Status:
        st = self.behavior.tick()
        if st is Status.RUNNING:
            if not self.is_open:
                self._request(ctx, "start")
                self.is_open = True
        elif self.is_open:
            self._request(ctx, "stop", st.value)
            self.is_open = False
        return st

    def halt(self, ctx: TickContext) -> None:
        self.behavior.halt()
        if self.is_open:
            self._request(ctx, "stop", "halted")
            self.is_open = False
        super().halt(ctx)


class BehaviorTree:
    def __init__(self, root: Node):
        self.root = root
        root.assign_paths()

    def tick(self, kb: KnowledgeBase) -> tuple[Status, list[tuple[str, str]]]:
        ctx = TickContext(kb)
        st = self.root.tick(ctx)
        return st, ctx.trace

    def halt(self, kb: KnowledgeBase) -> None:
        """Halt every running node, closing any open required actions."""
        ctx = TickContext(kb)
        if self.root.running:
            self.root.halt(ctx)

    def nodes(self) -> list[Node]:
        out, stack = [], [self.root]
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(reversed(n.children()))
        return out


BehaviorFactory = Callable[[str], Behavior]


def build_tree(mission: MissionNode, behaviors: BehaviorFactory, action_names: set[str] | None = None) -> BehaviorTree:
    """Compile a parsed mission description into a tree.

    ``behaviors`` maps a behavior name to a fresh behavior object.
    ``action_names``, when given, is checked against every action reference.
    """

    def check(action: str) -> None:
        if action_names is not None and action not in action_names:
            raise ServiceError(f"unknown action {action!r} in mission")

    def build(n: MissionNode) -> Node:
        if n.kind == "sequence":
            return Sequence([build(c) for c in n.children])
        if n.kind == "fallback":
            return Fallback([build(c) for c in n.children])
        if n.kind == "feasible":
            check(n.args[0])
            return IsActionFeasible(n.args[0])
        if n.kind == "action":
            check(n.args[0])
            return RosaAction(n.args[0], behaviors(n.args[1]), n.options.get("prefer"))
        if n.kind == "leaf":
            return DomainLeaf(n.args[0], behaviors(n.args[0]))
        raise ValueError(f"unknown mission node kind {n.kind!r}")

    return BehaviorTree(build(mission))
