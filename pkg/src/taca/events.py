"""Events and diagnostics exchanged between the managing components."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import asdict, dataclass

log = logging.getLogger(__name__)

MONITORING_DATA = "insert monitoring data"
ACTION_UPDATE = "action update"
RECONFIGURATION_PLAN = "reconfiguration plan"
EVENT_KINDS = (MONITORING_DATA, ACTION_UPDATE, RECONFIGURATION_PLAN)

QA_MEASUREMENT = "QA measurement"
EA_MEASUREMENT = "EA measurement"
COMPONENT_STATUS = "Component status"
DIAGNOSTIC_KINDS = (QA_MEASUREMENT, EA_MEASUREMENT, COMPONENT_STATUS)


@dataclass(frozen=True)
class Event:
    kind: str
    epoch: int
    tick: int

    def __post_init__(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")

    def as_line(self) -> str:
        return f"{self.tick}\t{self.kind}\t{self.epoch}"


@dataclass(frozen=True)
class Diagnostic:
    source: str
    kind: str
    key: str
    value: str
    tick: int

    def to_dict(self) -> dict:
        return asdict(self)


class EventBus:
    """FIFO event topic. Everything published is also kept in :attr:`log`."""

    def __init__(self) -> None:
        self._queue: deque[Event] = deque()
        self.log: list[Event] = []

    def publish(self, event: Event) -> None:
        log.debug("event %s", event)
        self._queue.append(event)
        self.log.append(event)

    def pop(self) -> Event | None:
        return self._queue.popleft() if self._queue else None

    def __len__(self) -> int:
        return len(self._queue)
