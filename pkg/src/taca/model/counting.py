"""Development-effort element counts over design-time knowledge."""

from __future__ import annotations

from typing import NamedTuple

from ..store import Store
from . import schema as s


class ElementCount(NamedTuple):
    entities: int
    relations: int
    total: int

    def __str__(self) -> str:
        return f"{self.entities} entities, {self.relations} relations, {self.total} total"


def count_elements(store: Store) -> ElementCount:
    """Count entities and design-time relations; runtime relations are ignored."""
    if not store.schema.type_names:
        return ElementCount(0, 0, 0)
    entities = sum(len(store.ids(t)) for t in (s.ACTION, s.FUNCTION, s.COMPONENT, s.PARAMETER, s.MEASURE))
    relations = sum(len(store.ids(t)) for t in s.DESIGN_TIME_RELATIONS)
    return ElementCount(entities, relations, entities + relations)
