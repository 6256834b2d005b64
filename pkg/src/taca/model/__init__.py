"""Adaptation knowledge model: schema, scenario files, counts, generators."""

from .counting import ElementCount, count_elements
from .hypothetical import generate_hypothetical, predicted_elements
from .scenario import (
    MissionNode,
    ScenarioDocument,
    ScenarioError,
    TimelineEvent,
    load_scenario,
    parse_scenario,
    serialize,
)
from .schema import new_store

__all__ = [
    "ElementCount",
    "MissionNode",
    "ScenarioDocument",
    "ScenarioError",
    "TimelineEvent",
    "count_elements",
    "generate_hypothetical",
    "load_scenario",
    "new_store",
    "parse_scenario",
    "predicted_elements",
    "serialize",
]
