"""The adaptation knowledge model expressed as an ERA schema."""

from __future__ import annotations

from ..store import AttributeDef as A
from ..store import SchemaDef, Store

ACTION = "Action"
FUNCTION = "Function"
COMPONENT = "Component"
PARAMETER = "ComponentParameter"
MEASURE = "Measure"
QUALITY_ATTRIBUTE = "QualityAttribute"
ENVIRONMENTAL_ATTRIBUTE = "EnvironmentalAttribute"

FUNCTIONAL_REQUIREMENT = "functional-requirement"
FUNCTION_DESIGN = "function-design"
COMPONENT_CONFIGURATION = "component-configuration"
MEASUREMENT = "measurement"
CONSTRAINT = "constraint"
ESTIMATION = "estimation"
REQUIRED_ACTION = "required-action"
RECONFIGURATION_PLAN = "reconfiguration-plan"

ENTITY_TYPES = (
    ACTION,
    FUNCTION,
    COMPONENT,
    PARAMETER,
    MEASURE,
    QUALITY_ATTRIBUTE,
    ENVIRONMENTAL_ATTRIBUTE,
)
DESIGN_TIME_RELATIONS = (
    FUNCTIONAL_REQUIREMENT,
    FUNCTION_DESIGN,
    COMPONENT_CONFIGURATION,
    CONSTRAINT,
    ESTIMATION,
)
RUNTIME_RELATIONS = (MEASUREMENT, REQUIRED_ACTION, RECONFIGURATION_PLAN)

CONSTRAINABLE = (ACTION, COMPONENT, FUNCTION_DESIGN, COMPONENT_CONFIGURATION)
ESTIMABLE = (FUNCTION_DESIGN, COMPONENT, COMPONENT_CONFIGURATION)

OPERATORS = (">", ">=", "<", "<=", "==")
ESTIMATION_TYPES = ("maximize", "minimize")


def _name() -> A:
    return A("name", "string", is_key=True)


def build_schema_def() -> SchemaDef:
    d = SchemaDef()
    d.entity(ACTION, _name(), A("status", "string"), A("is-required", "boolean"))
    d.entity(
        FUNCTION,
        _name(),
        A("always-improve", "boolean"),
        A("status", "string"),
        A("is-required", "boolean"),
    )
    d.entity(
        COMPONENT,
        _name(),
        A("always-improve", "boolean"),
        A("status", "string"),
        A("is-required", "boolean"),
        A("is-active", "boolean"),
        A("pid", "integer"),
        A("package", "string"),
        A("executable", "string"),
        A("lifecycle-managed", "boolean"),
    )
    d.entity(PARAMETER, A("key", "string"), A("value", "string"))
    d.entity(MEASURE, _name())
    d.entity(QUALITY_ATTRIBUTE, supertype=MEASURE)
    d.entity(ENVIRONMENTAL_ATTRIBUTE, supertype=MEASURE)

    d.relation(FUNCTIONAL_REQUIREMENT, {"action": [ACTION], "required-function": [FUNCTION]})
    d.relation(
        FUNCTION_DESIGN,
        {"function": [FUNCTION], "required-component": [COMPONENT]},
        _name(),
        A("priority", "integer"),
        A("status", "string"),
        A("is-selected", "boolean"),
    )
    d.relation(
        COMPONENT_CONFIGURATION,
        {"component": [COMPONENT], "parameter": [PARAMETER]},
        _name(),
        A("priority", "integer"),
        A("status", "string"),
        A("is-selected", "boolean"),
    )
    d.relation(MEASUREMENT, {"measure": [MEASURE]}, A("value", "double"), A("time", "datetime"))
    d.relation(
        CONSTRAINT,
        {"measure": [MEASURE], "constrained": list(CONSTRAINABLE)},
        A("operator", "string"),
        A("value", "double"),
        A("status", "string"),
    )
    d.relation(
        ESTIMATION,
        {"measure": [MEASURE], "estimated": list(ESTIMABLE)},
        A("value", "double"),
        A("type", "string"),
    )
    d.relation(
        REQUIRED_ACTION,
        {"action": [ACTION], "preferred-measure": [MEASURE]},
        A("start-time", "datetime"),
        A("end-time", "datetime"),
        A("result", "string"),
    )
    d.relation(
        RECONFIGURATION_PLAN,
        {
            "component-activation": [COMPONENT],
            "component-deactivation": [COMPONENT],
            "parameter-adaptation": [COMPONENT_CONFIGURATION],
        },
        A("start-time", "datetime"),
        A("end-time", "datetime"),
        A("result", "string"),
        allow_empty=True,
    )
    return d


def new_store() -> Store:
    store = Store()
    store.define_schema(build_schema_def())
    return store
