from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_match
from taca.store import (
    AttributeDef as A,
    AttributeValueError,
    Clause,
    KeyCollisionError,
    Pattern,
    PatternError,
    ReferentialIntegrityError,
    RoleError,
    SchemaDef,
    SchemaError,
    Store,
    UnknownInstanceError,
    UnknownTypeError,
    Var,
    pattern_from_dict,
)
from taca.model import schema as s


def people_schema() -> SchemaDef:
    d = SchemaDef()
    d.entity("person", A("name", "string", is_key=True), A("age", "integer"), A("tag", "string"))
    d.entity("robot", supertype="person")
    d.relation("friendship", {"a": ["person"], "b": ["person"]}, A("since", "integer"))
    d.relation("endorsement", {"target": ["friendship"], "by": ["person"]})
    return d


@pytest.fixture
def store():
    st_ = Store()
    st_.define_schema(people_schema())
    return st_


# -- schema -------------------------------------------------------------------


def test_schema_defines_action_and_functional_requirement():
    store = s.new_store()
    assert store.schema.is_relation(s.FUNCTIONAL_REQUIREMENT)
    assert store.schema.key_scope(s.ACTION) == (s.ACTION, "name")
    assert set(store.schema.roles(s.FUNCTIONAL_REQUIREMENT)) == {"action", "required-function"}


def test_constraint_role_admits_relations_as_players():
    store = s.new_store()
    for player in s.CONSTRAINABLE:
        assert store.schema.accepts_player(s.CONSTRAINT, "constrained", player)
    assert not store.schema.accepts_player(s.CONSTRAINT, "constrained", s.FUNCTION)


@pytest.mark.parametrize(
    "defs",
    [
        SchemaDef().entity("x").entity("x"),
        SchemaDef().entity("x", supertype="missing"),
        SchemaDef().entity("x", A("a", "string"), A("a", "string")),
        SchemaDef().entity("x", A("a", "complex")),
        SchemaDef().entity("x", A("a", "string", True), A("b", "string", True)),
        SchemaDef().relation("r", {"role": ["missing"]}),
        SchemaDef().entity("x").relation("r", {"role": []}),
    ],
)
def test_invalid_schemas_are_rejected(defs):
    with pytest.raises(SchemaError):
        Store().define_schema(defs)


def test_schema_defined_once(store):
    with pytest.raises(SchemaError):
        store.define_schema(people_schema())


# -- insert / read ------------------------------------------------------------


def test_insert_returns_increasing_ids(store):
    a = store.insert("person", {"name": "ann"})
    b = store.insert("person", {"name": "bob"})
    assert b > a and store.ids() == [a, b]


def test_insert_search_pipeline_action():
    store = s.new_store()
    iid = store.insert(s.ACTION, {"name": "search_pipeline"})
    assert store.find(s.ACTION, "search_pipeline").id == iid


def test_functional_requirement_has_three_fillers():
    store = s.new_store()
    a = store.insert(s.ACTION, {"name": "a"})
    f1 = store.insert(s.FUNCTION, {"name": "f1"})
    f2 = store.insert(s.FUNCTION, {"name": "f2"})
    fr = store.insert(s.FUNCTIONAL_REQUIREMENT, {}, {"action": [a], "required-function": [f1, f2]})
    inst = store.get(fr)
    assert sum(len(v) for v in inst.roles.values()) == 3
    assert store.referrers(f1) == [fr]


def test_key_collision_spans_subtypes(store):
    store.insert("person", {"name": "ann"})
    with pytest.raises(KeyCollisionError):
        store.insert("robot", {"name": "ann"})


def test_key_is_required_and_single(store):
    with pytest.raises(AttributeValueError):
        store.insert("person", {"age": 3})
    with pytest.raises(AttributeValueError):
        store.insert("person", {"name": ["a", "b"]})


@pytest.mark.parametrize(
    "attrs",
    [{"name": "x", "age": "old"}, {"name": "x", "age": True}, {"name": 3}, {"name": "x", "height": 1}],
)
def test_bad_attribute_values_rejected(store, attrs):
    with pytest.raises(AttributeValueError):
        store.insert("person", attrs)


def test_unknown_type_rejected(store):
    with pytest.raises(UnknownTypeError):
        store.insert("alien", {})


def test_role_checks(store):
    a = store.insert("person", {"name": "a"})
    b = store.insert("robot", {"name": "b"})
    f = store.insert("friendship", {}, {"a": [a], "b": [b]})
    with pytest.raises(RoleError):
        store.insert("friendship", {}, {"c": [a]})
    with pytest.raises(RoleError):
        store.insert("friendship", {}, {"a": [999]})
    with pytest.raises(RoleError):
        store.insert("endorsement", {}, {"target": [a]})
    with pytest.raises(RoleError):
        store.insert("friendship", {})
    with pytest.raises(RoleError):
        store.insert("person", {"name": "z"}, {"a": [a]})
    # higher-order: a relation playing a role
    e = store.insert("endorsement", {}, {"target": [f], "by": [a]})
    assert store.referrers(f) == [e]


def test_failed_insert_leaves_store_unchanged(store):
    store.insert("person", {"name": "ann"})
    before = (store.epoch, store.ids())
    with pytest.raises(KeyCollisionError):
        store.insert("person", {"name": "ann"})
    assert (store.epoch, store.ids()) == before


def test_set_and_delete_attribute(store):
    a = store.insert("person", {"name": "a", "tag": ["x", "y"]})
    store.set_attribute(a, "age", 4)
    assert store.value(a, "age") == 4
    store.delete_attribute(a, "tag", "x")
    assert store.values(a, "tag") == ["y"]
    store.delete_attribute(a, "tag")
    assert store.values(a, "tag") == []
    with pytest.raises(AttributeValueError):
        store.set_attribute(a, "name", "b")
    with pytest.raises(UnknownInstanceError):
        store.set_attribute(12345, "age", 1)


def test_status_set_then_cleared_is_absent():
    store = s.new_store()
    c = store.insert(s.COMPONENT, {"name": "thruster_1"})
    store.set_attribute(c, "status", "failure")
    store.delete_attribute(c, "status", "failure")
    assert "status" not in store.get(c).attributes


def test_restricted_delete(store):
    a = store.insert("person", {"name": "a"})
    b = store.insert("person", {"name": "b"})
    f = store.insert("friendship", {}, {"a": [a], "b": [b]})
    with pytest.raises(ReferentialIntegrityError):
        store.delete(a)
    store.delete(f)
    store.delete(a)
    assert a not in store
    store.insert("person", {"name": "a"})  # key freed


def test_every_mutation_bumps_epoch(store):
    e0 = store.epoch
    a = store.insert("person", {"name": "a"})
    store.set_attribute(a, "age", 1)
    store.delete_attribute(a, "age")
    store.delete(a)
    assert store.epoch == e0 + 4


# -- matching -----------------------------------------------------------------


def test_match_on_empty_store_is_empty(store):
    assert store.match(Pattern([Clause("p", "person")])) == []


def test_set_is_selected_visible_to_match():
    store = s.new_store()
    f = store.insert(s.FUNCTION, {"name": "f"})
    c = store.insert(s.COMPONENT, {"name": "c"})
    fd = store.insert(s.FUNCTION_DESIGN, {"name": "fd"}, {"function": [f], "required-component": [c]})
    pat = Pattern([Clause("d", s.FUNCTION_DESIGN, has={"is-selected": True})])
    assert store.match(pat) == []
    store.set_attribute(fd, "is-selected", True)
    assert store.match(pat) == [{"d": fd}]


def test_match_with_roles_binding_and_negation(store):
    a = store.insert("person", {"name": "a", "age": 30})
    b = store.insert("person", {"name": "b", "age": 30})
    c = store.insert("person", {"name": "c", "age": 5})
    f = store.insert("friendship", {}, {"a": [a], "b": [b]})
    store.insert("endorsement", {}, {"target": [f], "by": [c]})
    pat = Pattern(
        [
            Clause("f", "friendship", roles={"a": "x", "b": "y"}),
            Clause("x", "person", has={"age": Var("n")}),
            Clause("y", "person", has={"age": Var("n")}),
        ]
    )
    assert store.match(pat) == [{"f": f, "x": a, "y": b, "n": 30}]
    not_self = Pattern(
        [Clause("f", "friendship", roles={"a": "x"}), Clause("e", "endorsement", roles={"by": "p"})],
        [[Clause("p", has={"age": 5})]],
    )
    assert store.match(not_self) == []
    human = Pattern([Clause("p", "person")], [[Clause("p", "robot")]])
    assert [r["p"] for r in store.match(human)] == [a, b, c]
    old = Pattern([Clause("p", "person", has={"age": lambda v: v > 10})])
    assert [r["p"] for r in store.match(old)] == [a, b]
    no_tag = Pattern([Clause("p", "person", lacks=("age",))])
    assert store.match(no_tag) == []


def test_match_sees_derived_attributes(store):
    a = store.insert("person", {"name": "a"})

    class Flag:
        def derived_attributes(self, st_):
            return {a: {"tag": "derived"}}

    store.attach_view(Flag())
    assert store.match(Pattern([Clause("p", "person", has={"tag": "derived"})])) == [{"p": a}]


def test_unbound_negation_variable_rejected(store):
    with pytest.raises(PatternError):
        store.match(Pattern([Clause("p", "person")], [[Clause("q", "friendship", roles={"a": "z"})]]))
    with pytest.raises(PatternError):
        store.match(Pattern([]))


def test_pattern_from_dict():
    pat = pattern_from_dict(
        {"clauses": [{"var": "p", "type": "person", "has": {"age": {"var": "n"}}}], "negations": [[{"var": "p", "lacks": ["tag"]}]]}
    )
    assert pat.clauses[0].has["age"] == Var("n")
    assert pat.negations[0][0].lacks == ("tag",)


# -- properties -----------------------------------------------------------------

names = st.sampled_from(["a", "b", "c", "d", "e", "f", "g"])


@st.composite
def populated(draw):
    store = Store()
    store.define_schema(people_schema())
    people = []
    for name in draw(st.lists(names, unique=True, min_size=1, max_size=6)):
        attrs = {"name": name}
        if draw(st.booleans()):
            attrs["age"] = draw(st.integers(0, 3))
        if draw(st.booleans()):
            attrs["tag"] = draw(st.lists(st.sampled_from(["x", "y"]), min_size=1, max_size=2, unique=True))
        people.append(store.insert("robot" if draw(st.booleans()) else "person", attrs))
    rels = []
    for _ in range(draw(st.integers(0, 6))):
        a, b = draw(st.sampled_from(people)), draw(st.sampled_from(people))
        rels.append(store.insert("friendship", {"since": draw(st.integers(0, 2))}, {"a": [a], "b": [b]}))
    for _ in range(draw(st.integers(0, 3))):
        if rels:
            store.insert("endorsement", {}, {"target": [draw(st.sampled_from(rels))], "by": [draw(st.sampled_from(people))]})
    return store


PATTERNS = [
    Pattern([Clause("p", "person", has={"age": Var("n")})]),
    Pattern([Clause("p", "robot", has={"tag": "x"})]),
    Pattern([Clause("f", "friendship", roles={"a": "x", "b": "y"}), Clause("x", "person", has={"age": Var("n")}), Clause("y", has={"age": Var("n")})]),
    Pattern([Clause("f", "friendship", roles={"a": "p", "b": "q"})], [[Clause("p", "robot"), Clause("q", "robot")]]),
    Pattern([Clause("e", "endorsement", roles={"target": "f", "by": "p"}), Clause("f", "friendship", roles={"a": "p"})]),
    Pattern([Clause("p", "person", lacks=("tag",), has={"age": lambda v: v >= 2})]),
    Pattern([Clause("f", "friendship", has={"since": Var("s")}, roles={"a": "x"}), Clause("x", "person", has={"age": Var("s")})], [[Clause("x", "robot")]]),
]


def _canon(rows):
    return sorted(tuple(sorted(r.items())) for r in rows)


@settings(max_examples=60, deadline=None)
@given(populated(), st.sampled_from(range(len(PATTERNS))))
def test_match_equals_brute_force(store, k):
    assert len(store) <= 50
    got = store.match(PATTERNS[k])
    assert _canon(got) == _canon(brute_force_match(store, PATTERNS[k]))
    assert len(set(_canon(got))) == len(got)  # no duplicates
    assert store.match(PATTERNS[k]) == got  # deterministic order


@settings(max_examples=40, deadline=None)
@given(populated(), names.filter(lambda n: n not in "abcdefg") | st.just("zz"))
def test_inserting_never_removes_positive_matches(store, name):
    pat = PATTERNS[2]
    before = _canon(store.match(pat))
    p = store.insert("person", {"name": name, "age": 1})
    store.insert("friendship", {}, {"a": [p], "b": [store.ids("person")[0]]})
    after = _canon(store.match(pat))
    assert set(before) <= set(after)
