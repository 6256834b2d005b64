"""Typed entity-relation-attribute store.

Relations are first-class instances: they carry attributes and can fill roles
in other relations, so higher-order relationships need no reification. All
iteration is ordered by instance id, which is allocated monotonically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, Protocol

VALUE_KINDS = ("string", "double", "integer", "boolean", "datetime")


class StoreError(Exception):
    """Base class for store failures."""


class SchemaError(StoreError):
    pass


class UnknownTypeError(StoreError):
    pass


class KeyCollisionError(StoreError):
    pass


class RoleError(StoreError):
    """Unknown role, player type violation or dangling filler."""


class AttributeValueError(StoreError):
    pass


class UnknownInstanceError(StoreError):
    pass


class ReferentialIntegrityError(StoreError):
    pass


class PatternError(StoreError):
    pass


@dataclass(frozen=True)
class AttributeDef:
    name: str
    kind: str
    is_key: bool = False


@dataclass(frozen=True)
class RoleDef:
    name: str
    players: frozenset[str]


@dataclass(frozen=True)
class TypeDef:
    name: str
    is_relation: bool = False
    supertype: str | None = None
    attributes: tuple[AttributeDef, ...] = ()
    roles: tuple[RoleDef, ...] = ()
    # relation types whose instances may legitimately have no fillers
    allow_empty: bool = False


@dataclass
class SchemaDef:
    """Entity and relation type declarations.

    Subtypes inherit attributes and roles from their supertype, and a key
    declared on a supertype is unique across the whole subtype family.
    """

    types: list[TypeDef] = field(default_factory=list)

    def entity(self, name: str, *attributes: AttributeDef, supertype: str | None = None) -> "SchemaDef":
        self.types.append(TypeDef(name, False, supertype, tuple(attributes)))
        return self

    def relation(
        self,
        name: str,
        roles: Mapping[str, Iterable[str]],
        *attributes: AttributeDef,
        allow_empty: bool = False,
    ) -> "SchemaDef":
        role_defs = tuple(RoleDef(r, frozenset(p)) for r, p in roles.items())
        self.types.append(TypeDef(name, True, None, tuple(attributes), role_defs, allow_empty))
        return self


class Schema:
    """Validated, immutable view over a :class:`SchemaDef`."""

    def __init__(self, defs: SchemaDef):
        self._types: dict[str, TypeDef] = {}
        for t in defs.types:
            if t.name in self._types:
                raise SchemaError(f"duplicate type name {t.name!r}")
            self._types[t.name] = t
        for t in defs.types:
            if t.supertype is not None:
                sup = self._types.get(t.supertype)
                if sup is None:
                    raise SchemaError(f"{t.name!r} subtypes unknown type {t.supertype!r}")
                if sup.is_relation != t.is_relation:
                    raise SchemaError(f"{t.name!r} and its supertype differ in kind")
            seen: set[str] = set()
            for a in self._lineage_attrs(t.name):
                if a.name in seen:
                    raise SchemaError(f"attribute {a.name!r} declared twice on {t.name!r}")
                if a.kind not in VALUE_KINDS:
                    raise SchemaError(f"attribute {a.name!r} has unknown kind {a.kind!r}")
                seen.add(a.name)
            if sum(a.is_key for a in self._lineage_attrs(t.name)) > 1:
                raise SchemaError(f"type {t.name!r} declares more than one key attribute")
            role_names: set[str] = set()
            for r in t.roles:
                if r.name in role_names:
                    raise SchemaError(f"role {r.name!r} declared twice on {t.name!r}")
                role_names.add(r.name)
                if not r.players:
                    raise SchemaError(f"role {t.name}:{r.name} admits no players")
                for p in r.players:
                    if p not in self._types:
                        raise SchemaError(f"role {t.name}:{r.name} references unknown type {p!r}")
        self._attrs = {name: {a.name: a for a in self._lineage_attrs(name)} for name in self._types}
        self._roles = {name: {r.name: r for r in self._lineage_roles(name)} for name in self._types}

    def _lineage(self, name: str) -> list[TypeDef]:
        out = []
        cur: str | None = name
        while cur is not None:
            t = self._types[cur]
            out.append(t)
            cur = t.supertype
        return out

    def _lineage_attrs(self, name: str) -> list[AttributeDef]:
        return [a for t in reversed(self._lineage(name)) for a in t.attributes]

    def _lineage_roles(self, name: str) -> list[RoleDef]:
        return [r for t in reversed(self._lineage(name)) for r in t.roles]

    def __contains__(self, name: str) -> bool:
        return name in self._types

    @property
    def type_names(self) -> list[str]:
        return list(self._types)

    def typedef(self, name: str) -> TypeDef:
        try:
            return self._types[name]
        except KeyError:
            raise UnknownTypeError(f"unknown type {name!r}") from None

    def is_relation(self, name: str) -> bool:
        return self.typedef(name).is_relation

    def is_a(self, name: str, ancestor: str) -> bool:
        return any(t.name == ancestor for t in self._lineage(name))

    def attributes(self, name: str) -> dict[str, AttributeDef]:
        self.typedef(name)
        return self._attrs[name]

    def roles(self, name: str) -> dict[str, RoleDef]:
        self.typedef(name)
        return self._roles[name]

    def key_scope(self, name: str) -> tuple[str, str] | None:
        """(root type owning the key, key attribute name), if the type is keyed."""
        for t in reversed(self._lineage(name)):
            for a in t.attributes:
                if a.is_key:
                    return t.name, a.name
        return None

    def accepts_player(self, relation: str, role: str, player_type: str) -> bool:
        role_def = self.roles(relation)[role]
        return any(self.is_a(player_type, p) for p in role_def.players)


def check_value(attr: AttributeDef, value: Any) -> Any:
    kind = attr.kind
    ok = False
    if kind == "string":
        ok = isinstance(value, str)
    elif kind == "boolean":
        ok = isinstance(value, bool)
    elif kind in ("integer", "datetime"):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif kind == "double":
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        if ok:
            value = float(value)
    if not ok:
        raise AttributeValueError(f"attribute {attr.name!r} expects {kind}, got {value!r}")
    return value


@dataclass
class Instance:
    id: int
    type_name: str
    attributes: dict[str, list[Any]] = field(default_factory=dict)
    roles: dict[str, list[int]] = field(default_factory=dict)

    def get(self, attr: str, default: Any = None) -> Any:
        values = self.attributes.get(attr)
        return values[-1] if values else default


class DerivedView(Protocol):
    """Supplies rule-inferred attribute values for a store epoch."""

    def derived_attributes(self, store: "Store") -> Mapping[int, Mapping[str, Any]]: ...


# ---------------------------------------------------------------------------
# patterns


@dataclass(frozen=True)
class Var:
    """Binds an attribute value to a variable in a pattern."""

    name: str


@dataclass
class Clause:
    """One conjunct: ``var`` is an instance of ``type`` with the given attributes and role fillers.

    ``has`` maps attribute names to a constant (equality), a :class:`Var`
    (binding) or a one-argument predicate. ``roles`` maps a role of this
    (relation) instance to the variable, or variables, that must fill it.
    ``lacks`` lists attributes that must have no value.
    """

    var: str
    type: str | None = None
    has: dict[str, Any] = field(default_factory=dict)
    roles: dict[str, str | tuple[str, ...]] = field(default_factory=dict)
    lacks: tuple[str, ...] = ()

    def role_vars(self) -> list[tuple[str, str]]:
        out = []
        for role, v in self.roles.items():
            for name in (v,) if isinstance(v, str) else v:
                out.append((role, name))
        return out


@dataclass
class Pattern:
    clauses: list[Clause]
    negations: list[list[Clause]] = field(default_factory=list)

    def positive_vars(self) -> set[str]:
        bound: set[str] = set()
        for c in self.clauses:
            bound.add(c.var)
            bound.update(v for _, v in c.role_vars())
            bound.update(v.name for v in c.has.values() if isinstance(v, Var))
        return bound

    def validate(self) -> None:
        if not self.clauses:
            raise PatternError("pattern has no positive clauses")
        bound = self.positive_vars()
        for block in self.negations:
            for c in block:
                names = {c.var, *(v for _, v in c.role_vars())}
                names.update(v.name for v in c.has.values() if isinstance(v, Var))
                unbound = sorted(names - bound)
                if unbound:
                    raise PatternError(f"negation references unbound variable(s) {unbound}")


# ---------------------------------------------------------------------------


class Store:
    """In-memory ERA store with a single-writer mutation contract.

    Every successful mutation bumps :attr:`epoch`, which derived views use to
    invalidate their caches.
    """

    def __init__(self) -> None:
        self._schema: Schema | None = None
        self._instances: dict[int, Instance] = {}
        self._by_type: dict[str, set[int]] = {}
        self._keys: dict[tuple[str, Any], int] = {}
        self._referrers: dict[int, set[int]] = {}
        self._ids = itertools.count(1)
        self._views: list[DerivedView] = []
        self._derived_cache: tuple[int, dict[int, dict[str, Any]]] | None = None
        self.epoch = 0

    # -- schema --------------------------------------------------------------

    def define_schema(self, defs: SchemaDef) -> Schema:
        if self._schema is not None:
            raise SchemaError("schema already defined for this store")
        self._schema = Schema(defs)
        for name in self._schema.type_names:
            self._by_type[name] = set()
        return self._schema

    @property
    def schema(self) -> Schema:
        if self._schema is None:
            self._schema = Schema(SchemaDef())
        return self._schema

    def attach_view(self, view: DerivedView) -> None:
        self._views.append(view)
        self._derived_cache = None

    # -- reads ---------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._instances)

    def __contains__(self, iid: int) -> bool:
        return iid in self._instances

    def get(self, iid: int) -> Instance:
        try:
            return self._instances[iid]
        except KeyError:
            raise UnknownInstanceError(f"no instance with id {iid}") from None

    def ids(self, type_name: str | None = None) -> list[int]:
        """Ids of instances of ``type_name`` (including subtypes), ascending."""
        if type_name is None:
            return sorted(self._instances)
        schema = self.schema
        schema.typedef(type_name)
        out: set[int] = set()
        for name, ids in self._by_type.items():
            if schema.is_a(name, type_name):
                out |= ids
        return sorted(out)

    def instances(self, type_name: str | None = None) -> Iterator[Instance]:
        for iid in self.ids(type_name):
            yield self._instances[iid]

    def find(self, type_name: str, key_value: Any) -> Instance | None:
        scope = self.schema.key_scope(type_name)
        if scope is None:
            raise SchemaError(f"type {type_name!r} has no key attribute")
        iid = self._keys.get((scope[0], key_value))
        if iid is None:
            return None
        inst = self._instances[iid]
        return inst if self.schema.is_a(inst.type_name, type_name) else None

    def referrers(self, iid: int) -> list[int]:
        """Relation instances in which ``iid`` plays a role."""
        return sorted(self._referrers.get(iid, ()))

    def value(self, iid: int, attr: str, default: Any = None) -> Any:
        """Latest value of ``attr``, consulting rule-inferred facts first."""
        derived = self.derived().get(iid)
        if derived is not None and attr in derived:
            return derived[attr]
        return self.get(iid).get(attr, default)

    def values(self, iid: int, attr: str) -> list[Any]:
        derived = self.derived().get(iid)
        if derived is not None and attr in derived:
            return [derived[attr]]
        return list(self.get(iid).attributes.get(attr, ()))

    def derived(self) -> dict[int, dict[str, Any]]:
        if not self._views:
            return {}
        if self._derived_cache is None or self._derived_cache[0] != self.epoch:
            merged: dict[int, dict[str, Any]] = {}
            for view in self._views:
                for iid, attrs in view.derived_attributes(self).items():
                    merged.setdefault(iid, {}).update(attrs)
            self._derived_cache = (self.epoch, merged)
        return self._derived_cache[1]

    # -- writes --------------------------------------------------------------

    def insert(
        self,
        type_name: str,
        attributes: Mapping[str, Any] | None = None,
        role_fillers: Mapping[str, Iterable[int]] | None = None,
    ) -> int:
        schema = self.schema
        tdef = schema.typedef(type_name)
        attr_defs = schema.attributes(type_name)
        attrs: dict[str, list[Any]] = {}
        for name, raw in (attributes or {}).items():
            adef = attr_defs.get(name)
            if adef is None:
                raise AttributeValueError(f"type {type_name!r} has no attribute {name!r}")
            vals = raw if isinstance(raw, list) else [raw]
            attrs[name] = [check_value(adef, v) for v in vals]
            if adef.is_key and len(attrs[name]) != 1:
                raise AttributeValueError(f"key attribute {name!r} must have exactly one value")

        key_entry = None
        scope = schema.key_scope(type_name)
        if scope is not None:
            root, key_attr = scope
            if key_attr not in attrs:
                raise AttributeValueError(f"{type_name!r} requires key attribute {key_attr!r}")
            key_entry = (root, attrs[key_attr][0])
            if key_entry in self._keys:
                raise KeyCollisionError(f"{root} with {key_attr}={key_entry[1]!r} already exists")

        roles: dict[str, list[int]] = {}
        if role_fillers:
            if not tdef.is_relation:
                raise RoleError(f"entity type {type_name!r} has no roles")
            role_defs = schema.roles(type_name)
            for role, fillers in role_fillers.items():
                if role not in role_defs:
                    raise RoleError(f"relation {type_name!r} has no role {role!r}")
                ids = list(dict.fromkeys(fillers))
                for fid in ids:
                    if fid not in self._instances:
                        raise RoleError(f"role {role!r} filler {fid} does not exist")
                    ptype = self._instances[fid].type_name
                    if not schema.accepts_player(type_name, role, ptype):
                        raise RoleError(f"{ptype!r} cannot play {type_name}:{role}")
                if ids:
                    roles[role] = ids
        if tdef.is_relation and not roles and not tdef.allow_empty:
            raise RoleError(f"relation {type_name!r} needs at least one role filler")

        iid = next(self._ids)
        self._instances[iid] = Instance(iid, type_name, attrs, roles)
        self._by_type[type_name].add(iid)
        if key_entry is not None:
            self._keys[key_entry] = iid
        for fids in roles.values():
            for fid in fids:
                self._referrers.setdefault(fid, set()).add(iid)
        self._bump()
        return iid

    def set_attribute(self, iid: int, attr: str, value: Any) -> None:
        """Replace every value of ``attr`` with ``value``."""
        inst = self.get(iid)
        adef = self._attr_def(inst, attr)
        if adef.is_key:
            raise AttributeValueError(f"key attribute {attr!r} is immutable")
        inst.attributes[attr] = [check_value(adef, value)]
        self._bump()

    def delete_attribute(self, iid: int, attr: str, value: Any = None) -> None:
        """Remove ``value`` from ``attr`` (every value when ``value`` is None)."""
        inst = self.get(iid)
        adef = self._attr_def(inst, attr)
        if adef.is_key:
            raise AttributeValueError(f"key attribute {attr!r} is immutable")
        current = inst.attributes.get(attr, [])
        kept = [] if value is None else [v for v in current if v != value]
        if kept:
            inst.attributes[attr] = kept
        else:
            inst.attributes.pop(attr, None)
        self._bump()

    def delete(self, iid: int) -> None:
        inst = self.get(iid)
        if self._referrers.get(iid):
            raise ReferentialIntegrityError(
                f"instance {iid} still fills roles in {sorted(self._referrers[iid])}"
            )
        for fids in inst.roles.values():
            for fid in fids:
                self._referrers[fid].discard(iid)
        scope = self.schema.key_scope(inst.type_name)
        if scope is not None:
            self._keys.pop((scope[0], inst.get(scope[1])), None)
        self._by_type[inst.type_name].discard(iid)
        del self._instances[iid]
        self._bump()

    def _attr_def(self, inst: Instance, attr: str) -> AttributeDef:
        adef = self.schema.attributes(inst.type_name).get(attr)
        if adef is None:
            raise AttributeValueError(f"type {inst.type_name!r} has no attribute {attr!r}")
        return adef

    def _bump(self) -> None:
        self.epoch += 1

    # -- matching ------------------------------------------------------------

    def match(self, pattern: Pattern) -> list[dict[str, Any]]:
        """All variable bindings satisfying ``pattern``, over stored and inferred facts."""
        pattern.validate()
        for c in pattern.clauses + [c for b in pattern.negations for c in b]:
            if c.type is not None:
                self.schema.typedef(c.type)
        results = []
        for binding in self._solve(pattern.clauses, {}):
            if any(next(self._solve(block, dict(binding)), None) is not None for block in pattern.negations):
                continue
            results.append(binding)
        return results

    def _solve(self, clauses: list[Clause], binding: dict[str, Any]) -> Iterator[dict[str, Any]]:
        if not clauses:
            yield binding
            return
        clause, rest = clauses[0], clauses[1:]
        if clause.var in binding:
            candidates = [binding[clause.var]]
        elif clause.type is not None:
            candidates = self.ids(clause.type)
        else:
            candidates = self.ids()
        for iid in candidates:
            if iid not in self._instances:
                continue
            inst = self._instances[iid]
            if clause.type is not None and not self.schema.is_a(inst.type_name, clause.type):
                continue
            if any(self.values(iid, a) for a in clause.lacks):
                continue
            b = dict(binding)
            b[clause.var] = iid
            for b2 in self._match_attrs(inst, list(clause.has.items()), b):
                for b3 in self._match_roles(inst, clause.role_vars(), b2):
                    yield from self._solve(rest, b3)

    def _match_attrs(self, inst: Instance, preds: list[tuple[str, Any]], binding: dict[str, Any]) -> Iterator[dict[str, Any]]:
        if not preds:
            yield binding
            return
        (attr, pred), rest = preds[0], preds[1:]
        for v in self.values(inst.id, attr):
            if isinstance(pred, Var):
                if pred.name in binding:
                    if binding[pred.name] != v:
                        continue
                    yield from self._match_attrs(inst, rest, binding)
                else:
                    yield from self._match_attrs(inst, rest, {**binding, pred.name: v})
            elif callable(pred):
                if pred(v):
                    yield from self._match_attrs(inst, rest, binding)
                    return
            elif v == pred:
                yield from self._match_attrs(inst, rest, binding)
                return

    def _match_roles(self, inst: Instance, pairs: list[tuple[str, str]], binding: dict[str, Any]) -> Iterator[dict[str, Any]]:
        if not pairs:
            yield binding
            return
        (role, var), rest = pairs[0], pairs[1:]
        fillers = sorted(inst.roles.get(role, ()))
        if var in binding:
            if binding[var] in fillers:
                yield from self._match_roles(inst, rest, binding)
            return
        for fid in fillers:
            yield from self._match_roles(inst, rest, {**binding, var: fid})


def pattern_from_dict(data: Mapping[str, Any]) -> Pattern:
    """Build a :class:`Pattern` from plain JSON-like data.

    Attribute values written as ``{"var": "x"}`` become bindings; predicates
    are limited to constants in this form.
    """

    def clause(d: Mapping[str, Any]) -> Clause:
        has = {}
        for k, v in (d.get("has") or {}).items():
            has[k] = Var(v["var"]) if isinstance(v, dict) and "var" in v else v
        roles = {k: (v if isinstance(v, str) else tuple(v)) for k, v in (d.get("roles") or {}).items()}
        return Clause(d["var"], d.get("type"), has, roles, tuple(d.get("lacks") or ()))

    return Pattern(
        [clause(c) for c in data.get("clauses", [])],
        [[clause(c) for c in block] for block in data.get("negations", [])],
    )

