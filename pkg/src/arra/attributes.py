"""Attribute schemas, value stores, and ordered-scope dominance.

An attribute maps entities of one target kind (admin users, admin roles,
or regular roles) to atomic values or finite subsets of a declared scope.
Scopes may be plain tokens or role pairs (for relation-valued scopes such
as the transitive closure of the role hierarchy). Ordered scopes carry a
partial order from which dominance between set values is inferred.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from .errors import (
    DuplicateAttribute,
    MissingValue,
    NotOrdered,
    SchemaError,
    ScopeError,
    UnknownAttribute,
)

TARGETS = ("admin_user", "admin_role", "role")
VALUE_KINDS = ("atomic", "set")

# A scope element is a bare token or a (junior, senior) role pair.
ScopeElement = str | tuple[str, str]


@dataclass(frozen=True)
class AttributeSchema:
    """Declared metadata for one attribute function."""

    name: str
    target: str
    value_kind: str
    ordered: bool
    scope: frozenset[ScopeElement]
    scope_order: frozenset[tuple[ScopeElement, ScopeElement]] = frozenset()

    def __post_init__(self) -> None:
        if self.target not in TARGETS:
            raise SchemaError(f"{self.name}: unknown target {self.target!r}")
        if self.value_kind not in VALUE_KINDS:
            raise SchemaError(f"{self.name}: unknown value kind {self.value_kind!r}")
        if self.ordered:
            if not self.scope_order:
                raise SchemaError(f"{self.name}: ordered attribute needs a non-empty scope order")
        elif self.scope_order:
            raise SchemaError(f"{self.name}: unordered attribute must have an empty scope order")
        for lo, hi in self.scope_order:
            if lo not in self.scope or hi not in self.scope:
                raise SchemaError(f"{self.name}: scope order references values outside the scope")
            if lo == hi:
                raise SchemaError(f"{self.name}: scope order contains a self-pair")
        if self.ordered:
            self._check_order_acyclic()

    def _check_order_acyclic(self) -> None:
        succ: dict[ScopeElement, list[ScopeElement]] = {}
        for lo, hi in self.scope_order:
            succ.setdefault(lo, []).append(hi)
        for start in succ:
            seen: set[ScopeElement] = set()
            stack = list(succ[start])
            while stack:
                v = stack.pop()
                if v == start:
                    raise SchemaError(f"{self.name}: scope order is cyclic")
                if v not in seen:
                    seen.add(v)
                    stack.extend(succ.get(v, ()))

    @property
    def key(self) -> tuple[str, str]:
        return (self.name, self.target)

    @cached_property
    def pair_scoped(self) -> bool:
        return any(isinstance(v, tuple) for v in self.scope)

    @cached_property
    def order_closure(self) -> frozenset[tuple[ScopeElement, ScopeElement]]:
        """Reflexive-transitive closure of scope_order over the scope."""
        succ: dict[ScopeElement, set[ScopeElement]] = {v: set() for v in self.scope}
        for lo, hi in self.scope_order:
            succ[lo].add(hi)
        pairs: set[tuple[ScopeElement, ScopeElement]] = set()
        for v in self.scope:
            pairs.add((v, v))
            seen: set[ScopeElement] = set()
            stack = list(succ[v])
            while stack:
                w = stack.pop()
                if w not in seen:
                    seen.add(w)
                    stack.extend(succ[w])
            pairs.update((v, w) for w in seen)
        return frozenset(pairs)

    def check_value(self, value) -> None:
        """Raise ScopeError unless `value` fits this schema."""
        if self.value_kind == "atomic":
            if value not in self.scope:
                raise ScopeError(f"{self.name}: {value!r} is outside the scope")
        else:
            for v in value:
                if v not in self.scope:
                    raise ScopeError(f"{self.name}: {v!r} is outside the scope")


def set_dominates(
    schema: AttributeSchema,
    xs: Iterable[ScopeElement],
    ys: Iterable[ScopeElement],
) -> bool:
    """True iff every element of xs dominates every element of ys.

    Dominance of x over y means (y, x) lies in the reflexive-transitive
    closure of the scope order (pairs stored junior-first, like the
    hierarchies). The empty ys is dominated vacuously.
    """
    if not schema.ordered:
        raise NotOrdered(f"{schema.name} has no scope order")
    xs = frozenset(xs)
    ys = frozenset(ys)
    for v in xs | ys:
        if v not in schema.scope:
            raise ScopeError(f"{schema.name}: {v!r} is outside the scope")
    closure = schema.order_closure
    return all((y, x) in closure for x in xs for y in ys)


class AttributeRegistry:
    """Registered schemas, keyed by (name, target kind).

    The same name may be declared for different target kinds (the entity's
    kind disambiguates at lookup time); an exact duplicate is an error.
    """

    def __init__(self, schemas: Iterable[AttributeSchema] = ()):
        self._by_key: dict[tuple[str, str], AttributeSchema] = {}
        for schema in schemas:
            self.define(schema)

    def define(self, schema: AttributeSchema) -> AttributeSchema:
        if schema.key in self._by_key:
            raise DuplicateAttribute(f"{schema.name} already defined for {schema.target}")
        self._by_key[schema.key] = schema
        return schema

    def get(self, name: str, target: str) -> AttributeSchema:
        try:
            return self._by_key[(name, target)]
        except KeyError:
            raise UnknownAttribute(f"no attribute {name!r} for target {target}") from None

    def for_name(self, name: str) -> tuple[AttributeSchema, ...]:
        return tuple(s for k, s in sorted(self._by_key.items()) if k[0] == name)

    def __iter__(self):
        return iter(s for _, s in sorted(self._by_key.items()))

    def __contains__(self, key: tuple[str, str]) -> bool:
        return key in self._by_key


class AttributeStore:
    """Entity-to-value assignments for registered attributes.

    Unassigned set-valued attributes read as the empty set; unassigned
    atomic attributes raise MissingValue at read time.
    """

    def __init__(self, registry: AttributeRegistry):
        self._registry = registry
        self._values: dict[tuple[str, str, str], object] = {}

    def assign(self, schema: AttributeSchema, entity: str, value) -> None:
        if schema.key not in self._registry:
            raise UnknownAttribute(f"{schema.name} is not registered")
        if schema.value_kind == "set":
            value = frozenset(value)
        schema.check_value(value)
        self._values[(schema.name, schema.target, entity)] = value

    def get(self, schema: AttributeSchema, entity: str):
        key = (schema.name, schema.target, entity)
        if key in self._values:
            return self._values[key]
        if schema.value_kind == "set":
            return frozenset()
        raise MissingValue(f"{schema.name}({entity}) has no value")

    def items(self) -> Mapping[tuple[str, str, str], object]:
        return dict(self._values)
