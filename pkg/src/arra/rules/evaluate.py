"""Finite-domain evaluation of rule ASTs with witness traces.

Evaluation expands quantifiers over the instance's finite sets, iterating
every domain in sorted order so decisions and traces are reproducible.
The evaluator returns, besides the truth value, the witnesses picked for
the existential quantifiers on the winning path; replay() re-checks a
verdict by steering those quantifiers straight to their witnesses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

from ..attributes import AttributeSchema, set_dominates
from ..decision import Decision, TraceEntry
from ..errors import BindError, EvalError, UnknownEntity
from ..hierarchy import RoleGraph
from .nodes import (
    And,
    ArDom,
    ArolesDom,
    AttrDom,
    AttrOf,
    AuaDom,
    Const,
    Dominates,
    EdgeIn,
    Eq,
    Exists,
    ForAll,
    Iff,
    Implies,
    In,
    Incomparable,
    InRange,
    Junior,
    Lit,
    LitDom,
    Node,
    Not,
    Or,
    RangeDom,
    RolesDom,
    Senior,
    Var,
    free_vars,
)


@dataclass
class EvalContext:
    """Everything the evaluator needs to know about one instance.

    Built by ArraInstance; immutable in spirit (the caches fill lazily).
    """

    graph: RoleGraph
    admin_graph: RoleGraph
    admin_users: frozenset[str]
    aua: tuple[tuple[str, str], ...]
    aroles: Mapping[str, tuple[str, ...]]
    # (name, target) -> (schema, {entity: value})
    attrs: Mapping[tuple[str, str], tuple[AttributeSchema, Mapping[str, object]]]
    kind_of: Mapping[str, str]
    _ranges: dict = field(default_factory=dict)
    _hypo: dict = field(default_factory=dict)

    @property
    def roles(self) -> tuple[str, ...]:
        return self.graph.sorted_nodes

    @property
    def admin_roles(self) -> tuple[str, ...]:
        return self.admin_graph.sorted_nodes

    def open_range(self, low: str, high: str) -> tuple[str, ...]:
        key = (low, high)
        got = self._ranges.get(key)
        if got is None:
            got = tuple(sorted(self.graph.open_range(low, high)))
            self._ranges[key] = got
        return got

    def closure_with(self, extra: tuple[str, str]) -> frozenset:
        got = self._hypo.get(extra)
        if got is None:
            got = self.graph.closure_with(extra)
            self._hypo[extra] = got
        return got

    def attr_value(self, name: str, entity) -> object:
        """Resolve an attribute by name and the entity's kind; return its value."""
        kind = self.kind_of.get(entity)
        if kind is None:
            raise UnknownEntity(f"{entity!r} is not an entity of this instance")
        pair = self.attrs.get((name, kind))
        if pair is None:
            raise EvalError(f"no attribute {name!r} for {kind} {entity!r}")
        schema, values = pair
        if entity in values:
            return values[entity]
        if schema.value_kind == "set":
            return frozenset()
        from ..errors import MissingValue

        raise MissingValue(f"{name}({entity}) has no value")

    def attr_schema(self, name: str, entity) -> AttributeSchema:
        kind = self.kind_of.get(entity)
        pair = self.attrs.get((name, kind)) if kind else None
        if pair is None:
            raise EvalError(f"no attribute {name!r} for {entity!r}")
        return pair[0]

    def unique_schema(self, name: str) -> AttributeSchema:
        found = [schema for (n, _), (schema, _v) in sorted(self.attrs.items()) if n == name]
        if not found:
            raise EvalError(f"no attribute named {name!r}")
        if len(found) > 1:
            raise EvalError(f"attribute name {name!r} is ambiguous across target kinds")
        return found[0]

    def require_role(self, value) -> str:
        if value not in self.graph.nodes:
            raise UnknownEntity(f"{value!r} is not a regular role")
        return value


Env = dict


class _Evaluator:
    def __init__(self, ctx: EvalContext):
        self.ctx = ctx

    # --- terms ---

    def term(self, node, env: Env):
        if isinstance(node, Var):
            try:
                return env[node.name]
            except KeyError:
                raise BindError(f"unbound variable {node.name!r}") from None
        if isinstance(node, Lit):
            return node.value
        if isinstance(node, AttrOf):
            entity = self.term(node.item, env)
            schema = self.ctx.attr_schema(node.attr, entity)
            if schema.value_kind != "atomic":
                raise EvalError(f"set-valued attribute {node.attr!r} used in term position")
            return self.ctx.attr_value(node.attr, entity)
        raise TypeError(f"not a term: {node!r}")

    # --- set/domain expressions ---

    def collection(self, node, env: Env):
        ctx = self.ctx
        if isinstance(node, RolesDom):
            return ctx.roles
        if isinstance(node, ArDom):
            return ctx.admin_roles
        if isinstance(node, AuaDom):
            return ctx.aua
        if isinstance(node, ArolesDom):
            user = self.term(node.item, env)
            if user not in ctx.admin_users:
                raise UnknownEntity(f"{user!r} is not an admin user")
            return ctx.aroles.get(user, ())
        if isinstance(node, AttrDom):
            entity = self.term(node.item, env)
            schema = ctx.attr_schema(node.attr, entity)
            if schema.value_kind != "set":
                raise EvalError(f"atomic attribute {node.attr!r} used as a set")
            value = ctx.attr_value(node.attr, entity)
            return tuple(sorted(value, key=_sort_key))
        if isinstance(node, RangeDom):
            low = ctx.require_role(self.term(node.low, env))
            high = ctx.require_role(self.term(node.high, env))
            return ctx.open_range(low, high)
        if isinstance(node, LitDom):
            return node.values
        raise TypeError(f"not a set expression: {node!r}")

    # --- formulas: returns (truth, witnesses-or-None) ---

    def eval(self, node, env: Env):
        ctx = self.ctx
        if isinstance(node, Const):
            return node.value, None
        if isinstance(node, And):
            witnesses: dict | None = None
            for item in node.items:
                ok, w = self.eval(item, env)
                if not ok:
                    return False, None
                witnesses = _merge(witnesses, w)
            return True, witnesses
        if isinstance(node, Or):
            for item in node.items:
                ok, w = self.eval(item, env)
                if ok:
                    return True, w
            return False, None
        if isinstance(node, Not):
            ok, _ = self.eval(node.item, env)
            return (not ok), None
        if isinstance(node, Implies):
            ok, _ = self.eval(node.left, env)
            if not ok:
                return True, None
            return self.eval(node.right, env)
        if isinstance(node, Iff):
            left, _ = self.eval(node.left, env)
            right, _ = self.eval(node.right, env)
            return left == right, None
        if isinstance(node, Exists):
            for value in self.collection(node.domain, env):
                values, saved = self._bind(node.binders, value, env)
                ok, w = self.eval(node.body, env)
                self._unbind(node.binders, saved, env)
                if ok:
                    w = _merge(w, dict(zip(node.binders, values)))
                    return True, w
            return False, None
        if isinstance(node, ForAll):
            for value in self.collection(node.domain, env):
                _, saved = self._bind(node.binders, value, env)
                ok, _ = self.eval(node.body, env)
                self._unbind(node.binders, saved, env)
                if not ok:
                    return False, None
            return True, None
        if isinstance(node, In):
            value = self.term(node.item, env)
            return value in self.collection(node.coll, env), None
        if isinstance(node, Eq):
            return self.term(node.left, env) == self.term(node.right, env), None
        if isinstance(node, Senior):
            a = ctx.require_role(self.term(node.left, env))
            b = ctx.require_role(self.term(node.right, env))
            return ctx.graph.is_senior(a, b), None
        if isinstance(node, Junior):
            a = ctx.require_role(self.term(node.left, env))
            b = ctx.require_role(self.term(node.right, env))
            return ctx.graph.is_senior(b, a), None
        if isinstance(node, Incomparable):
            a = ctx.require_role(self.term(node.left, env))
            b = ctx.require_role(self.term(node.right, env))
            return ctx.graph.incomparable(a, b), None
        if isinstance(node, InRange):
            item = ctx.require_role(self.term(node.item, env))
            low = ctx.require_role(self.term(node.low, env))
            high = ctx.require_role(self.term(node.high, env))
            g = ctx.graph
            return g.is_senior(item, low) and g.is_senior(high, item), None
        if isinstance(node, EdgeIn):
            return self._edge(node, env), None
        if isinstance(node, Dominates):
            schema = ctx.unique_schema(node.attr)
            left = self.collection(node.left, env)
            right = self.collection(node.right, env)
            return set_dominates(schema, left, right), None
        raise TypeError(f"not a formula: {node!r}")

    def _edge(self, node: EdgeIn, env: Env) -> bool:
        ctx = self.ctx
        j = ctx.require_role(self.term(node.junior, env))
        s = ctx.require_role(self.term(node.senior, env))
        kind = node.rel.kind
        if kind == "rh":
            return ctx.graph.has_edge(j, s)
        if kind == "rh+":
            return ctx.graph.is_senior(s, j)
        if kind == "rh*":
            return j == s or ctx.graph.is_senior(s, j)
        extra_j = ctx.require_role(self.term(node.rel.extra[0], env))
        extra_s = ctx.require_role(self.term(node.rel.extra[1], env))
        return (j, s) in ctx.closure_with((extra_j, extra_s))

    def _bind(self, binders: tuple[str, ...], value, env: Env):
        if len(binders) == 1:
            values = (value,)
        else:
            if not isinstance(value, tuple) or len(value) != len(binders):
                raise EvalError(
                    f"binder ({', '.join(binders)}) does not match domain element {value!r}"
                )
            values = value
        saved = tuple(env.get(name, _ABSENT) for name in binders)
        for name, v in zip(binders, values):
            env[name] = v
        return values, saved

    def _unbind(self, binders: tuple[str, ...], saved, env: Env) -> None:
        for name, prev in zip(binders, saved):
            if prev is _ABSENT:
                del env[name]
            else:
                env[name] = prev


_ABSENT = object()


def _merge(a: dict | None, b: dict | None) -> dict | None:
    if not b:
        return a
    if not a:
        return dict(b)
    merged = dict(a)
    merged.update(b)
    return merged


def _sort_key(value):
    return (isinstance(value, tuple), value)


def evaluate(rule: Node, ctx: EvalContext, bindings: Mapping[str, object]) -> Decision:
    """Evaluate a rule under parameter bindings; produce a traced Decision.

    Entity-valued bindings must name entities of the instance. When the
    rule's top level is a disjunction, the trace records which disjunct
    fired; otherwise the whole rule counts as disjunct 0.
    """
    for name, value in bindings.items():
        if isinstance(value, str) and value not in ctx.kind_of:
            raise UnknownEntity(f"binding {name}={value!r} names no entity")
    ev = _Evaluator(ctx)
    env: Env = dict(bindings)
    if isinstance(rule, Or):
        for index, item in enumerate(rule.items):
            ok, w = ev.eval(item, env)
            if ok:
                return Decision(True, (TraceEntry.make(index, w),))
        return Decision.deny()
    ok, w = ev.eval(rule, env)
    if ok:
        return Decision(True, (TraceEntry.make(0, w),))
    return Decision.deny()


def truth(rule: Node, ctx: EvalContext, bindings: Mapping[str, object]) -> bool:
    ev = _Evaluator(ctx)
    ok, _ = ev.eval(rule, dict(bindings))
    return ok


def select_roles(predicate: Node, ctx: EvalContext) -> frozenset[str]:
    """Roles satisfying a set-builder predicate with exactly one free variable."""
    names = free_vars(predicate)
    if len(names) != 1:
        raise BindError(
            f"a set builder must have exactly one free role variable, found {sorted(names)}"
        )
    (var,) = names
    ev = _Evaluator(ctx)
    chosen = []
    for role in ctx.roles:
        ok, _ = ev.eval(predicate, {var: role})
        if ok:
            chosen.append(role)
    return frozenset(chosen)


def evaluate_set_form(
    single_rule: Node,
    ctx: EvalContext,
    au: str,
    chi: frozenset[str],
    target: str,
    set_form: Node | None = None,
) -> Decision:
    """All-or-nothing decision over a role set χ.

    Every member must pass the per-member rule with (au, member, target);
    an empty χ denies. A dedicated set-form rule, when the operation has
    one, replaces the single-role rule and binds the target as `r`.
    """
    if not chi:
        return Decision.deny()
    entries: list[TraceEntry] = []
    for member in sorted(chi):
        if set_form is not None:
            decision = evaluate(set_form, ctx, {"au": au, "r1": member, "r": target})
        else:
            decision = evaluate(single_rule, ctx, {"au": au, "r1": member, "r2": target})
        if not decision.allowed:
            return Decision.deny()
        for entry in decision.trace:
            entries.append(
                TraceEntry(entry.disjunct, entry.witnesses + (("r1", member),))
            )
    return Decision(True, tuple(entries))


def replay(
    rule: Node,
    ctx: EvalContext,
    bindings: Mapping[str, object],
    entry: TraceEntry,
) -> bool:
    """Re-check one trace entry by steering existentials to their witnesses.

    The witnessed value must lie in the quantifier's domain and make the
    body true; a witness is consumed on use so shadowed binders search
    normally.
    """
    if isinstance(rule, Or):
        if not 0 <= entry.disjunct < len(rule.items):
            return False
        node = rule.items[entry.disjunct]
    else:
        if entry.disjunct != 0:
            return False
        node = rule
    ev = _Evaluator(ctx)
    return _replay(ev, node, dict(bindings), entry.witness_map())


def _replay(ev: _Evaluator, node, env: Env, witnesses: dict) -> bool:
    if isinstance(node, Exists) and all(b in witnesses for b in node.binders):
        values = tuple(witnesses[b] for b in node.binders)
        element = values[0] if len(values) == 1 else values
        if element not in tuple(ev.collection(node.domain, env)):
            return False
        remaining = {k: v for k, v in witnesses.items() if k not in node.binders}
        _, saved = ev._bind(node.binders, element, env)
        ok = _replay(ev, node.body, env, remaining)
        ev._unbind(node.binders, saved, env)
        return ok
    if isinstance(node, And):
        return all(_replay(ev, item, env, witnesses) for item in node.items)
    if isinstance(node, Or):
        return any(_replay(ev, item, env, witnesses) for item in node.items)
    ok, _ = ev.eval(node, env)
    return ok
