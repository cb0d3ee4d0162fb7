"""Complete ARRA model states: sets, hierarchies, attributes, and rules.

An ArraInstance is an immutable value. Attribute scopes may be declared
symbolically ("roles", "rh+" for the closure pairs, order "rh") and are
materialized against the current hierarchy, so a mutated instance
recomputes and revalidates them automatically.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

from .attributes import AttributeRegistry, AttributeSchema, AttributeStore
from .decision import Decision
from .errors import ArraError, SchemaError, UnknownOperation
from .hierarchy import RoleGraph
from .rules import EvalContext, evaluate, evaluate_set_form, select_roles
from .rules.nodes import (
    ArolesDom,
    AttrDom,
    AttrOf,
    AuaDom,
    Dominates,
    EdgeIn,
    Eq,
    Exists,
    ForAll,
    In,
    Incomparable,
    InRange,
    Junior,
    Lit,
    Node,
    PARAMETERS,
    RangeDom,
    Senior,
    free_vars,
)

SYMBOLIC_SCOPES = ("roles", "rh+")
SYMBOLIC_ORDERS = ("rh",)

# Which operations mutate the hierarchy, and how, when applied.
OP_KINDS = {
    "insertEdge": "add",
    "assign": "add",
    "deleteEdge": "remove",
    "revoke": "remove",
}


@dataclass(frozen=True)
class AttributeDecl:
    """Attribute declaration with possibly symbolic scope and order."""

    name: str
    target: str
    value_kind: str
    ordered: bool
    scope_spec: str | tuple = ()
    order_spec: str | tuple | None = None

    def materialize(self, roles: RoleGraph) -> AttributeSchema:
        if self.scope_spec == "roles":
            scope = frozenset(roles.nodes)
        elif self.scope_spec == "rh+":
            scope = frozenset(roles.closure_pairs)
        elif isinstance(self.scope_spec, str):
            raise SchemaError(f"{self.name}: unknown symbolic scope {self.scope_spec!r}")
        else:
            scope = frozenset(self.scope_spec)
        if self.order_spec is None:
            order: frozenset = frozenset()
        elif self.order_spec == "rh":
            order = frozenset(roles.edges)
        elif isinstance(self.order_spec, str):
            raise SchemaError(f"{self.name}: unknown symbolic order {self.order_spec!r}")
        else:
            order = frozenset(self.order_spec)
        return AttributeSchema(
            name=self.name,
            target=self.target,
            value_kind=self.value_kind,
            ordered=self.ordered,
            scope=scope,
            scope_order=order,
        )


@dataclass(frozen=True)
class RuleRecord:
    op: str
    single: Node
    set_form: Node | None = None


@dataclass(frozen=True)
class Flags:
    aroles_closure: bool = False
    delete_semantics: str = "main"


def normalize_value(value_kind: str, value):
    """Canonical stored form: atomics stay scalar, sets become sorted tuples."""
    if value_kind == "atomic":
        return value
    return tuple(sorted(value, key=lambda v: (isinstance(v, tuple), v)))


@dataclass(frozen=True)
class ArraInstance:
    admin_users: frozenset[str]
    roles: RoleGraph
    admin_roles: RoleGraph
    aua: frozenset[tuple[str, str]]
    attributes: tuple[AttributeDecl, ...]
    assignments: tuple[tuple[str, str, object], ...]  # (attr, entity, value), sorted
    rules: tuple[RuleRecord, ...]
    flags: Flags = Flags()

    # --- construction helpers -----------------------------------------------

    @classmethod
    def build(cls, admin_users, roles, admin_roles, aua, attributes, assignments, rules, flags=Flags()):
        return cls(
            admin_users=frozenset(admin_users),
            roles=roles,
            admin_roles=admin_roles,
            aua=frozenset((u, ar) for u, ar in aua),
            attributes=tuple(sorted(attributes, key=lambda d: (d.name, d.target))),
            assignments=tuple(sorted(assignments, key=lambda a: (a[0], a[1]))),
            rules=tuple(sorted(rules, key=lambda r: r.op)),
            flags=flags,
        )

    def with_roles(self, roles: RoleGraph) -> "ArraInstance":
        return replace(self, roles=roles)

    @property
    def aop(self) -> tuple[str, ...]:
        return tuple(r.op for r in self.rules)

    def rule(self, op: str) -> RuleRecord:
        for record in self.rules:
            if record.op == op:
                return record
        raise UnknownOperation(f"no rule for operation {op!r}")

    # --- derived machinery ----------------------------------------------------

    @cached_property
    def kind_of(self) -> dict[str, str]:
        kinds: dict[str, str] = {}
        for u in self.admin_users:
            kinds[u] = "admin_user"
        for ar in self.admin_roles.nodes:
            kinds[ar] = "admin_role"
        for r in self.roles.nodes:
            kinds[r] = "role"
        return kinds

    @cached_property
    def registry(self) -> AttributeRegistry:
        registry = AttributeRegistry()
        for decl in self.attributes:
            registry.define(decl.materialize(self.roles))
        return registry

    @cached_property
    def store(self) -> AttributeStore:
        store = AttributeStore(self.registry)
        for name, entity, value in self.assignments:
            kind = self.kind_of[entity]
            schema = self.registry.get(name, kind)
            store.assign(schema, entity, value)
        return store

    @cached_property
    def context(self) -> EvalContext:
        stored = self.store.items()
        attrs: dict[tuple[str, str], tuple[AttributeSchema, dict]] = {}
        for schema in self.registry:
            attrs[schema.key] = (schema, {})
        for (name, target, entity), value in stored.items():
            attrs[(name, target)][1][entity] = value
        direct: dict[str, set[str]] = {u: set() for u in self.admin_users}
        for u, ar in self.aua:
            direct.setdefault(u, set()).add(ar)
        aroles: dict[str, tuple[str, ...]] = {}
        for u, ars in direct.items():
            if self.flags.aroles_closure:
                widened = set(ars)
                for ar in ars:
                    widened |= self.admin_roles.juniors_of[ar]
                aroles[u] = tuple(sorted(widened))
            else:
                aroles[u] = tuple(sorted(ars))
        return EvalContext(
            graph=self.roles,
            admin_graph=self.admin_roles,
            admin_users=self.admin_users,
            aua=tuple(sorted(self.aua)),
            aroles=aroles,
            attrs=attrs,
            kind_of=self.kind_of,
        )

    # --- decisions -------------------------------------------------------------

    def authorize(self, op: str, au: str, r1: str, r2: str) -> Decision:
        record = self.rule(op)
        return evaluate(record.single, self.context, {"au": au, "r1": r1, "r2": r2})

    def authorize_set(self, op: str, au: str, predicate: Node, target: str) -> Decision:
        record = self.rule(op)
        chi = select_roles(predicate, self.context)
        return evaluate_set_form(
            record.single, self.context, au, chi, target, set_form=record.set_form
        )

    def select_roles(self, predicate: Node) -> frozenset[str]:
        return select_roles(predicate, self.context)

    # --- validation --------------------------------------------------------------

    def validate(self) -> list[dict]:
        problems: list[dict] = []

        def diag(where: str, code: str, message: str) -> None:
            problems.append({"where": where, "code": code, "message": message})

        groups = [
            ("admin_users", self.admin_users),
            ("admin_roles", self.admin_roles.nodes),
            ("roles", self.roles.nodes),
        ]
        for i, (name_a, set_a) in enumerate(groups):
            for name_b, set_b in groups[i + 1 :]:
                for clash in sorted(set_a & set_b):
                    diag(name_b, "schema", f"{clash!r} appears in both {name_a} and {name_b}")
        for reserved in PARAMETERS:
            if reserved in self.kind_of:
                diag("roles", "schema", f"{reserved!r} is a reserved rule parameter name")

        for i, (u, ar) in enumerate(sorted(self.aua)):
            if u not in self.admin_users:
                diag(f"aua[{i}]", "unknown-entity", f"unknown admin user {u!r}")
            if ar not in self.admin_roles.nodes:
                diag(f"aua[{i}]", "unknown-entity", f"unknown admin role {ar!r}")

        try:
            registry = self.registry
        except ArraError as exc:
            diag("attributes", exc.code, str(exc))
            return problems

        seen_assignments = set()
        for i, (name, entity, value) in enumerate(self.assignments):
            where = f"values[{i}]"
            kind = self.kind_of.get(entity)
            if kind is None:
                diag(where, "unknown-entity", f"unknown entity {entity!r}")
                continue
            if (name, kind) not in registry:
                diag(where, "unknown-attribute", f"no attribute {name!r} for {kind} entities")
                continue
            if (name, entity) in seen_assignments:
                diag(where, "schema", f"duplicate value for {name}({entity})")
                continue
            seen_assignments.add((name, entity))
            schema = registry.get(name, kind)
            if schema.value_kind == "set" and not isinstance(value, tuple):
                diag(where, "schema", f"{name} is set-valued; expected an array value")
                continue
            if schema.value_kind == "atomic" and isinstance(value, tuple):
                diag(where, "schema", f"{name} is atomic; expected a single value")
                continue
            try:
                AttributeStore(registry).assign(schema, entity, value)
            except ArraError as exc:
                diag(where, exc.code, str(exc))

        seen_ops = set()
        for i, record in enumerate(self.rules):
            where = f"rules[{i}]"
            if record.op in seen_ops:
                diag(where, "schema", f"duplicate rule for operation {record.op!r}")
            seen_ops.add(record.op)
            problems.extend(self._check_rule(record.single, where, {"au", "r1", "r2"}))
            if record.set_form is not None:
                problems.extend(
                    self._check_rule(record.set_form, f"{where}.set_form", {"au", "r1", "r"})
                )
        return problems

    def _check_rule(self, node: Node, where: str, allowed_params: set[str]) -> list[dict]:
        problems: list[dict] = []
        loose = free_vars(node) - allowed_params
        if loose:
            problems.append(
                {
                    "where": where,
                    "code": "bind",
                    "message": f"rule uses parameters {sorted(loose)} outside {sorted(allowed_params)}",
                }
            )
        known_atoms = self._known_atoms
        for kind, payload in _walk_rule(node):
            if kind == "attr" and not self.registry.for_name(payload):
                problems.append(
                    {"where": where, "code": "unknown-attribute", "message": f"unknown attribute {payload!r}"}
                )
            elif kind == "lit" and payload not in known_atoms:
                problems.append(
                    {
                        "where": where,
                        "code": "bind",
                        "message": f"token {payload!r} is neither a bound variable nor a known value",
                    }
                )
            elif kind == "binders":
                domain, binders = payload
                expected = self._binder_arity(domain)
                if expected is not None and expected != len(binders):
                    problems.append(
                        {
                            "where": where,
                            "code": "bind",
                            "message": f"domain needs {expected} binder(s), got {len(binders)}",
                        }
                    )
        return problems

    @cached_property
    def _known_atoms(self) -> frozenset[str]:
        atoms: set[str] = set(self.kind_of)
        for decl in self.attributes:
            if isinstance(decl.scope_spec, tuple):
                for v in decl.scope_spec:
                    if isinstance(v, str):
                        atoms.add(v)
        return frozenset(atoms)

    def _binder_arity(self, domain) -> int | None:
        if isinstance(domain, AuaDom):
            return 2
        if isinstance(domain, AttrDom):
            schemas = self.registry.for_name(domain.attr)
            pairness = {s.pair_scoped for s in schemas}
            if len(pairness) == 1:
                return 2 if pairness.pop() else 1
            return None
        if isinstance(domain, (ArolesDom, RangeDom)):
            return 1
        return 1


def _walk_rule(node):
    """Yield ("attr", name), ("lit", value), ("binders", (domain, names)) hits.

    Literal hits are only reported from term positions; values inside a
    (lit ...) domain define their own finite universe and stay unchecked.
    """
    from .rules.nodes import And, Const, Iff, Implies, Not, Or, Var

    stack = [(node, False)]
    while stack:
        item, term_position = stack.pop()
        if isinstance(item, (Const, Var)) or item is None:
            continue
        if isinstance(item, Lit):
            if term_position:
                yield ("lit", item.value)
        elif isinstance(item, AttrOf):
            yield ("attr", item.attr)
            stack.append((item.item, True))
        elif isinstance(item, AttrDom):
            yield ("attr", item.attr)
            stack.append((item.item, True))
        elif isinstance(item, ArolesDom):
            stack.append((item.item, True))
        elif isinstance(item, RangeDom):
            stack.append((item.low, True))
            stack.append((item.high, True))
        elif isinstance(item, Dominates):
            yield ("attr", item.attr)
            stack.append((item.left, False))
            stack.append((item.right, False))
        elif isinstance(item, (Exists, ForAll)):
            yield ("binders", (item.domain, item.binders))
            stack.append((item.domain, False))
            stack.append((item.body, False))
        elif isinstance(item, In):
            stack.append((item.item, True))
            stack.append((item.coll, False))
        elif isinstance(item, (Eq, Senior, Junior, Incomparable)):
            stack.append((item.left, True))
            stack.append((item.right, True))
        elif isinstance(item, InRange):
            stack.append((item.item, True))
            stack.append((item.low, True))
            stack.append((item.high, True))
        elif isinstance(item, EdgeIn):
            stack.append((item.junior, True))
            stack.append((item.senior, True))
            if item.rel.extra is not None:
                stack.append((item.rel.extra[0], True))
                stack.append((item.rel.extra[1], True))
        elif isinstance(item, (And, Or)):
            for sub in item.items:
                stack.append((sub, False))
        elif isinstance(item, Not):
            stack.append((item.item, False))
        elif isinstance(item, (Implies, Iff)):
            stack.append((item.left, False))
            stack.append((item.right, False))
