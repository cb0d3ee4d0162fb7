"""RRA97 reference semantics: encapsulated ranges and can-modify.

This module decides edge insertions and deletions directly from the
can-modify relation, independent of the rule engine, and serves as the
oracle side of the differential tests against translated instances.

An authority range (x, y) is the set of roles strictly between x and y.
It is encapsulated when interior roles relate to outside roles only
through the endpoints: for every interior p and outside q,
q > p iff q >= y, and q < p iff q <= x. (The endpoint comparisons are
reflexive; with strict ones no nonempty range could qualify, since x
itself sits below every interior role.)
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .decision import Decision
from .errors import AmbiguousRange, EdgeNotFound, SchemaError, UnknownEntity
from .hierarchy import RoleGraph

Range = tuple[str, str]

DELETE_SEMANTICS = ("main", "appendix")


@dataclass(frozen=True)
class Rra97Instance:
    users: frozenset[str]
    roles: RoleGraph
    admin_roles: RoleGraph
    aua: frozenset[tuple[str, str]]
    can_modify: frozenset[tuple[str, Range]]
    aroles_closure: bool = False
    delete_semantics: str = "main"

    def __post_init__(self) -> None:
        if self.delete_semantics not in DELETE_SEMANTICS:
            raise SchemaError(f"unknown delete semantics {self.delete_semantics!r}")

    # --- derived views ------------------------------------------------------

    @cached_property
    def sorted_can_modify(self) -> tuple[tuple[str, Range], ...]:
        return tuple(sorted(self.can_modify))

    @cached_property
    def all_ranges(self) -> tuple[Range, ...]:
        return tuple(sorted({rng for _, rng in self.can_modify}))

    def ranges_of(self, admin_role: str) -> tuple[Range, ...]:
        return tuple(sorted(rng for ar, rng in self.can_modify if ar == admin_role))

    def aroles(self, user: str) -> tuple[str, ...]:
        """Admin roles of a user; widened down the ARH when the flag says so."""
        if user not in self.users:
            raise UnknownEntity(f"unknown user {user!r}")
        direct = {ar for u, ar in self.aua if u == user}
        if not self.aroles_closure:
            return tuple(sorted(direct))
        widened = set(direct)
        for ar in direct:
            widened |= self.admin_roles.juniors_of[ar]
        return tuple(sorted(widened))

    def user_ranges(self, user: str) -> tuple[Range, ...]:
        out = {rng for ar in self.aroles(user) for rng in self.ranges_of(ar)}
        return tuple(sorted(out))

    # --- validation ---------------------------------------------------------

    def validate(self) -> list[dict]:
        """Full instance validation; returns positioned diagnostics."""
        problems: list[dict] = []
        for i, (u, ar) in enumerate(sorted(self.aua)):
            if u not in self.users:
                problems.append(_diag(f"aua[{i}]", "unknown-entity", f"unknown user {u!r}"))
            if ar not in self.admin_roles.nodes:
                problems.append(_diag(f"aua[{i}]", "unknown-entity", f"unknown admin role {ar!r}"))
        for i, (ar, (x, y)) in enumerate(self.sorted_can_modify):
            where = f"can_modify[{i}]"
            if ar not in self.admin_roles.nodes:
                problems.append(_diag(where, "unknown-entity", f"unknown admin role {ar!r}"))
            missing = [r for r in (x, y) if r not in self.roles.nodes]
            if missing:
                problems.append(_diag(where, "unknown-entity", f"unknown role {missing[0]!r}"))
                continue
            if not self.roles.is_senior(y, x):
                problems.append(
                    _diag(where, "schema", f"range ({x}, {y}): {x!r} is not strictly junior to {y!r}")
                )
            elif not is_encapsulated(self, (x, y)):
                problems.append(
                    _diag(where, "schema", f"range ({x}, {y}) is not encapsulated")
                )
        return problems


def _diag(where: str, code: str, message: str) -> dict:
    return {"where": where, "code": code, "message": message}


# --- encapsulation ----------------------------------------------------------


def range_encapsulated(graph: RoleGraph, x: str, y: str, relation: frozenset | None = None) -> bool:
    """Evaluate the encapsulation biconditionals for (x, y).

    With `relation` (a reflexive-transitive (junior, senior) pair set,
    possibly cyclic) the test runs against that hypothetical relation;
    otherwise against the graph's own closure. The interior is always
    taken from the current graph.
    """
    interior = graph.open_range(x, y)
    if relation is None:
        def le(a: str, b: str) -> bool:
            return a == b or graph.is_senior(b, a)
    else:
        def le(a: str, b: str) -> bool:
            return (a, b) in relation
    outside = sorted(graph.nodes - interior)
    for p in sorted(interior):
        for q in outside:
            if le(p, q) != le(y, q):  # q senior to p  <->  q senior-or-equal to y
                return False
            if le(q, p) != le(q, x):  # q junior to p  <->  q junior-or-equal to x
                return False
    return True


def is_encapsulated(inst: Rra97Instance, rng: Range) -> bool:
    x, y = rng
    g = inst.roles
    if x not in g.nodes or y not in g.nodes:
        raise UnknownEntity(f"unknown role in range ({x}, {y})")
    if x == y or not g.is_senior(y, x):
        raise SchemaError(f"({x}, {y}) is not a range: {x!r} must be strictly junior to {y!r}")
    return range_encapsulated(g, x, y)


# --- immediate authority ranges ----------------------------------------------


def immediate_authority_range(inst: Rra97Instance, role: str) -> Range | None:
    """The minimal authority range whose interior contains `role`.

    None when no range contains it; AmbiguousRange when several minimal
    enclosing ranges exist (RRA97 presumes nesting, so that is reported
    rather than resolved by fiat).
    """
    g = inst.roles
    if role not in g.nodes:
        raise UnknownEntity(f"unknown role {role!r}")
    enclosing = [rng for rng in inst.all_ranges if role in g.open_range(*rng)]
    if not enclosing:
        return None
    candidates = []
    for rng in enclosing:
        interior = g.open_range(*rng)
        nested_hit = any(
            other != rng
            and g.open_range(*other) < interior
            and role in g.open_range(*other)
            for other in inst.all_ranges
        )
        if not nested_hit:
            candidates.append(rng)
    if len(candidates) > 1:
        raise AmbiguousRange(
            f"{role!r} has {len(candidates)} minimal enclosing ranges: {sorted(candidates)}"
        )
    return candidates[0]


# --- operations ---------------------------------------------------------------


def can_insert_edge(inst: Rra97Instance, user: str, a: str, b: str) -> Decision:
    """Decide insertEdge(user, a, b); a becomes junior to b.

    Allowed when a and b are incomparable, both lie inside one authority
    range owned by an admin role of the user, and either both have the
    same immediate authority range or the endpoint-extension condition
    preserves encapsulation under the hypothetical closure.
    """
    g = inst.roles
    if user not in inst.users:
        raise UnknownEntity(f"unknown user {user!r}")
    if a not in g.nodes or b not in g.nodes:
        missing = a if a not in g.nodes else b
        raise UnknownEntity(f"unknown role {missing!r}")
    if a == b or not g.incomparable(a, b):
        return Decision.deny()
    covering = None
    for rng in inst.user_ranges(user):
        interior = g.open_range(*rng)
        if a in interior and b in interior:
            covering = rng
            break
    if covering is None:
        return Decision.deny()
    immediate_a = immediate_authority_range(inst, a)
    immediate_b = immediate_authority_range(inst, b)
    if immediate_a is not None and immediate_a == immediate_b:
        return Decision.allow(0, {"owned": covering, "immediate": immediate_a})
    hypothetical = g.closure_with((a, b))
    for x, y in inst.all_ranges:
        endpoint_case = (a == y and g.is_senior(b, x)) or (b == x and g.is_senior(y, a))
        if endpoint_case and range_encapsulated(g, x, y, hypothetical):
            return Decision.allow(1, {"owned": covering, "range": (x, y)})
    return Decision.deny()


def can_delete_edge(inst: Rra97Instance, user: str, junior: str, senior: str) -> Decision:
    """Decide deleteEdge(user, junior, senior) for an existing direct edge.

    Main-text semantics: both endpoints of the edge lie strictly inside
    an owned range, and the edge touches no range endpoint anywhere (the
    junior is no range's bottom, the senior no range's top). The appendix
    variant instead admits the closed range of an owned (x, y) and only
    guards that range's own endpoints.
    """
    g = inst.roles
    if user not in inst.users:
        raise UnknownEntity(f"unknown user {user!r}")
    if junior not in g.nodes or senior not in g.nodes:
        raise UnknownEntity("unknown role in edge")
    if not g.has_edge(junior, senior):
        raise EdgeNotFound(f"({junior}, {senior}) is not a direct edge")

    if inst.delete_semantics == "appendix":
        for ar in inst.aroles(user):
            for x, y in inst.ranges_of(ar):
                closed = g.open_range(x, y) | {x, y}
                if (
                    junior in closed
                    and senior in closed
                    and junior != x
                    and senior != y
                ):
                    return Decision.allow(0, {"ar": ar, "range": (x, y)})
        return Decision.deny()

    covering = None
    for rng in inst.user_ranges(user):
        interior = g.open_range(*rng)
        if junior in interior and senior in interior:
            covering = rng
            break
    if covering is None:
        return Decision.deny()
    for x, y in inst.all_ranges:
        if junior == x or senior == y:
            return Decision.deny()
    return Decision.allow(0, {"owned": covering})
