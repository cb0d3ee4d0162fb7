"""Compile RRA97 and UARBAC instances into equivalent ARRA instances.

The emitted authorization rules are data (rule-language ASTs), not code:
each model's formulas are fixed templates instantiated once per
translation. The per-entry disjunction the mapping algorithms describe
collapses to a single emission because the formulas already quantify over
every authority range; the differential oracle below guards that reading.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .decision import Decision
from .errors import LoadError, SchemaError
from .hierarchy import RoleGraph
from .instance import ArraInstance, AttributeDecl, Flags, OP_KINDS, RuleRecord, normalize_value
from .rra97 import Rra97Instance, can_delete_edge, can_insert_edge
from .rules import parse_rule
from .uarbac import ClassPerm, ObjectPerm, UarbacInstance, can_grant_role_to_role, can_revoke_role_from_role

# --- emitted rule templates ---------------------------------------------------

# insertEdge(au, r1, r2): r1 becomes junior to r2. Both roles must sit in
# one authority range owned via AUA; then either some range is minimal for
# both (equal immediate authority range), or one role extends a range at
# an endpoint and the insertion preserves that range's encapsulation in
# the hypothetical closure. The incomparability conjunct is stated in the
# source model's prose rather than its displayed formula; without it the
# two routes disagree on comparable pairs.
RRA97_INSERT_RULE = """
(and
  (incomparable r1 r2)
  (exists (u a1) aua
    (and (eq u au)
         (exists (s t) (attr authRange a1)
           (and (in-range r1 s t) (in-range r2 s t)))))
  (or
    (exists a2 ar
      (exists (m n) (attr authRange a2)
        (and (in-range r1 m n)
             (in-range r2 m n)
             (forall a2b ar
               (forall (m2 n2) (attr authRange a2b)
                 (implies
                   (and (forall w roles (implies (in-range w m2 n2) (in-range w m n)))
                        (exists w2 roles (and (in-range w2 m n) (not (in-range w2 m2 n2)))))
                   (and (not (in-range r1 m2 n2)) (not (in-range r2 m2 n2)))))))))
    (exists a3 ar
      (exists (x y) (attr authRange a3)
        (and (or (and (eq r1 y) (senior r2 x))
                 (and (eq r2 x) (junior r1 y)))
             (forall p roles
               (implies (in-range p x y)
                 (forall q roles
                   (implies (not (in-range q x y))
                     (and (iff (edge p q (rh*-with r1 r2)) (edge y q (rh*-with r1 r2)))
                          (iff (edge q p (rh*-with r1 r2)) (edge q x (rh*-with r1 r2)))))))))))))
"""

# deleteEdge(au, r1, r2): the direct edge (r1 junior, r2 senior) exists,
# both ends are interior to an owned range, and the edge touches no
# range endpoint anywhere.
RRA97_DELETE_RULE_MAIN = """
(and
  (edge r1 r2 rh)
  (exists (u a1) aua
    (and (eq u au)
         (exists (x y) (attr authRange a1)
           (and (in-range r1 x y) (in-range r2 x y)))))
  (forall a4 ar
    (forall (p q) (attr authRange a4)
      (and (not (eq r1 p)) (not (eq r2 q))))))
"""

# Appendix variant: closed-range membership with only the witnessing
# range's own endpoints guarded.
RRA97_DELETE_RULE_APPENDIX = """
(and
  (edge r1 r2 rh)
  (exists a1 (aroles au)
    (exists (x y) (attr authRange a1)
      (and (or (in-range r1 x y) (eq r1 x) (eq r1 y))
           (or (in-range r2 x y) (eq r2 x) (eq r2 y))
           (not (eq r1 x))
           (not (eq r2 y))))))
"""

UARBAC_ASSIGN_RULE = """
(or
  (and (in r1 (attr grantAuth au)) (in r2 (attr empowerAuth au)))
  (and (in r1 (attr grantAuth au)) (in empower (attr roleClassAuth au)))
  (and (in grant (attr roleClassAuth au)) (in r2 (attr empowerAuth au)))
  (and (in grant (attr roleClassAuth au)) (in empower (attr roleClassAuth au))))
"""

UARBAC_REVOKE_RULE = """
(or
  (and (in r1 (attr grantAuth au)) (in r2 (attr empowerAuth au)))
  (in r1 (attr adminAuth au))
  (in r2 (attr adminAuth au))
  (in admin (attr roleClassAuth au)))
"""


def map_rra97(src: Rra97Instance) -> ArraInstance:
    """Algorithmic translation of an RRA97 instance.

    authRange becomes an unordered set-valued admin-role attribute scoped
    over the closure pairs of the hierarchy, populated from can-modify;
    the insertEdge/deleteEdge rules are emitted as ASTs.
    """
    problems = src.validate()
    if problems:
        raise LoadError(problems)
    auth_range = AttributeDecl(
        name="authRange",
        target="admin_role",
        value_kind="set",
        ordered=False,
        scope_spec="rh+",
        order_spec=None,
    )
    ranges_by_ar: dict[str, set] = {ar: set() for ar in src.admin_roles.nodes}
    for ar, rng in src.can_modify:
        ranges_by_ar[ar].add(rng)
    assignments = [
        ("authRange", ar, normalize_value("set", ranges))
        for ar, ranges in sorted(ranges_by_ar.items())
    ]
    delete_src = (
        RRA97_DELETE_RULE_APPENDIX
        if src.delete_semantics == "appendix"
        else RRA97_DELETE_RULE_MAIN
    )
    rules = [
        RuleRecord("insertEdge", parse_rule(RRA97_INSERT_RULE)),
        RuleRecord("deleteEdge", parse_rule(delete_src)),
    ]
    return ArraInstance.build(
        admin_users=src.users,
        roles=src.roles,
        admin_roles=src.admin_roles,
        aua=src.aua,
        attributes=[auth_range],
        assignments=assignments,
        rules=rules,
        flags=Flags(aroles_closure=src.aroles_closure, delete_semantics=src.delete_semantics),
    )


_UARBAC_MODE_ATTR = {"grant": "grantAuth", "empower": "empowerAuth", "admin": "adminAuth"}


def map_uarbac(src: UarbacInstance) -> ArraInstance:
    """Algorithmic translation of a UARBAC RRA instance.

    Object permissions over roles become per-mode admin-user attributes
    ordered by the role hierarchy; class permissions collect into
    roleClassAuth over the declared access modes.
    """
    problems = src.validate()
    if problems:
        raise LoadError(problems)
    if not src.roles.edges:
        raise SchemaError(
            "role hierarchy is empty: the role-scoped attributes are declared ordered "
            "by it, and an ordered attribute needs a non-empty order"
        )
    decls = [
        AttributeDecl(name, "admin_user", "set", True, "roles", "rh")
        for name in ("grantAuth", "empowerAuth", "adminAuth")
    ]
    decls.append(
        AttributeDecl(
            "roleClassAuth",
            "admin_user",
            "set",
            False,
            tuple(sorted(src.modes_by_class["role"])),
            None,
        )
    )
    harvested: dict[tuple[str, str], set] = {}
    for user in src.users:
        for name in ("grantAuth", "empowerAuth", "adminAuth", "roleClassAuth"):
            harvested[(name, user)] = set()
    for user, perms in src.authorized_perms:
        for perm in perms:
            if isinstance(perm, ObjectPerm) and perm.cls == "role":
                harvested[(_UARBAC_MODE_ATTR[perm.mode], user)].add(perm.obj)
            elif isinstance(perm, ClassPerm) and perm.cls == "role":
                harvested[("roleClassAuth", user)].add(perm.mode)
    assignments = [
        (name, user, normalize_value("set", values))
        for (name, user), values in sorted(harvested.items())
    ]
    rules = [
        RuleRecord("assign", parse_rule(UARBAC_ASSIGN_RULE)),
        RuleRecord("revoke", parse_rule(UARBAC_REVOKE_RULE)),
    ]
    return ArraInstance.build(
        admin_users=src.users,
        roles=src.roles,
        admin_roles=RoleGraph.empty(),
        aua=(),
        attributes=decls,
        assignments=assignments,
        rules=rules,
        flags=Flags(),
    )


def translate(src) -> ArraInstance:
    if isinstance(src, Rra97Instance):
        return map_rra97(src)
    if isinstance(src, UarbacInstance):
        return map_uarbac(src)
    raise SchemaError(f"cannot translate {type(src).__name__}")


# --- differential oracle --------------------------------------------------------


@dataclass(frozen=True)
class Disagreement:
    op: str
    user: str
    r1: str
    r2: str
    reference: Decision
    translated: Decision

    def to_dict(self) -> dict:
        return {
            "op": self.op,
            "user": self.user,
            "r1": self.r1,
            "r2": self.r2,
            "reference": self.reference.to_dict(),
            "translated": self.translated.to_dict(),
        }


@dataclass(frozen=True)
class DecisionRow:
    op: str
    user: str
    r1: str
    r2: str
    reference: str  # "allow" | "deny" | "n/a"
    translated: str

    @property
    def agree(self) -> bool:
        return self.reference == self.translated


@dataclass(frozen=True)
class DiffReport:
    rows: tuple[DecisionRow, ...]
    disagreements: tuple[Disagreement, ...]

    @property
    def total(self) -> int:
        return len(self.rows)

    @cached_property
    def compared(self) -> int:
        return sum(1 for row in self.rows if row.reference != "n/a")

    @cached_property
    def skipped(self) -> int:
        return self.total - self.compared

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def headline(self) -> str:
        return f"{self.total} decisions, {len(self.disagreements)} disagreements"


def reference_decider(src):
    """The source model's native decision surface: op, user, r1, r2 -> Decision."""
    if isinstance(src, Rra97Instance):
        ops = {"insertEdge": can_insert_edge, "deleteEdge": can_delete_edge}
    elif isinstance(src, UarbacInstance):
        ops = {"assign": can_grant_role_to_role, "revoke": can_revoke_role_from_role}
    else:
        raise SchemaError(f"no reference semantics for {type(src).__name__}")

    def decide(op: str, user: str, r1: str, r2: str) -> Decision:
        return ops[op](src, user, r1, r2)

    return tuple(sorted(ops)), decide


def diff_decisions(src, arra: ArraInstance) -> DiffReport:
    """Exhaustively compare the source model's decisions with the translation.

    Every (user, op, ordered role pair) is enumerated. Remove-type
    operations on pairs without a direct edge are structurally
    inapplicable on both sides (the references raise EdgeNotFound) and
    are recorded as agreeing "n/a" rows rather than compared.
    """
    ops, decide = reference_decider(src)
    _check_shared_sets(src, arra)
    users = sorted(src.users)
    roles = arra.roles.sorted_nodes
    rows: list[DecisionRow] = []
    disagreements: list[Disagreement] = []
    for op in ops:
        removes = OP_KINDS.get(op) == "remove"
        for user in users:
            for r1 in roles:
                for r2 in roles:
                    if r1 == r2:
                        continue
                    if removes and not arra.roles.has_edge(r1, r2):
                        rows.append(DecisionRow(op, user, r1, r2, "n/a", "n/a"))
                        continue
                    ref = decide(op, user, r1, r2)
                    got = arra.authorize(op, user, r1, r2)
                    rows.append(
                        DecisionRow(
                            op,
                            user,
                            r1,
                            r2,
                            "allow" if ref.allowed else "deny",
                            "allow" if got.allowed else "deny",
                        )
                    )
                    if ref.allowed != got.allowed:
                        disagreements.append(Disagreement(op, user, r1, r2, ref, got))
    return DiffReport(tuple(rows), tuple(disagreements))


def _check_shared_sets(src, arra: ArraInstance) -> None:
    if frozenset(src.users) != arra.admin_users:
        raise SchemaError("user sets differ between the reference and the translation")
    if src.roles.nodes != arra.roles.nodes or src.roles.edges != arra.roles.edges:
        raise SchemaError("role hierarchies differ between the reference and the translation")
    if isinstance(src, Rra97Instance):
        if src.admin_roles.nodes != arra.admin_roles.nodes or frozenset(src.aua) != arra.aua:
            raise SchemaError("admin role structure differs between the reference and the translation")


def drop_one_value(arra: ArraInstance) -> ArraInstance:
    """Corrupt a translation for mutation checks: drop one stored set element.

    Removes the smallest element of the first nonempty set-valued
    assignment (for an RRA97 translation that is an authRange entry).
    """
    for index, (name, entity, value) in enumerate(arra.assignments):
        if isinstance(value, tuple) and value:
            trimmed = value[1:]
            new_assignments = (
                arra.assignments[:index]
                + ((name, entity, trimmed),)
                + arra.assignments[index + 1 :]
            )
            return ArraInstance(
                admin_users=arra.admin_users,
                roles=arra.roles,
                admin_roles=arra.admin_roles,
                aua=arra.aua,
                attributes=arra.attributes,
                assignments=new_assignments,
                rules=arra.rules,
                flags=arra.flags,
            )
    raise SchemaError("no nonempty set-valued assignment to corrupt")
