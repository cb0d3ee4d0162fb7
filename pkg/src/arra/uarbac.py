"""UARBAC's role-role assignment permission calculus.

Decisions come straight from each user's authorized permission set:
object permissions name one role, class permissions cover every role.
Granting r1 to r2 needs a grant-side permission for r1 and an
empower-side permission for r2; revoking additionally honors admin
permissions on either role or on the whole class.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

from .decision import Decision
from .errors import EdgeNotFound, UnknownEntity
from .hierarchy import RoleGraph

ROLE_CLASS = "role"
KNOWN_CLASSES = ("role", "user")


@dataclass(frozen=True)
class ObjectPerm:
    cls: str
    obj: str
    mode: str


@dataclass(frozen=True)
class ClassPerm:
    cls: str
    mode: str


Permission = ObjectPerm | ClassPerm


@dataclass(frozen=True)
class UarbacInstance:
    users: frozenset[str]
    roles: RoleGraph
    access_modes: tuple[tuple[str, frozenset[str]], ...]  # (class, modes), sorted
    authorized_perms: tuple[tuple[str, frozenset[Permission]], ...]  # (user, perms), sorted

    @classmethod
    def build(
        cls,
        users,
        roles: RoleGraph,
        access_modes: Mapping[str, frozenset[str]],
        authorized_perms: Mapping[str, frozenset[Permission]],
    ) -> "UarbacInstance":
        return cls(
            frozenset(users),
            roles,
            tuple(sorted((c, frozenset(m)) for c, m in access_modes.items())),
            tuple(sorted((u, frozenset(p)) for u, p in authorized_perms.items())),
        )

    @cached_property
    def classes(self) -> frozenset[str]:
        return frozenset(c for c, _ in self.access_modes)

    @cached_property
    def modes_by_class(self) -> dict[str, frozenset[str]]:
        return dict(self.access_modes)

    @cached_property
    def perms_by_user(self) -> dict[str, frozenset[Permission]]:
        return dict(self.authorized_perms)

    def validate(self) -> list[dict]:
        problems: list[dict] = []
        if ROLE_CLASS not in self.classes:
            problems.append(
                {"where": "access_modes", "code": "schema", "message": "class 'role' must be declared"}
            )
        for c, _modes in self.access_modes:
            if c not in KNOWN_CLASSES:
                problems.append(
                    {"where": f"access_modes.{c}", "code": "schema", "message": f"unsupported class {c!r}"}
                )
        for user, perms in self.authorized_perms:
            where = f"authorized_perms.{user}"
            if user not in self.users:
                problems.append({"where": where, "code": "unknown-entity", "message": f"unknown user {user!r}"})
            for p in sorted(perms, key=repr):
                if p.cls not in self.classes:
                    problems.append(
                        {"where": where, "code": "schema", "message": f"undeclared class {p.cls!r}"}
                    )
                    continue
                if p.mode not in self.modes_by_class[p.cls]:
                    problems.append(
                        {"where": where, "code": "schema", "message": f"{p.mode!r} is not an access mode of {p.cls!r}"}
                    )
                if isinstance(p, ObjectPerm):
                    universe = self.roles.nodes if p.cls == ROLE_CLASS else self.users
                    if p.obj not in universe:
                        problems.append(
                            {"where": where, "code": "unknown-entity", "message": f"unknown {p.cls} object {p.obj!r}"}
                        )
        return problems


def has_perm(inst: UarbacInstance, user: str, perm: Permission) -> bool:
    """Exact membership; class/object implication lives in the rules, not here."""
    if user not in inst.users:
        raise UnknownEntity(f"unknown user {user!r}")
    return perm in inst.perms_by_user.get(user, frozenset())


def _obj(inst: UarbacInstance, user: str, role: str, mode: str) -> bool:
    return has_perm(inst, user, ObjectPerm(ROLE_CLASS, role, mode))


def _cls(inst: UarbacInstance, user: str, mode: str) -> bool:
    return has_perm(inst, user, ClassPerm(ROLE_CLASS, mode))


def _require_roles(inst: UarbacInstance, *names: str) -> None:
    for name in names:
        if name not in inst.roles.nodes:
            raise UnknownEntity(f"unknown role {name!r}")


def can_grant_role_to_role(inst: UarbacInstance, user: str, r1: str, r2: str) -> Decision:
    """Grant r1 to r2: a grant permission covering r1 and an empower
    permission covering r2, each object- or class-level.

    Trace disjunct indices follow the translated assign formula's order:
    obj/obj, obj/class, class/obj, class/class.
    """
    _require_roles(inst, r1, r2)
    if user not in inst.users:
        raise UnknownEntity(f"unknown user {user!r}")
    if r1 == r2:
        return Decision.deny()
    og, cg = _obj(inst, user, r1, "grant"), _cls(inst, user, "grant")
    oe, ce = _obj(inst, user, r2, "empower"), _cls(inst, user, "empower")
    for index, hit in enumerate((og and oe, og and ce, cg and oe, cg and ce)):
        if hit:
            return Decision.allow(index)
    return Decision.deny()


def can_revoke_role_from_role(inst: UarbacInstance, user: str, r1: str, r2: str) -> Decision:
    """Revoke r1 from r2, where the direct edge (r1 junior, r2 senior) exists.

    Grant on the revoked junior plus empower on the holder, or admin on
    either role, or class admin.
    """
    _require_roles(inst, r1, r2)
    if user not in inst.users:
        raise UnknownEntity(f"unknown user {user!r}")
    if not inst.roles.has_edge(r1, r2):
        raise EdgeNotFound(f"({r1}, {r2}) is not a direct edge")
    clauses = (
        _obj(inst, user, r1, "grant") and _obj(inst, user, r2, "empower"),
        _obj(inst, user, r1, "admin"),
        _obj(inst, user, r2, "admin"),
        _cls(inst, user, "admin"),
    )
    for index, hit in enumerate(clauses):
        if hit:
            return Decision.allow(index)
    return Decision.deny()
