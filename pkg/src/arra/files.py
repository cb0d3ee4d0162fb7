"""Instance files: strict JSON load/save with positioned diagnostics.

One document describes one model state. Top-level keys are fixed per
model and unknown keys are rejected, so fixture typos surface instead of
silently vanishing. Loading performs full validation; a failed load
raises LoadError carrying every diagnostic found.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ArraError, LoadError, ParseError
from .hierarchy import RoleGraph
from .instance import ArraInstance, AttributeDecl, Flags, RuleRecord, normalize_value
from .rra97 import Rra97Instance
from .rules import parse_rule, render
from .uarbac import ClassPerm, ObjectPerm, UarbacInstance

MODELS = ("arra", "rra97", "uarbac")

_COMMON_KEYS = {"model", "roles", "rh", "admin_users", "admin_roles", "arh", "aua"}
_KEYS = {
    "rra97": _COMMON_KEYS | {"can_modify", "flags"},
    "uarbac": _COMMON_KEYS | {"access_modes", "authorized_perms"},
    "arra": _COMMON_KEYS | {"attributes", "values", "rules", "flags"},
}
_REQUIRED = {
    "rra97": {"model", "roles", "rh", "admin_users", "can_modify"},
    "uarbac": {"model", "roles", "rh", "admin_users", "access_modes", "authorized_perms"},
    "arra": {"model", "roles", "rh", "admin_users", "rules"},
}


class _Problems:
    def __init__(self) -> None:
        self.items: list[dict] = []

    def add(self, where: str, code: str, message: str) -> None:
        self.items.append({"where": where, "code": code, "message": message})

    def barf_if_any(self) -> None:
        if self.items:
            raise LoadError(self.items)


def load_instance(path: str | Path):
    """Load and fully validate an instance file; returns the model object."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise LoadError([{"where": str(path), "code": "io", "message": str(exc)}]) from exc
    return loads_instance(text)


def loads_instance(text: str):
    problems = _Problems()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        problems.add(f"line {exc.lineno}", "parse", exc.msg)
        problems.barf_if_any()
    if not isinstance(doc, dict):
        problems.add("$", "parse", "instance document must be a JSON object")
        problems.barf_if_any()
    model = doc.get("model")
    if model not in MODELS:
        problems.add("model", "schema", f"model must be one of {list(MODELS)}, got {model!r}")
        problems.barf_if_any()

    allowed, required = _KEYS[model], _REQUIRED[model]
    for key in sorted(set(doc) - allowed):
        problems.add(key, "schema", f"unknown key {key!r} for model {model!r}")
    for key in sorted(required - set(doc)):
        problems.add(key, "schema", f"missing required key {key!r}")
    problems.barf_if_any()

    roles_graph = _graph(doc, "roles", "rh", problems)
    admin_graph = _graph(doc, "admin_roles", "arh", problems, optional=True)
    admin_users = _str_list(doc.get("admin_users", []), "admin_users", problems)
    aua = _pair_list(doc.get("aua", []), "aua", problems)
    problems.barf_if_any()

    if model == "rra97":
        inst = _load_rra97(doc, roles_graph, admin_graph, admin_users, aua, problems)
    elif model == "uarbac":
        if admin_graph.nodes or aua:
            problems.add("admin_roles", "schema", "uarbac instances have no admin roles")
        inst = _load_uarbac(doc, roles_graph, admin_users, problems)
    else:
        inst = _load_arra(doc, roles_graph, admin_graph, admin_users, aua, problems)
    problems.barf_if_any()

    for item in inst.validate():
        problems.items.append(item)
    problems.barf_if_any()
    return inst


# --- field readers --------------------------------------------------------------


def _str_list(value, where: str, problems: _Problems) -> list[str]:
    if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
        problems.add(where, "schema", "expected an array of strings")
        return []
    seen = set()
    for v in value:
        if v in seen:
            problems.add(where, "schema", f"duplicate entry {v!r}")
        seen.add(v)
    return value


def _pair_list(value, where: str, problems: _Problems) -> list[tuple[str, str]]:
    out: list[tuple[str, str]] = []
    if not isinstance(value, list):
        problems.add(where, "schema", "expected an array of pairs")
        return out
    for i, pair in enumerate(value):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or any(not isinstance(v, str) for v in pair)
        ):
            problems.add(f"{where}[{i}]", "schema", "expected a [string, string] pair")
            continue
        out.append((pair[0], pair[1]))
    return out


def _graph(doc, nodes_key: str, edges_key: str, problems: _Problems, optional: bool = False):
    nodes = doc.get(nodes_key, [] if optional else None)
    edges = doc.get(edges_key, [])
    if nodes is None:
        problems.add(nodes_key, "schema", "missing role list")
        return RoleGraph.empty()
    node_list = _str_list(nodes, nodes_key, problems)
    edge_list = _pair_list(edges, edges_key, problems)
    try:
        return RoleGraph.build(node_list, edge_list)
    except ArraError as exc:
        problems.add(edges_key, exc.code, str(exc))
        return RoleGraph.empty()


def _flags(doc, problems: _Problems) -> Flags:
    raw = doc.get("flags", {})
    if not isinstance(raw, dict):
        problems.add("flags", "schema", "flags must be an object")
        return Flags()
    for key in sorted(set(raw) - {"aroles_closure", "delete_semantics"}):
        problems.add(f"flags.{key}", "schema", f"unknown flag {key!r}")
    closure = raw.get("aroles_closure", False)
    semantics = raw.get("delete_semantics", "main")
    if not isinstance(closure, bool):
        problems.add("flags.aroles_closure", "schema", "expected a boolean")
        closure = False
    if semantics not in ("main", "appendix"):
        problems.add("flags.delete_semantics", "schema", "expected 'main' or 'appendix'")
        semantics = "main"
    return Flags(aroles_closure=closure, delete_semantics=semantics)


# --- per-model loaders ------------------------------------------------------------


def _load_rra97(doc, roles, admin_roles, admin_users, aua, problems) -> Rra97Instance:
    can_modify: set[tuple[str, tuple[str, str]]] = set()
    raw = doc.get("can_modify")
    if not isinstance(raw, list):
        problems.add("can_modify", "schema", "expected an array of {admin_role, range} records")
        raw = []
    for i, rec in enumerate(raw):
        where = f"can_modify[{i}]"
        if not isinstance(rec, dict) or set(rec) != {"admin_role", "range"}:
            problems.add(where, "schema", "expected exactly the keys admin_role and range")
            continue
        rng = rec["range"]
        if (
            not isinstance(rec["admin_role"], str)
            or not isinstance(rng, list)
            or len(rng) != 2
            or any(not isinstance(v, str) for v in rng)
        ):
            problems.add(where, "schema", "admin_role must be a string and range a [x, y] pair")
            continue
        can_modify.add((rec["admin_role"], (rng[0], rng[1])))
    flags = _flags(doc, problems)
    inst = Rra97Instance(
        users=frozenset(admin_users),
        roles=roles,
        admin_roles=admin_roles,
        aua=frozenset(aua),
        can_modify=frozenset(can_modify),
        aroles_closure=flags.aroles_closure,
        delete_semantics=flags.delete_semantics,
    )
    return inst


def _load_uarbac(doc, roles, admin_users, problems) -> UarbacInstance:
    raw_modes = doc.get("access_modes")
    access_modes: dict[str, frozenset[str]] = {}
    if not isinstance(raw_modes, dict):
        problems.add("access_modes", "schema", "expected an object mapping class to modes")
    else:
        for cls_name, modes in sorted(raw_modes.items()):
            access_modes[cls_name] = frozenset(
                _str_list(modes, f"access_modes.{cls_name}", problems)
            )
    raw_perms = doc.get("authorized_perms")
    perms: dict[str, set] = {}
    if not isinstance(raw_perms, dict):
        problems.add("authorized_perms", "schema", "expected an object keyed by user")
        raw_perms = {}
    for user, plist in sorted(raw_perms.items()):
        where = f"authorized_perms.{user}"
        perms[user] = set()
        if not isinstance(plist, list):
            problems.add(where, "schema", "expected an array of permissions")
            continue
        for i, p in enumerate(plist):
            if not isinstance(p, list) or any(not isinstance(v, str) for v in p):
                problems.add(f"{where}[{i}]", "schema", "permissions are arrays of strings")
            elif len(p) == 3:
                perms[user].add(ObjectPerm(p[0], p[1], p[2]))
            elif len(p) == 2:
                perms[user].add(ClassPerm(p[0], p[1]))
            else:
                problems.add(
                    f"{where}[{i}]",
                    "schema",
                    "expected [class, object, mode] or [class, mode]",
                )
    return UarbacInstance.build(frozenset(admin_users), roles, access_modes, perms)


def _load_arra(doc, roles, admin_roles, admin_users, aua, problems) -> ArraInstance:
    decls: list[AttributeDecl] = []
    raw_attrs = doc.get("attributes", [])
    if not isinstance(raw_attrs, list):
        problems.add("attributes", "schema", "expected an array of schema records")
        raw_attrs = []
    for i, rec in enumerate(raw_attrs):
        where = f"attributes[{i}]"
        decl = _read_decl(rec, where, problems)
        if decl is not None:
            decls.append(decl)

    assignments: list[tuple[str, str, object]] = []
    raw_values = doc.get("values", [])
    if not isinstance(raw_values, list):
        problems.add("values", "schema", "expected an array of {attr, entity, value} records")
        raw_values = []
    for i, rec in enumerate(raw_values):
        where = f"values[{i}]"
        if not isinstance(rec, dict) or set(rec) != {"attr", "entity", "value"}:
            problems.add(where, "schema", "expected exactly the keys attr, entity, value")
            continue
        if not isinstance(rec["attr"], str) or not isinstance(rec["entity"], str):
            problems.add(where, "schema", "attr and entity must be strings")
            continue
        value = _read_value(rec["value"], where, problems)
        if value is not None:
            assignments.append((rec["attr"], rec["entity"], value))

    rules: list[RuleRecord] = []
    raw_rules = doc.get("rules", [])
    if not isinstance(raw_rules, list):
        problems.add("rules", "schema", "expected an array of {op, form} records")
        raw_rules = []
    for i, rec in enumerate(raw_rules):
        where = f"rules[{i}]"
        if not isinstance(rec, dict) or not {"op", "form"} <= set(rec) or set(rec) - {"op", "form", "set_form"}:
            problems.add(where, "schema", "expected the keys op, form, and optionally set_form")
            continue
        if not isinstance(rec["op"], str) or not isinstance(rec["form"], str):
            problems.add(where, "schema", "op and form must be strings")
            continue
        try:
            single = parse_rule(rec["form"])
        except ParseError as exc:
            problems.add(f"{where}.form", exc.code, str(exc))
            continue
        set_form = None
        if "set_form" in rec:
            if not isinstance(rec["set_form"], str):
                problems.add(f"{where}.set_form", "schema", "set_form must be a string")
                continue
            try:
                set_form = parse_rule(rec["set_form"])
            except ParseError as exc:
                problems.add(f"{where}.set_form", exc.code, str(exc))
                continue
        rules.append(RuleRecord(rec["op"], single, set_form))

    return ArraInstance.build(
        admin_users=frozenset(admin_users),
        roles=roles,
        admin_roles=admin_roles,
        aua=aua,
        attributes=decls,
        assignments=assignments,
        rules=rules,
        flags=_flags(doc, problems),
    )


def _read_decl(rec, where: str, problems: _Problems) -> AttributeDecl | None:
    keys = {"name", "target", "value_kind", "ordered", "scope", "scope_order"}
    if not isinstance(rec, dict) or not {"name", "target", "value_kind", "ordered", "scope"} <= set(rec):
        problems.add(where, "schema", "schema records need name, target, value_kind, ordered, scope")
        return None
    if set(rec) - keys:
        problems.add(where, "schema", f"unknown keys {sorted(set(rec) - keys)}")
        return None
    scope = rec["scope"]
    if isinstance(scope, str):
        if scope not in ("roles", "rh+"):
            problems.add(f"{where}.scope", "schema", "symbolic scope must be 'roles' or 'rh+'")
            return None
        scope_spec: str | tuple = scope
    elif isinstance(scope, list):
        elements = []
        for v in scope:
            if isinstance(v, str):
                elements.append(v)
            elif isinstance(v, list) and len(v) == 2 and all(isinstance(x, str) for x in v):
                elements.append((v[0], v[1]))
            else:
                problems.add(f"{where}.scope", "schema", f"bad scope element {v!r}")
                return None
        scope_spec = tuple(sorted(elements, key=lambda v: (isinstance(v, tuple), v)))
    else:
        problems.add(f"{where}.scope", "schema", "scope must be symbolic or an array")
        return None
    order = rec.get("scope_order")
    if order is None:
        order_spec: str | tuple | None = None
    elif isinstance(order, str):
        if order != "rh":
            problems.add(f"{where}.scope_order", "schema", "symbolic order must be 'rh'")
            return None
        order_spec = order
    elif isinstance(order, list):
        pairs = []
        for v in order:
            if isinstance(v, list) and len(v) == 2:
                lo = tuple(v[0]) if isinstance(v[0], list) else v[0]
                hi = tuple(v[1]) if isinstance(v[1], list) else v[1]
                pairs.append((lo, hi))
            else:
                problems.add(f"{where}.scope_order", "schema", f"bad order pair {v!r}")
                return None
        order_spec = tuple(sorted(pairs, key=repr))
    else:
        problems.add(f"{where}.scope_order", "schema", "scope_order must be 'rh' or an array")
        return None
    if not isinstance(rec["ordered"], bool):
        problems.add(f"{where}.ordered", "schema", "ordered must be a boolean")
        return None
    return AttributeDecl(
        name=rec["name"],
        target=rec["target"],
        value_kind=rec["value_kind"],
        ordered=rec["ordered"],
        scope_spec=scope_spec,
        order_spec=order_spec,
    )


def _read_value(raw, where: str, problems: _Problems):
    if isinstance(raw, str):
        return raw
    if isinstance(raw, list):
        elements = []
        for v in raw:
            if isinstance(v, str):
                elements.append(v)
            elif isinstance(v, list) and len(v) == 2 and all(isinstance(x, str) for x in v):
                elements.append((v[0], v[1]))
            else:
                problems.add(f"{where}.value", "schema", f"bad set element {v!r}")
                return None
        return normalize_value("set", elements)
    problems.add(f"{where}.value", "schema", "value must be a string or an array")
    return None


# --- saving ------------------------------------------------------------------------


def save_instance(inst, path: str | Path) -> None:
    Path(path).write_text(dumps_instance(inst))


def dumps_instance(inst) -> str:
    return json.dumps(instance_to_doc(inst), indent=2) + "\n"


def instance_to_doc(inst) -> dict:
    if isinstance(inst, Rra97Instance):
        return {
            "model": "rra97",
            "admin_users": sorted(inst.users),
            "roles": list(inst.roles.sorted_nodes),
            "rh": [list(e) for e in inst.roles.sorted_edges],
            "admin_roles": list(inst.admin_roles.sorted_nodes),
            "arh": [list(e) for e in inst.admin_roles.sorted_edges],
            "aua": [list(p) for p in sorted(inst.aua)],
            "can_modify": [
                {"admin_role": ar, "range": list(rng)} for ar, rng in inst.sorted_can_modify
            ],
            "flags": {
                "aroles_closure": inst.aroles_closure,
                "delete_semantics": inst.delete_semantics,
            },
        }
    if isinstance(inst, UarbacInstance):
        return {
            "model": "uarbac",
            "admin_users": sorted(inst.users),
            "roles": list(inst.roles.sorted_nodes),
            "rh": [list(e) for e in inst.roles.sorted_edges],
            "access_modes": {c: sorted(m) for c, m in inst.access_modes},
            "authorized_perms": {
                u: [_perm_doc(p) for p in sorted(perms, key=_perm_key)]
                for u, perms in inst.authorized_perms
            },
        }
    if isinstance(inst, ArraInstance):
        return {
            "model": "arra",
            "admin_users": sorted(inst.admin_users),
            "roles": list(inst.roles.sorted_nodes),
            "rh": [list(e) for e in inst.roles.sorted_edges],
            "admin_roles": list(inst.admin_roles.sorted_nodes),
            "arh": [list(e) for e in inst.admin_roles.sorted_edges],
            "aua": [list(p) for p in sorted(inst.aua)],
            "attributes": [_decl_doc(d) for d in inst.attributes],
            "values": [
                {"attr": name, "entity": entity, "value": _value_doc(value)}
                for name, entity, value in inst.assignments
            ],
            "rules": [_rule_doc(r) for r in inst.rules],
            "flags": {
                "aroles_closure": inst.flags.aroles_closure,
                "delete_semantics": inst.flags.delete_semantics,
            },
        }
    raise TypeError(f"cannot serialize {type(inst).__name__}")


def _perm_key(p):
    if isinstance(p, ObjectPerm):
        return (0, p.cls, p.obj, p.mode)
    return (1, p.cls, "", p.mode)


def _perm_doc(p):
    if isinstance(p, ObjectPerm):
        return [p.cls, p.obj, p.mode]
    return [p.cls, p.mode]


def _decl_doc(decl: AttributeDecl) -> dict:
    doc = {
        "name": decl.name,
        "target": decl.target,
        "value_kind": decl.value_kind,
        "ordered": decl.ordered,
        "scope": decl.scope_spec
        if isinstance(decl.scope_spec, str)
        else [list(v) if isinstance(v, tuple) else v for v in decl.scope_spec],
    }
    if decl.order_spec is not None:
        doc["scope_order"] = (
            decl.order_spec
            if isinstance(decl.order_spec, str)
            else [
                [list(a) if isinstance(a, tuple) else a, list(b) if isinstance(b, tuple) else b]
                for a, b in decl.order_spec
            ]
        )
    return doc


def _value_doc(value):
    if isinstance(value, tuple):
        return [list(v) if isinstance(v, tuple) else v for v in value]
    return value


def _rule_doc(record: RuleRecord) -> dict:
    doc = {"op": record.op, "form": render(record.single)}
    if record.set_form is not None:
        doc["set_form"] = render(record.set_form)
    return doc
