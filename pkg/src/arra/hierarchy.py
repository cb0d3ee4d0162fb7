"""Finite strict partial orders over role identifiers.

A hierarchy is a DAG stored as its direct edge relation with pairs ordered
(junior, senior); seniority queries run against a memoized transitive
closure. Graphs are immutable values: mutating operations return new
graphs, so concurrent readers never need locks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .errors import CycleError, DuplicateEdge, EdgeNotFound, SchemaError, UnknownEntity

Edge = tuple[str, str]


def check_token(name: str) -> str | None:
    """Return a complaint if `name` is unusable as an entity identifier."""
    if not isinstance(name, str) or not name:
        return "identifier must be a non-empty string"
    if name != name.strip():
        return "identifier has leading or trailing blanks"
    if any(ord(c) < 32 or ord(c) == 127 for c in name):
        return "identifier contains control characters"
    if '"' in name or "\\" in name:
        return 'identifier may not contain \'"\' or backslash'
    return None


@dataclass(frozen=True)
class RoleGraph:
    """Strict partial order over a finite role set.

    `edges` holds only the direct relation; the closure is derived, never
    stored alongside it.
    """

    nodes: frozenset[str]
    edges: frozenset[Edge]

    @classmethod
    def build(cls, nodes: Iterable[str], edges: Iterable[Edge]) -> "RoleGraph":
        g = cls(frozenset(nodes), frozenset((j, s) for j, s in edges))
        for name in g.nodes:
            complaint = check_token(name)
            if complaint:
                raise SchemaError(f"bad role name {name!r}: {complaint}")
        for j, s in g.edges:
            if j not in g.nodes or s not in g.nodes:
                raise UnknownEntity(f"edge ({j}, {s}) references an unknown role")
            if j == s:
                raise CycleError(f"self-edge on {j}")
        g._check_acyclic()
        return g

    @classmethod
    def empty(cls) -> "RoleGraph":
        return cls(frozenset(), frozenset())

    # --- derived relations -------------------------------------------------

    @cached_property
    def _succ(self) -> dict[str, tuple[str, ...]]:
        succ: dict[str, list[str]] = {n: [] for n in self.nodes}
        for j, s in self.edges:
            succ[j].append(s)
        return {n: tuple(sorted(v)) for n, v in succ.items()}

    @cached_property
    def seniors_of(self) -> dict[str, frozenset[str]]:
        """All roles strictly senior to each node."""
        out: dict[str, frozenset[str]] = {}
        for n in self.nodes:
            seen: set[str] = set()
            stack = list(self._succ[n])
            while stack:
                m = stack.pop()
                if m not in seen:
                    seen.add(m)
                    stack.extend(self._succ[m])
            out[n] = frozenset(seen)
        return out

    @cached_property
    def juniors_of(self) -> dict[str, frozenset[str]]:
        out: dict[str, set[str]] = {n: set() for n in self.nodes}
        for n, ups in self.seniors_of.items():
            for m in ups:
                out[m].add(n)
        return {n: frozenset(v) for n, v in out.items()}

    @cached_property
    def closure_pairs(self) -> frozenset[Edge]:
        """Strict transitive closure as (junior, senior) pairs."""
        return frozenset((n, m) for n, ups in self.seniors_of.items() for m in ups)

    @cached_property
    def sorted_nodes(self) -> tuple[str, ...]:
        return tuple(sorted(self.nodes))

    @cached_property
    def sorted_edges(self) -> tuple[Edge, ...]:
        return tuple(sorted(self.edges))

    def _check_acyclic(self) -> None:
        for n in self.nodes:
            if n in self.seniors_of[n]:
                raise CycleError(f"hierarchy contains a cycle through {n}")

    def _require(self, *names: str) -> None:
        for name in names:
            if name not in self.nodes:
                raise UnknownEntity(f"unknown role {name!r}")

    # --- queries -----------------------------------------------------------

    def is_senior(self, a: str, b: str) -> bool:
        """True iff a is strictly senior to b."""
        self._require(a, b)
        return a in self.seniors_of[b]

    def incomparable(self, a: str, b: str) -> bool:
        self._require(a, b)
        if a == b:
            return False
        return a not in self.seniors_of[b] and b not in self.seniors_of[a]

    def open_range(self, x: str, y: str) -> frozenset[str]:
        """Roles strictly senior to x and strictly junior to y."""
        self._require(x, y)
        return self.seniors_of[x] & self.juniors_of[y]

    def has_edge(self, junior: str, senior: str) -> bool:
        return (junior, senior) in self.edges

    # --- mutation (returns new graphs) --------------------------------------

    def insert_edge(self, junior: str, senior: str) -> "RoleGraph":
        self._require(junior, senior)
        if (junior, senior) in self.edges:
            raise DuplicateEdge(f"edge ({junior}, {senior}) already present")
        if junior == senior or junior in self.seniors_of[senior]:
            raise CycleError(f"edge ({junior}, {senior}) would create a cycle")
        return RoleGraph(self.nodes, self.edges | {(junior, senior)})

    def delete_edge(self, junior: str, senior: str) -> "RoleGraph":
        self._require(junior, senior)
        if (junior, senior) not in self.edges:
            raise EdgeNotFound(f"({junior}, {senior}) is not a direct edge")
        return RoleGraph(self.nodes, self.edges - {(junior, senior)})

    def closure_with(self, extra: Edge) -> frozenset[Edge]:
        """Reflexive-transitive closure of edges ∪ {extra} as (junior, senior) pairs.

        The hypothetical relation may be cyclic; callers decide what that means.
        """
        j, s = extra
        self._require(j, s)
        succ = {n: set(self._succ[n]) for n in self.nodes}
        succ[j].add(s)
        pairs: set[Edge] = set()
        for n in self.nodes:
            pairs.add((n, n))
            seen: set[str] = set()
            stack = list(succ[n])
            while stack:
                m = stack.pop()
                if m not in seen:
                    seen.add(m)
                    stack.extend(succ[m])
            pairs.update((n, m) for m in seen)
        return frozenset(pairs)
