"""Allow/deny decisions with explanation traces.

A trace entry names the disjunct of the authorization rule that fired and
the witness values chosen for the existential quantifiers along the
winning path. Traces are deterministic: quantifier domains iterate in
sorted order, so the recorded witnesses are the least satisfying ones.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TraceEntry:
    disjunct: int
    witnesses: tuple[tuple[str, object], ...] = ()

    @classmethod
    def make(cls, disjunct: int, witnesses: dict | None) -> "TraceEntry":
        items = tuple(sorted((witnesses or {}).items()))
        return cls(disjunct, items)

    def witness_map(self) -> dict[str, object]:
        return dict(self.witnesses)

    def describe(self) -> str:
        if not self.witnesses:
            return f"disjunct {self.disjunct}"
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.witnesses)
        return f"disjunct {self.disjunct}: {shown}"


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return "(" + ", ".join(str(v) for v in value) + ")"
    return str(value)


@dataclass(frozen=True)
class Decision:
    allowed: bool
    trace: tuple[TraceEntry, ...] = ()

    def __post_init__(self) -> None:
        if self.allowed and not self.trace:
            raise ValueError("an allow decision must carry a trace")

    @classmethod
    def deny(cls) -> "Decision":
        return cls(False, ())

    @classmethod
    def allow(cls, disjunct: int = 0, witnesses: dict | None = None) -> "Decision":
        return cls(True, (TraceEntry.make(disjunct, witnesses),))

    def to_dict(self) -> dict:
        return {
            "allowed": self.allowed,
            "trace": [
                {"disjunct": e.disjunct, "witnesses": [[k, _json_value(v)] for k, v in e.witnesses]}
                for e in self.trace
            ],
        }


def _json_value(value):
    if isinstance(value, tuple):
        return list(value)
    if isinstance(value, frozenset):
        return sorted(_json_value(v) for v in value)
    return value
