"""Exception types shared across the engine.

Every error the engine raises deliberately derives from ArraError so the
CLI can turn any of them into an exit-2 diagnostic.
"""

from __future__ import annotations


class ArraError(Exception):
    """Base class for all engine errors."""

    code = "error"

    def diagnostic(self) -> dict:
        return {"code": self.code, "message": str(self)}


class UnknownEntity(ArraError):
    """A referenced user, role, or admin role does not exist."""

    code = "unknown-entity"


class CycleError(ArraError):
    """An edge insertion would make the hierarchy cyclic."""

    code = "cycle"


class DuplicateEdge(ArraError):
    """The direct edge is already present."""

    code = "duplicate-edge"


class EdgeNotFound(ArraError):
    """The direct edge does not exist (closure-only pairs are not edges)."""

    code = "edge-not-found"


class SchemaError(ArraError):
    """An attribute schema or instance section violates its invariants."""

    code = "schema"


class DuplicateAttribute(ArraError):
    """An attribute with the same name and target is already registered."""

    code = "duplicate-attribute"


class UnknownAttribute(ArraError):
    """No attribute registered under this name (and target kind)."""

    code = "unknown-attribute"


class NotOrdered(ArraError):
    """Set dominance asked of an attribute with an unordered scope."""

    code = "not-ordered"


class ScopeError(ArraError):
    """A value or query element lies outside the attribute's scope."""

    code = "scope"


class MissingValue(ArraError):
    """An atomic attribute has no assignment for the entity."""

    code = "missing-value"


class AmbiguousRange(ArraError):
    """Two incomparable minimal authority ranges enclose the same role."""

    code = "ambiguous-range"


class ParseError(ArraError):
    """Rule source failed to parse; carries a 1-based line and column."""

    code = "parse"

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column

    def diagnostic(self) -> dict:
        return {
            "code": self.code,
            "message": str(self),
            "line": self.line,
            "column": self.column,
        }


class BindError(ArraError):
    """A rule references a variable or token bound nowhere."""

    code = "bind"


class EvalError(ArraError):
    """A rule is ill-typed for the instance it is evaluated against."""

    code = "eval"


class UnknownOperation(ArraError):
    """The instance defines no rule for the requested operation."""

    code = "unknown-operation"


class LoadError(ArraError):
    """An instance file failed validation; carries positioned diagnostics."""

    code = "load"

    def __init__(self, diagnostics: list):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(
            f"{d.get('where', '?')}: {d.get('message', '')}" for d in self.diagnostics
        )
        super().__init__(lines or "invalid instance")

    def diagnostic(self) -> dict:
        return {"code": self.code, "diagnostics": self.diagnostics}
