"""Attribute-based role-role assignment policy engine.

Evaluates quantified authorization rules over role hierarchies and entity
attributes, ships independent RRA97 and UARBAC reference semantics, and
compiles instances of both into equivalent rule-based instances whose
decisions are checked by exhaustive differential comparison.
"""

from .decision import Decision, TraceEntry
from .hierarchy import RoleGraph
from .instance import ArraInstance, AttributeDecl, Flags, RuleRecord
from .rra97 import Rra97Instance
from .uarbac import UarbacInstance

__all__ = [
    "ArraInstance",
    "AttributeDecl",
    "Decision",
    "Flags",
    "RoleGraph",
    "RuleRecord",
    "Rra97Instance",
    "TraceEntry",
    "UarbacInstance",
]

__version__ = "0.1.0"
