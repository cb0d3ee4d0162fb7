"""Rule language: AST, parser, canonical printer, and evaluator."""

from .evaluate import (
    EvalContext,
    evaluate,
    evaluate_set_form,
    replay,
    select_roles,
    truth,
)
from .nodes import PARAMETERS, free_vars
from .parse import parse_rule
from .render import render

__all__ = [
    "EvalContext",
    "PARAMETERS",
    "evaluate",
    "evaluate_set_form",
    "free_vars",
    "parse_rule",
    "render",
    "replay",
    "select_roles",
    "truth",
]
