"""Document spanners: regex formulas with capture variables, vset-automata,
spanner algebra and duplicate-free enumeration."""

from .core import (
    ContractViolation,
    Document,
    Mapping,
    PlanError,
    Span,
    SpannerError,
    SpanRangeError,
    join_sets,
    mappings_compatible,
    minus_sets,
    project_set,
)
from .regex import classify, oracle_eval, parse_regex, to_text
from .va import VsetAutomaton, compile_regex, oracle_eval_va
from .algebra import join_disjunctive, join_fpt, union_va, va_to_disjunctive_functional
from .difference import difference_adhoc, difference_synchronized
from .enumerate import BACKEND, evaluate, nonempty
from .ratree import QueryEngine, eval_query, load_instantiation, parse_ra_tree, validate_plan

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ContractViolation",
    "Document",
    "Mapping",
    "PlanError",
    "QueryEngine",
    "Span",
    "SpanRangeError",
    "SpannerError",
    "VsetAutomaton",
    "classify",
    "compile_regex",
    "difference_adhoc",
    "difference_synchronized",
    "eval_query",
    "evaluate",
    "join_disjunctive",
    "join_fpt",
    "join_sets",
    "load_instantiation",
    "mappings_compatible",
    "minus_sets",
    "nonempty",
    "oracle_eval",
    "oracle_eval_va",
    "parse_ra_tree",
    "parse_regex",
    "project_set",
    "to_text",
    "union_va",
    "va_to_disjunctive_functional",
    "validate_plan",
]
