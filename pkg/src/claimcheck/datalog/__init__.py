"""In-process Datalog: values, parser, evaluator, and external export."""

from .ast import (
    Atom,
    Comparison,
    NegatedAtom,
    Num,
    NUMBER,
    Program,
    Rule,
    Sym,
    SYMBOL,
    Term,
    Var,
    WILDCARD,
    Wildcard,
    print_atom,
    print_program,
    print_rule,
)
from .engine import Database, Derivation, check_program, evaluate, explain, query, stratify
from .export import export_external, import_external
from .parser import parse_fact_lines, parse_facts, parse_program

__all__ = [
    "Atom",
    "Comparison",
    "Database",
    "Derivation",
    "NegatedAtom",
    "Num",
    "NUMBER",
    "Program",
    "Rule",
    "Sym",
    "SYMBOL",
    "Term",
    "Var",
    "WILDCARD",
    "Wildcard",
    "check_program",
    "evaluate",
    "explain",
    "export_external",
    "import_external",
    "parse_fact_lines",
    "parse_facts",
    "parse_program",
    "print_atom",
    "print_program",
    "print_rule",
    "query",
    "stratify",
]
