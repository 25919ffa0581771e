"""Core value types for Datalog programs: terms, atoms, rules, programs.

A program manipulates exactly two sorts of ground values: symbols (arbitrary
UTF-8 text, e.g. file paths and code identifiers) and numbers (integers).
Ground tuples in a database are plain Python tuples mixing ``str`` and
``int`` according to the relation's declared sorts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

SYMBOL = "symbol"
NUMBER = "number"

COMPARISON_OPS = ("<=", ">=", "!=", "<", ">", "=")


@dataclass(frozen=True)
class Sym:
    """Symbol constant."""

    text: str


@dataclass(frozen=True)
class Num:
    """Integer constant."""

    value: int


@dataclass(frozen=True)
class Var:
    """Named variable; only legal inside rules."""

    name: str


@dataclass(frozen=True)
class Wildcard:
    """Anonymous term ``_``; only legal in rule bodies."""


WILDCARD = Wildcard()

Term = Union[Sym, Num, Var, Wildcard]


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    def is_ground(self) -> bool:
        return all(isinstance(a, (Sym, Num)) for a in self.args)

    def value_tuple(self) -> tuple:
        """Ground atom to a database tuple (str for symbols, int for numbers)."""
        out = []
        for a in self.args:
            if isinstance(a, Sym):
                out.append(a.text)
            elif isinstance(a, Num):
                out.append(a.value)
            else:
                raise ValueError(f"atom {self} is not ground")
        return tuple(out)


@dataclass(frozen=True)
class NegatedAtom:
    atom: Atom


@dataclass(frozen=True)
class Comparison:
    """Integer comparison between two terms; both sides must be numbers."""

    op: str
    left: Term
    right: Term


Literal = Union[Atom, NegatedAtom, Comparison]


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple[Literal, ...]

    def positive_atoms(self) -> list[Atom]:
        return [lit for lit in self.body if isinstance(lit, Atom)]

    def negated_atoms(self) -> list[NegatedAtom]:
        return [lit for lit in self.body if isinstance(lit, NegatedAtom)]

    def comparisons(self) -> list[Comparison]:
        return [lit for lit in self.body if isinstance(lit, Comparison)]


@dataclass
class Program:
    """Declarations, rules, and ground facts.

    ``declarations`` maps each relation name to its argument-sort list
    (values from ``SYMBOL``/``NUMBER``).  Programs are treated as immutable
    after validation; nothing in the package mutates one in place.
    """

    declarations: dict[str, tuple[str, ...]] = field(default_factory=dict)
    rules: list[Rule] = field(default_factory=list)
    facts: list[Atom] = field(default_factory=list)


def atom_to_fact_tuple(atom: Atom) -> tuple:
    return (atom.predicate,) + atom.value_tuple()


def fact_tuple_to_atom(predicate: str, values: tuple) -> Atom:
    args: list[Term] = []
    for v in values:
        if isinstance(v, bool):  # bool is an int subclass; keep it out of Num
            raise ValueError("boolean values are not datalog terms")
        if isinstance(v, int):
            args.append(Num(v))
        else:
            args.append(Sym(str(v)))
    return Atom(predicate, tuple(args))


# ---------------------------------------------------------------------------
# Pretty printing.  parse(print(p)) reproduces an equivalent program.
# ---------------------------------------------------------------------------


def _escape_symbol(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def print_term(term: Term) -> str:
    if isinstance(term, Sym):
        return f'"{_escape_symbol(term.text)}"'
    if isinstance(term, Num):
        return str(term.value)
    if isinstance(term, Var):
        return term.name
    return "_"


def print_atom(atom: Atom) -> str:
    return f"{atom.predicate}({', '.join(print_term(t) for t in atom.args)})"


def print_literal(lit: Literal) -> str:
    if isinstance(lit, Atom):
        return print_atom(lit)
    if isinstance(lit, NegatedAtom):
        return "!" + print_atom(lit.atom)
    return f"{print_term(lit.left)} {lit.op} {print_term(lit.right)}"


def print_rule(rule: Rule) -> str:
    body = ", ".join(print_literal(lit) for lit in rule.body)
    return f"{print_atom(rule.head)} :- {body}."


def print_declaration(name: str, sorts: tuple[str, ...]) -> str:
    args = ", ".join(f"a{i}: {sort}" for i, sort in enumerate(sorts))
    return f".decl {name}({args})"


def print_program(program: Program) -> str:
    lines = []
    for name, sorts in program.declarations.items():
        lines.append(print_declaration(name, sorts))
    if program.declarations and (program.rules or program.facts):
        lines.append("")
    for rule in program.rules:
        lines.append(print_rule(rule))
    if program.rules and program.facts:
        lines.append("")
    for fact in program.facts:
        lines.append(print_atom(fact) + ".")
    return "\n".join(lines) + ("\n" if lines else "")
