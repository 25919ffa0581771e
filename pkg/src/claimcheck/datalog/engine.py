"""Program validation and deterministic bottom-up evaluation.

Evaluation computes the minimal model stratum by stratum: within each
stratum the least fixpoint of the positive rules is reached semi-naively
(only joins touching tuples new in the previous round are re-run), and
negated atoms consult relations of strictly lower strata.  Iteration order
is not part of the contract; set equality of the result is.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional

from ..errors import (
    ArityMismatchError,
    NotDerivableError,
    RangeRestrictionError,
    SortError,
    UnknownRelationError,
    UnstratifiableNegationError,
)
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
    Wildcard,
    fact_tuple_to_atom,
    print_atom,
)

_UNKNOWN = "?"


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _occurrences(program: Program) -> Iterator[Atom]:
    for fact in program.facts:
        yield fact
    for rule in program.rules:
        yield rule.head
        for lit in rule.body:
            if isinstance(lit, Atom):
                yield lit
            elif isinstance(lit, NegatedAtom):
                yield lit.atom


def _infer_declarations(program: Program) -> dict[str, list[str]]:
    slots: dict[str, list[str]] = {
        name: list(sorts) for name, sorts in program.declarations.items()
    }
    declared = set(program.declarations)
    for atom in _occurrences(program):
        if atom.predicate not in slots:
            slots[atom.predicate] = [_UNKNOWN] * len(atom.args)
        expected = len(slots[atom.predicate])
        if len(atom.args) != expected:
            raise ArityMismatchError(atom.predicate, expected, len(atom.args))

    def note(predicate: str, index: int, sort: str, context: str) -> None:
        current = slots[predicate][index]
        if current == _UNKNOWN:
            slots[predicate][index] = sort
        elif current != sort:
            if predicate in declared:
                raise SortError(
                    f"{context}: argument {index + 1} of {predicate!r} is declared "
                    f"{current}, found {sort}"
                )
            raise SortError(
                f"{context}: argument {index + 1} of {predicate!r} is used both "
                f"as {current} and as {sort}"
            )

    changed = True
    while changed:
        changed = False
        for fact in program.facts:
            for i, term in enumerate(fact.args):
                if isinstance(term, Sym):
                    before = slots[fact.predicate][i]
                    note(fact.predicate, i, SYMBOL, f"fact {print_atom(fact)}")
                    changed |= before == _UNKNOWN
                elif isinstance(term, Num):
                    before = slots[fact.predicate][i]
                    note(fact.predicate, i, NUMBER, f"fact {print_atom(fact)}")
                    changed |= before == _UNKNOWN
        for rule in program.rules:
            var_sorts: dict[str, str] = {}
            atoms = [rule.head] + [
                lit.atom if isinstance(lit, NegatedAtom) else lit
                for lit in rule.body
                if isinstance(lit, (Atom, NegatedAtom))
            ]
            for cmp in rule.comparisons():
                for side in (cmp.left, cmp.right):
                    if isinstance(side, Var):
                        var_sorts[side.name] = NUMBER
            for atom in atoms:
                for i, term in enumerate(atom.args):
                    slot = slots[atom.predicate][i]
                    if isinstance(term, Var) and slot != _UNKNOWN:
                        if var_sorts.setdefault(term.name, slot) != slot:
                            raise SortError(
                                f"rule for {rule.head.predicate!r}: variable "
                                f"{term.name!r} is used both as "
                                f"{var_sorts[term.name]} and as {slot}"
                            )
            for atom in atoms:
                for i, term in enumerate(atom.args):
                    context = f"rule for {rule.head.predicate!r}"
                    if isinstance(term, Sym):
                        before = slots[atom.predicate][i]
                        note(atom.predicate, i, SYMBOL, context)
                        changed |= before == _UNKNOWN
                    elif isinstance(term, Num):
                        before = slots[atom.predicate][i]
                        note(atom.predicate, i, NUMBER, context)
                        changed |= before == _UNKNOWN
                    elif isinstance(term, Var) and term.name in var_sorts:
                        before = slots[atom.predicate][i]
                        note(atom.predicate, i, var_sorts[term.name], context)
                        changed |= before == _UNKNOWN
    return slots


def _check_rule(rule: Rule, slots: dict[str, list[str]]) -> None:
    positive_vars: set[str] = set()
    for atom in rule.positive_atoms():
        for term in atom.args:
            if isinstance(term, Var):
                positive_vars.add(term.name)
    for term in rule.head.args:
        if isinstance(term, Wildcard):
            raise RangeRestrictionError(
                f"rule for {rule.head.predicate!r}: wildcard in rule head"
            )
        if isinstance(term, Var) and term.name not in positive_vars:
            raise RangeRestrictionError(
                f"rule for {rule.head.predicate!r}: head variable {term.name!r} "
                "does not occur in a positive body literal"
            )
    for neg in rule.negated_atoms():
        for term in neg.atom.args:
            if isinstance(term, Var) and term.name not in positive_vars:
                raise RangeRestrictionError(
                    f"rule for {rule.head.predicate!r}: negated variable "
                    f"{term.name!r} does not occur in a positive body literal"
                )
    for cmp in rule.comparisons():
        for side in (cmp.left, cmp.right):
            if isinstance(side, Wildcard):
                raise RangeRestrictionError(
                    f"rule for {rule.head.predicate!r}: wildcard in comparison"
                )
            if isinstance(side, Sym):
                raise SortError(
                    f"rule for {rule.head.predicate!r}: comparison over symbol "
                    f"{side.text!r}"
                )
            if isinstance(side, Var) and side.name not in positive_vars:
                raise RangeRestrictionError(
                    f"rule for {rule.head.predicate!r}: comparison variable "
                    f"{side.name!r} does not occur in a positive body literal"
                )


def _strongly_connected_components(graph: dict[str, set[str]]) -> list[list[str]]:
    """Tarjan's algorithm; returns SCCs in reverse topological order."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    sccs: list[list[str]] = []
    counter = 0

    def visit(root: str) -> None:
        nonlocal counter
        work = [(root, iter(sorted(graph.get(root, ()))))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = low[succ] = counter
                    counter += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(sorted(graph.get(succ, ())))))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                scc = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    scc.append(member)
                    if member == node:
                        break
                sccs.append(sorted(scc))

    for node in sorted(graph):
        if node not in index:
            visit(node)
    return sccs


def stratify(program: Program) -> list[list[str]]:
    """Predicate strata in evaluation order, or raise on negation in a cycle."""
    graph: dict[str, set[str]] = {name: set() for name in program.declarations}
    negative_edges: set[tuple[str, str]] = set()
    for rule in program.rules:
        head = rule.head.predicate
        graph.setdefault(head, set())
        for lit in rule.body:
            if isinstance(lit, Atom):
                graph.setdefault(lit.predicate, set()).add(head)
            elif isinstance(lit, NegatedAtom):
                graph.setdefault(lit.atom.predicate, set()).add(head)
                negative_edges.add((lit.atom.predicate, head))
    sccs = _strongly_connected_components(graph)
    component: dict[str, int] = {}
    for i, scc in enumerate(sccs):
        for name in scc:
            component[name] = i
    for src, dst in negative_edges:
        if component[src] == component[dst]:
            raise UnstratifiableNegationError(sccs[component[src]])
    return list(reversed(sccs))


def check_program(program: Program) -> None:
    """Validate and complete a program in place (auto-declaring predicates)."""
    slots = _infer_declarations(program)
    program.declarations = {
        name: tuple(SYMBOL if s == _UNKNOWN else s for s in sorts)
        for name, sorts in slots.items()
    }
    for fact in program.facts:
        if not fact.is_ground():
            raise RangeRestrictionError(
                f"fact {fact.predicate} contains a variable or wildcard"
            )
    for rule in program.rules:
        _check_rule(rule, slots)
    stratify(program)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

Provenance = Optional[tuple[Rule, tuple[tuple[str, tuple], ...]]]


@dataclass
class Database(Mapping):
    """Relation name -> frozen set of ground tuples, plus one derivation each."""

    relations: dict[str, frozenset]
    provenance: dict[tuple[str, tuple], Provenance] = field(default_factory=dict)

    def __getitem__(self, name: str) -> frozenset:
        return self.relations[name]

    def __iter__(self):
        return iter(self.relations)

    def __len__(self) -> int:
        return len(self.relations)


def _match(atom: Atom, values: tuple, binding: dict) -> dict | None:
    new_binding = None
    for term, value in zip(atom.args, values):
        if isinstance(term, (Sym, Num)):
            const = term.text if isinstance(term, Sym) else term.value
            if const != value:
                return None
        elif isinstance(term, Wildcard):
            continue
        else:
            current = (new_binding or binding).get(term.name, _UNKNOWN)
            if current is _UNKNOWN:
                if new_binding is None:
                    new_binding = dict(binding)
                new_binding[term.name] = value
            elif current != value:
                return None
    return binding if new_binding is None else new_binding


def _term_value(term: Term, binding: dict):
    if isinstance(term, Sym):
        return term.text
    if isinstance(term, Num):
        return term.value
    if isinstance(term, Var):
        return binding[term.name]
    raise ValueError("wildcard has no value")


_CMP = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def _comparison_holds(cmp: Comparison, binding: dict) -> bool:
    return _CMP[cmp.op](_term_value(cmp.left, binding), _term_value(cmp.right, binding))


def _checks_hold(rule: Rule, binding: dict, state: dict[str, set]) -> bool:
    for lit in rule.body:
        if isinstance(lit, Comparison):
            if not _comparison_holds(lit, binding):
                return False
        elif isinstance(lit, NegatedAtom):
            rel = state.get(lit.atom.predicate, set())
            if any(_match(lit.atom, tup, binding) is not None for tup in rel):
                return False
    return True


def _instantiate_head(head: Atom, binding: dict) -> tuple:
    return tuple(_term_value(term, binding) for term in head.args)


def _eval_rule(
    rule: Rule,
    state: dict[str, set],
    delta_position: int | None = None,
    delta: set | None = None,
) -> list[tuple[tuple, tuple[tuple[str, tuple], ...]]]:
    positives = rule.positive_atoms()
    out: list[tuple[tuple, tuple[tuple[str, tuple], ...]]] = []
    support: list[tuple[str, tuple]] = []

    def rec(i: int, binding: dict) -> None:
        if i == len(positives):
            if _checks_hold(rule, binding, state):
                out.append((_instantiate_head(rule.head, binding), tuple(support)))
            return
        atom = positives[i]
        source = delta if i == delta_position else state.get(atom.predicate, set())
        for values in sorted(source, key=repr):
            extended = _match(atom, values, binding)
            if extended is not None:
                support.append((atom.predicate, values))
                rec(i + 1, extended)
                support.pop()

    rec(0, {})
    return out


def evaluate(program: Program) -> Database:
    """Minimal model of a valid program; total on stratifiable inputs."""
    check_program(program)
    strata = stratify(program)
    state: dict[str, set] = {name: set() for name in program.declarations}
    provenance: dict[tuple[str, tuple], Provenance] = {}
    for fact in program.facts:
        values = fact.value_tuple()
        if values not in state[fact.predicate]:
            state[fact.predicate].add(values)
            provenance[(fact.predicate, values)] = None

    for stratum in strata:
        members = set(stratum)
        rules = [r for r in program.rules if r.head.predicate in members]
        if not rules:
            continue
        delta: dict[str, set] = {name: set() for name in members}
        for rule in rules:
            for values, support in _eval_rule(rule, state):
                rel = rule.head.predicate
                if values not in state[rel]:
                    state[rel].add(values)
                    delta[rel].add(values)
                    provenance[(rel, values)] = (rule, support)
        while any(delta.values()):
            new_delta: dict[str, set] = {name: set() for name in members}
            for rule in rules:
                positives = rule.positive_atoms()
                for i, atom in enumerate(positives):
                    if atom.predicate not in members:
                        continue
                    if not delta[atom.predicate]:
                        continue
                    derived = _eval_rule(rule, state, i, delta[atom.predicate])
                    for values, support in derived:
                        rel = rule.head.predicate
                        if values not in state[rel]:
                            state[rel].add(values)
                            new_delta[rel].add(values)
                            provenance[(rel, values)] = (rule, support)
            delta = new_delta

    return Database(
        relations={name: frozenset(tuples) for name, tuples in state.items()},
        provenance=provenance,
    )


# ---------------------------------------------------------------------------
# Queries and provenance
# ---------------------------------------------------------------------------


def query(db: Database, pattern: Atom) -> list[dict]:
    """All substitutions of pattern variables matching a tuple.

    Results are ordered lexicographically by the matched tuple (columns of
    one relation are sort-homogeneous, so tuples compare directly).
    """
    if pattern.predicate not in db.relations:
        raise UnknownRelationError(pattern.predicate)
    relation = db.relations[pattern.predicate]
    arities = {len(values) for values in relation}
    if arities and len(pattern.args) not in arities:
        raise ArityMismatchError(pattern.predicate, arities.pop(), len(pattern.args))
    results = []
    for values in sorted(relation):
        binding = _match(pattern, values, {})
        if binding is not None:
            results.append(dict(binding))
    return results


@dataclass(frozen=True)
class Derivation:
    """One derivation tree: leaves are input facts, inner nodes rule firings."""

    fact: Atom
    rule: Rule | None
    children: tuple["Derivation", ...] = ()

    def leaves(self) -> list[Atom]:
        if self.rule is None:
            return [self.fact]
        out = []
        for child in self.children:
            out.extend(child.leaves())
        return out


def explain(db: Database, fact: Atom) -> Derivation:
    """One derivation of a ground fact; raises NotDerivableError otherwise."""
    key = (fact.predicate, fact.value_tuple())
    if fact.predicate not in db.relations or key[1] not in db.relations[fact.predicate]:
        raise NotDerivableError(print_atom(fact))
    step = db.provenance.get(key)
    if step is None:
        return Derivation(fact, None)
    rule, support = step
    children = tuple(
        explain(db, fact_tuple_to_atom(pred, values)) for pred, values in support
    )
    return Derivation(fact, rule, children)
