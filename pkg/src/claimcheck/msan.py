"""Verification condition for use-of-uninitialized-value traces.

A fact set verifies when some claimed-uninitialized site reaches a claimed
use site through the reflexive-transitive closure of the claimed flows.
When the set also claims a concrete memory error, the witnessing use must
sit at a claimed error site; a chain that ends somewhere unrelated to the
reported bug does not count.  The verdict is Verified or DontKnow, never
NotVerified: absence of a chain only means the claims do not establish the
condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .datalog.ast import Atom, Num, Program, Sym
from .datalog.parser import parse_program
from .facts import LintReport, MsanFactSet, SiteFact, lint_msan

VERIFIED = "Verified"
DONT_KNOW = "DontKnow"

Site = tuple[str, str, int]  # (variable, file, line)


def _site_key(site: Site) -> tuple[str, int, str]:
    var, file, line = site
    return (file, line, var)


@dataclass(frozen=True)
class MsanVerdict:
    outcome: str
    witness: Optional[tuple[Site, ...]] = None
    lint: LintReport = field(default_factory=LintReport)

    @property
    def verified(self) -> bool:
        return self.outcome == VERIFIED

    def to_json(self) -> dict:
        chain = None
        if self.witness is not None:
            chain = [
                {"var": var, "file": file, "line": line}
                for var, file, line in self.witness
            ]
        return {"outcome": self.outcome, "chain": chain, "lint": self.lint.to_json()}


def verify_msan(fs: MsanFactSet) -> MsanVerdict:
    """Breadth-first search for the shortest qualifying flow chain.

    Ties between equally short chains break lexicographically by
    (file, line, variable) along the chain.
    """
    lint = lint_msan(fs)
    uses = {(f.var, f.file, f.line) for f in fs.uses}
    error_sites = {(f.file, f.line) for f in fs.memory_error}

    def qualifies(site: Site) -> bool:
        if site not in uses:
            return False
        if error_sites and (site[1], site[2]) not in error_sites:
            return False
        return True

    edges: dict[Site, list[Site]] = {}
    for f in fs.flow:
        src = (f.src_var, f.src_file, f.src_line)
        edges.setdefault(src, []).append((f.dst_var, f.dst_file, f.dst_line))
    for dsts in edges.values():
        dsts.sort(key=_site_key)

    starts = sorted(
        ((f.var, f.file, f.line) for f in fs.uninitialized), key=_site_key
    )
    # Parallel BFS from all uninitialized sites; the first qualifying site
    # popped has the shortest chain, and the queue is kept in tie-break order.
    best: dict[Site, tuple[Site, ...]] = {}
    frontier: list[tuple[Site, ...]] = []
    for site in starts:
        if site not in best:
            best[site] = (site,)
            frontier.append((site,))
    while frontier:
        frontier.sort(key=lambda chain: tuple(_site_key(s) for s in chain))
        for chain in frontier:
            if qualifies(chain[-1]):
                return MsanVerdict(VERIFIED, witness=chain, lint=lint)
        next_frontier: list[tuple[Site, ...]] = []
        for chain in frontier:
            for dst in edges.get(chain[-1], ()):
                if dst not in best:
                    best[dst] = chain + (dst,)
                    next_frontier.append(chain + (dst,))
        frontier = next_frontier
    return MsanVerdict(DONT_KNOW, witness=None, lint=lint)


_RULES_SOURCE = """
.decl uses(x: symbol, f: symbol, l: number)
.decl uninitialized(x: symbol, f: symbol, l: number)
.decl hasInitializer(x: symbol, m: symbol)
.decl hasMemberInitializer(x: symbol, m: symbol)
.decl allocated(x: symbol, f: symbol, l: number)
.decl declared(x: symbol, f: symbol, l: number)
.decl flow(x: symbol, f1: symbol, l1: number, y: symbol, f2: symbol, l2: number)
.decl memoryError(x: symbol, kind: symbol, f: symbol, l: number)
.decl flowStar(x: symbol, f1: symbol, l1: number, y: symbol, f2: symbol, l2: number)
.decl hasMemoryErrorClaim()
.decl satisfied()

flowStar(x, f, l, x, f, l) :- uninitialized(x, f, l).
flowStar(x, f1, l1, z, f3, l3) :- flowStar(x, f1, l1, y, f2, l2), flow(y, f2, l2, z, f3, l3).

hasMemoryErrorClaim() :- memoryError(_, _, _, _).

satisfied() :- uninitialized(x, fx, lx), flowStar(x, fx, lx, y, fy, ly),
    uses(y, fy, ly), !hasMemoryErrorClaim().
satisfied() :- uninitialized(x, fx, lx), flowStar(x, fx, lx, y, fy, ly),
    uses(y, fy, ly), memoryError(_, _, fy, ly).
"""


def msan_rules() -> Program:
    """The verification condition as a stratified rule set over the vocabulary.

    Evaluating these rules over a fact set derives ``satisfied()`` exactly
    when :func:`verify_msan` returns Verified; the two code paths are
    cross-checked in the test suite.
    """
    return parse_program(_RULES_SOURCE)


def _site_atom(predicate: str, fact: SiteFact) -> Atom:
    return Atom(predicate, (Sym(fact.var), Sym(fact.file), Num(fact.line)))


def msan_program(fs: MsanFactSet) -> Program:
    """Rules plus the fact set, ready for evaluation or export."""
    program = msan_rules()
    for f in sorted(fs.uses):
        program.facts.append(_site_atom("uses", f))
    for f in sorted(fs.uninitialized):
        program.facts.append(_site_atom("uninitialized", f))
    for f in sorted(fs.allocated):
        program.facts.append(_site_atom("allocated", f))
    for f in sorted(fs.declared):
        program.facts.append(_site_atom("declared", f))
    for f in sorted(fs.has_initializer):
        program.facts.append(Atom("hasInitializer", (Sym(f.var), Sym(f.context))))
    for f in sorted(fs.has_member_initializer):
        program.facts.append(
            Atom("hasMemberInitializer", (Sym(f.var), Sym(f.context)))
        )
    for f in sorted(fs.flow):
        program.facts.append(
            Atom(
                "flow",
                (
                    Sym(f.src_var), Sym(f.src_file), Num(f.src_line),
                    Sym(f.dst_var), Sym(f.dst_file), Num(f.dst_line),
                ),
            )
        )
    for f in sorted(fs.memory_error):
        program.facts.append(
            Atom(
                "memoryError",
                (Sym(f.var), Sym(f.kind), Sym(f.file), Num(f.line)),
            )
        )
    return program
