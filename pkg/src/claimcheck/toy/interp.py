"""Concrete execution, taint execution, and the brute-force equivalence oracle.

Every operator and call is uninterpreted: applying ``op`` to argument
values yields ``mix(op, values)``, a fixed hash-based mixing function that
is deterministic across runs and platforms, reduced into the value domain
{0, 1, 2}.  The mix depends on argument order, so ``a + b`` and ``b + a``
are genuinely different computations, which keeps the positional operand
checking of the equivalence verifier semantically honest.  Guards treat
any nonzero value as true; a variable read before any executed assignment
reads as 0.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field

from ..errors import MissingInputError
from .lang import (
    BinaryDef,
    ConstDef,
    CopyDef,
    ELit,
    EVar,
    Expr,
    ExprDef,
    FreeDecl,
    GuardClose,
    GuardOpen,
    Operand,
    Output,
    Return,
    ToyProgram,
    UnaryDef,
)

VALUE_DOMAIN = (0, 1, 2)
ENUMERATION_LIMIT = 8  # free variables; 3**8 runs is the ceiling per pair


def mix(op: str, values: list[int]) -> int:
    """Uninterpreted application of ``op``, reduced into the value domain."""
    payload = op + "|" + ",".join(str(v) for v in values)
    digest = hashlib.sha256(payload.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big") % len(VALUE_DOMAIN)


@dataclass
class ExecState:
    env: dict[str, int] = field(default_factory=dict)
    outputs: list[int] = field(default_factory=list)
    exit_line: int = 0
    exit_ordinal: int = -1  # index of the return taken; -1 = fell through


def interpret(program: ToyProgram, inputs: dict[str, int]) -> ExecState:
    for var in sorted(program.free_vars):
        if var not in inputs:
            raise MissingInputError(var)
    state = ExecState()
    env = state.env

    def value(operand: Operand) -> int:
        if isinstance(operand, int):
            return operand
        return env.get(operand, 0)

    def eval_expr(expr: Expr) -> int:
        if isinstance(expr, ELit):
            return expr.value
        if isinstance(expr, EVar):
            return env.get(expr.name, 0)
        return mix(expr.op, [eval_expr(a) for a in expr.args])

    guards: list[bool] = []
    return_ordinal = -1
    for stmt in program.statements:
        if isinstance(stmt, Return):
            return_ordinal += 1
        live = all(guards)
        if isinstance(stmt, GuardOpen):
            taken = live and (bool(value(stmt.var)) != stmt.negated)
            guards.append(taken)
            continue
        if isinstance(stmt, GuardClose):
            guards.pop()
            continue
        if not live:
            continue
        if isinstance(stmt, FreeDecl):
            env[stmt.var] = inputs[stmt.var]
        elif isinstance(stmt, ConstDef):
            env[stmt.var] = stmt.value
        elif isinstance(stmt, CopyDef):
            env[stmt.var] = value(stmt.src)
        elif isinstance(stmt, UnaryDef):
            env[stmt.var] = mix(stmt.op, [value(stmt.operand)])
        elif isinstance(stmt, BinaryDef):
            env[stmt.var] = mix(stmt.op, [value(stmt.left), value(stmt.right)])
        elif isinstance(stmt, ExprDef):
            env[stmt.var] = eval_expr(stmt.expr)
        elif isinstance(stmt, Output):
            state.outputs.append(value(stmt.var))
        elif isinstance(stmt, Return):
            state.exit_line = stmt.line
            state.exit_ordinal = return_ordinal
            return state
    state.exit_line = program.line_count + 1
    return state


@dataclass
class TaintState:
    env: dict[str, int] = field(default_factory=dict)
    taint: dict[str, bool] = field(default_factory=dict)
    outputs: list[tuple[int, bool]] = field(default_factory=list)

    @property
    def tainted_output(self) -> bool:
        return any(tainted for _, tainted in self.outputs)


def first_def_sites(program: ToyProgram) -> dict[str, int]:
    """Line of the textually first declaration or definition per variable."""
    sites: dict[str, int] = {}
    for stmt in program.statements:
        if isinstance(
            stmt, (FreeDecl, ConstDef, CopyDef, UnaryDef, BinaryDef, ExprDef)
        ):
            sites.setdefault(stmt.var, stmt.line)
    return sites


def taint_interpret(
    program: ToyProgram, inputs: dict[str, int], marked: frozenset[str] | set[str]
) -> TaintState:
    """Concrete execution with data-taint bits.

    A marked variable's textually first declaration or definition seeds the
    taint (the claim is that its value there is garbage, whatever the code
    assigns); taint then propagates through copies and applications.
    """
    state = TaintState()
    env, taint = state.env, state.taint
    first_site = first_def_sites(program)

    def value(operand: Operand) -> tuple[int, bool]:
        if isinstance(operand, int):
            return operand, False
        return env.get(operand, 0), taint.get(operand, False)

    def seeds(stmt) -> bool:
        return stmt.var in marked and stmt.line == first_site.get(stmt.var)

    guards: list[bool] = []
    for stmt in program.statements:
        live = all(guards)
        if isinstance(stmt, GuardOpen):
            guards.append(live and (bool(value(stmt.var)[0]) != stmt.negated))
            continue
        if isinstance(stmt, GuardClose):
            guards.pop()
            continue
        if not live:
            continue
        if isinstance(stmt, FreeDecl):
            env[stmt.var] = inputs[stmt.var]
            taint[stmt.var] = stmt.var in marked
        elif isinstance(stmt, ConstDef):
            env[stmt.var] = stmt.value
            taint[stmt.var] = seeds(stmt)
        elif isinstance(stmt, CopyDef):
            env[stmt.var], src_taint = value(stmt.src)
            taint[stmt.var] = seeds(stmt) or src_taint
        elif isinstance(stmt, UnaryDef):
            v, t = value(stmt.operand)
            env[stmt.var] = mix(stmt.op, [v])
            taint[stmt.var] = seeds(stmt) or t
        elif isinstance(stmt, BinaryDef):
            (lv, lt), (rv, rt) = value(stmt.left), value(stmt.right)
            env[stmt.var] = mix(stmt.op, [lv, rv])
            taint[stmt.var] = seeds(stmt) or lt or rt
        elif isinstance(stmt, Output):
            state.outputs.append(value(stmt.var))
        elif isinstance(stmt, Return):
            return state
    return state


def _assignments(names: list[str]):
    for values in itertools.product(VALUE_DOMAIN, repeat=len(names)):
        yield dict(zip(names, values))


def taint_reaches_output(
    program: ToyProgram, marked: frozenset[str] | set[str]
) -> bool:
    """True when some input assignment drives a marked value into an output."""
    names = sorted(program.free_vars)
    if len(names) > ENUMERATION_LIMIT:
        raise ValueError(f"enumeration limited to {ENUMERATION_LIMIT} free variables")
    return any(
        taint_interpret(program, assignment, marked).tainted_output
        for assignment in _assignments(names)
    )


def oracle_equiv(
    program1: ToyProgram,
    program2: ToyProgram,
    var_pairing: dict[str, str] | None = None,
) -> bool:
    """Exhaustive equivalence over the finite input domain.

    True iff for every assignment to the (paired) free variables both
    programs leave every paired defined variable with the same final value
    and terminate at corresponding exits.  ``var_pairing`` maps names of
    program 1 to names of program 2; unmapped names pair with themselves.
    """
    pairing = dict(var_pairing or {})
    free1 = sorted(program1.free_vars)
    if len(free1) > ENUMERATION_LIMIT:
        raise ValueError(f"enumeration limited to {ENUMERATION_LIMIT} free variables")
    image = {pairing.get(v, v) for v in free1}
    if image != set(program2.free_vars):
        raise ValueError("free variables of the two programs do not correspond")

    reverse = {v2: v1 for v1, v2 in pairing.items()}
    watched: set[tuple[str, str]] = set()
    for v in sorted(program1.defined_vars()):
        watched.add((v, pairing.get(v, v)))
    for w in sorted(program2.defined_vars()):
        watched.add((reverse.get(w, w), w))

    for assignment in _assignments(free1):
        state1 = interpret(program1, assignment)
        state2 = interpret(
            program2, {pairing.get(v, v): x for v, x in assignment.items()}
        )
        if state1.exit_ordinal != state2.exit_ordinal:
            return False
        for v1, v2 in watched:
            if state1.env.get(v1, 0) != state2.env.get(v2, 0):
                return False
    return True
