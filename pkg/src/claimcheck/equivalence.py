"""Structural equivalence of two programs over their dependence abstraction.

The check pairs variables (explicit ``varMap`` correspondences first, then
identical names), pairs each paired variable's definition sites by ordinal
occurrence, pairs condition/entry/exit sites, and then diffs the predicate
structure pointwise: a fact with no counterpart under the pairing, a paired
expression site whose operator or positional operands differ, a paired
definition whose control dependencies disagree, or a watch variable whose
reaching definitions at the mapped exit differ all yield mismatches.

Verdicts: Inconclusive when the sufficiency obligations fail (see
``lint_equiv``), NotEquivalent with the first mismatch as witness, else
Equivalent.  No algebraic reasoning is attempted: ``a + b`` and ``b + a``
are different computations here, and function symbols are compared by name
only.  The same diff is also emitted as a stratified Datalog program
(:func:`equiv_rules`) so the two implementations can check each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .datalog.ast import Atom, Num, Program, Sym
from .datalog.parser import parse_program
from .errors import ConflictingVarMapError
from .facts import (
    CODE1,
    CODE2,
    EquivBundle,
    EquivSide,
    LintReport,
    SiteFact,
    lint_equiv,
)

EQUIVALENT = "Equivalent"
NOT_EQUIVALENT = "NotEquivalent"
INCONCLUSIVE = "Inconclusive"

Site = tuple[str, int]


def _is_entry_cond(cond: str) -> bool:
    return cond == "Entry" or cond.startswith("Entry:")


# ---------------------------------------------------------------------------
# Pairing
# ---------------------------------------------------------------------------


@dataclass
class SitePairing:
    """Partial bijection between the two programs' names and sites."""

    var_pairs: dict[str, str] = field(default_factory=dict)
    var_pairs_rev: dict[str, str] = field(default_factory=dict)
    # (var1, site1, var2, site2), one entry per paired definition
    def_site_pairs: list[tuple[str, Site, str, Site]] = field(default_factory=list)
    cond_site_pairs: list[tuple[Site, Site]] = field(default_factory=list)
    entry_pairs: list[tuple[tuple[str, int], tuple[str, int]]] = field(
        default_factory=list
    )
    exit_pairs: list[tuple[Site, Site]] = field(default_factory=list)
    line_map: dict[Site, Site] = field(default_factory=dict)
    line_map_rev: dict[Site, Site] = field(default_factory=dict)
    residue_defs_1: list[tuple[str, Site]] = field(default_factory=list)
    residue_defs_2: list[tuple[str, Site]] = field(default_factory=list)
    residue_vars_1: list[str] = field(default_factory=list)
    residue_vars_2: list[str] = field(default_factory=list)

    def map_line(self, site: Site) -> Site:
        return self.line_map.get(site, site)

    def map_line_rev(self, site: Site) -> Site:
        return self.line_map_rev.get(site, site)

    def cond_paired(self, cond1: str, cond2: str) -> bool:
        if _is_entry_cond(cond1) and _is_entry_cond(cond2):
            return True
        return self.var_pairs.get(cond1) == cond2

    def is_empty(self) -> bool:
        return not (self.var_pairs or self.def_site_pairs or self.exit_pairs)


def _def_sites(side: EquivSide, var: str) -> list[Site]:
    return sorted({(f.file, f.line) for f in side.defs if f.var == var})


def _cond_sites(side: EquivSide, cond: str) -> list[Site]:
    return sorted(
        {(f.cond_file, f.cond_line) for f in side.controldeps if f.cond == cond}
    )


def build_pairing(bundle: EquivBundle) -> SitePairing:
    pairing = SitePairing()
    vars1 = bundle.code1.variables()
    vars2 = bundle.code2.variables()

    for m in sorted(bundle.var_maps):
        existing = pairing.var_pairs.get(m.var1)
        if existing is not None and existing != m.var2:
            raise ConflictingVarMapError(m.var1)
        existing_rev = pairing.var_pairs_rev.get(m.var2)
        if existing_rev is not None and existing_rev != m.var1:
            raise ConflictingVarMapError(m.var2)
        pairing.var_pairs[m.var1] = m.var2
        pairing.var_pairs_rev[m.var2] = m.var1
    for name in sorted(vars1 & vars2):
        if name not in pairing.var_pairs and name not in pairing.var_pairs_rev:
            pairing.var_pairs[name] = name
            pairing.var_pairs_rev[name] = name
    pairing.residue_vars_1 = sorted(vars1 - set(pairing.var_pairs))
    pairing.residue_vars_2 = sorted(vars2 - set(pairing.var_pairs_rev))

    paired_sites_1: set[tuple[str, Site]] = set()
    paired_sites_2: set[tuple[str, Site]] = set()
    for var1 in sorted(pairing.var_pairs):
        var2 = pairing.var_pairs[var1]
        sites1 = _def_sites(bundle.code1, var1)
        sites2 = _def_sites(bundle.code2, var2)
        for s1, s2 in zip(sites1, sites2):
            pairing.def_site_pairs.append((var1, s1, var2, s2))
            paired_sites_1.add((var1, s1))
            paired_sites_2.add((var2, s2))
    pairing.residue_defs_1 = sorted(
        {
            (f.var, (f.file, f.line))
            for f in bundle.code1.defs
            if (f.var, (f.file, f.line)) not in paired_sites_1
        }
    )
    pairing.residue_defs_2 = sorted(
        {
            (f.var, (f.file, f.line))
            for f in bundle.code2.defs
            if (f.var, (f.file, f.line)) not in paired_sites_2
        }
    )

    for cond1 in sorted({f.cond for f in bundle.code1.controldeps}):
        if _is_entry_cond(cond1) or cond1 not in pairing.var_pairs:
            continue
        cond2 = pairing.var_pairs[cond1]
        for s1, s2 in zip(
            _cond_sites(bundle.code1, cond1), _cond_sites(bundle.code2, cond2)
        ):
            pairing.cond_site_pairs.append((s1, s2))
    sites1 = sorted({(f.file, f.line) for f in bundle.code1.cond_with_expr})
    sites2 = sorted({(f.file, f.line) for f in bundle.code2.cond_with_expr})
    pairing.cond_site_pairs.extend(zip(sites1, sites2))

    if bundle.entry_maps:
        for m in sorted(bundle.entry_maps):
            pairing.entry_pairs.append(((m.label1, m.line1), (m.label2, m.line2)))
    else:
        lines1 = {f.line for f in bundle.code1.entries}
        lines2 = {f.line for f in bundle.code2.entries}
        for line in sorted(lines1 & lines2):
            pairing.entry_pairs.append((("main", line), ("main", line)))
    if bundle.exit_maps:
        for m in sorted(bundle.exit_maps):
            pairing.exit_pairs.append(((m.file1, m.line1), (m.file2, m.line2)))
    else:
        sites1 = {(f.file, f.line) for f in bundle.code1.exits}
        sites2 = {(f.file, f.line) for f in bundle.code2.exits}
        for site in sorted(sites1 & sites2):
            pairing.exit_pairs.append((site, site))

    def register(site1: Site, site2: Site) -> None:
        pairing.line_map.setdefault(site1, site2)
        pairing.line_map_rev.setdefault(site2, site1)

    for _, s1, _, s2 in pairing.def_site_pairs:
        register(s1, s2)
    for s1, s2 in pairing.cond_site_pairs:
        register(s1, s2)
    for s1, s2 in pairing.exit_pairs:
        register(s1, s2)
    entry_files_1 = {f.file for f in bundle.code1.entries}
    entry_files_2 = {f.file for f in bundle.code2.entries}
    for (label1, line1), (label2, line2) in pairing.entry_pairs:
        for file1 in sorted(entry_files_1) or [label1]:
            for file2 in sorted(entry_files_2) or [label2]:
                register((file1, line1), (file2, line2))
    return pairing


# ---------------------------------------------------------------------------
# Mismatches
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Mismatch:
    kind: str
    file: str
    line: int
    subject: str
    detail: str
    side1: tuple[str, ...] = ()
    side2: tuple[str, ...] = ()

    def project(self) -> tuple[str, str, int, str]:
        return (self.kind, self.file, self.line, self.subject)

    def sort_key(self) -> tuple:
        return (self.file, self.line, self.kind, self.subject, self.detail)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "file": self.file,
            "line": self.line,
            "subject": self.subject,
            "detail": self.detail,
            "code1_facts": list(self.side1),
            "code2_facts": list(self.side2),
        }


def _use_repr(f: SiteFact, predicate: str = "use") -> str:
    return f'{predicate}("{f.var}", "{f.file}", {f.line})'


def diff_structure(bundle: EquivBundle, pairing: SitePairing) -> list[Mismatch]:
    """Pointwise structural diff; empty means isomorphic modulo the pairing."""
    out: list[Mismatch] = []
    sides = (
        (bundle.code1, bundle.code2, pairing.var_pairs, pairing.map_line, CODE1),
        (bundle.code2, bundle.code1, pairing.var_pairs_rev, pairing.map_line_rev, CODE2),
    )

    for var, (file, line) in pairing.residue_defs_1:
        out.append(
            Mismatch(
                "unpaired_def", file, line, var,
                f"{CODE1} defines {var!r} at {file}:{line} with no paired "
                "definition on the other side",
                side1=(f'def("{var}", "{file}", {line})',),
            )
        )
    for var, (file, line) in pairing.residue_defs_2:
        out.append(
            Mismatch(
                "unpaired_def", file, line, var,
                f"{CODE2} defines {var!r} at {file}:{line} with no paired "
                "definition on the other side",
                side2=(f'def("{var}", "{file}", {line})',),
            )
        )

    for here, there, var_map, map_line, tag in sides:
        is_code1 = tag == CODE1
        for f in sorted(here.uses):
            if f.var not in var_map:
                out.append(
                    Mismatch(
                        "unpaired_use", f.file, f.line, f.var,
                        f"{tag} uses {f.var!r}, a variable with no pair",
                        side1=(_use_repr(f),) if is_code1 else (),
                        side2=() if is_code1 else (_use_repr(f),),
                    )
                )
                continue
            other = SiteFact(var_map[f.var], *map_line((f.file, f.line)))
            if other not in there.uses:
                out.append(
                    Mismatch(
                        "missing_use", f.file, f.line, f.var,
                        f"{tag} has {_use_repr(f)} with no counterpart "
                        f"{_use_repr(other)}",
                        side1=(_use_repr(f),) if is_code1 else (),
                        side2=() if is_code1 else (_use_repr(f),),
                    )
                )
        for f in sorted(here.flows):
            rendered = (
                f'flow("{f.src_var}", "{f.src_file}", {f.src_line}, '
                f'"{f.dst_var}", "{f.dst_file}", {f.dst_line})'
            )
            unpaired = [v for v in (f.src_var, f.dst_var) if v not in var_map]
            if unpaired:
                for v in dict.fromkeys(unpaired):
                    out.append(
                        Mismatch(
                            "unpaired_flow", f.src_file, f.src_line, v,
                            f"{tag} flow mentions {v!r}, a variable with no pair",
                            side1=(rendered,) if is_code1 else (),
                            side2=() if is_code1 else (rendered,),
                        )
                    )
                continue
            src = map_line((f.src_file, f.src_line))
            dst = map_line((f.dst_file, f.dst_line))
            image = type(f)(
                var_map[f.src_var], src[0], src[1],
                var_map[f.dst_var], dst[0], dst[1],
            )
            if image not in there.flows:
                out.append(
                    Mismatch(
                        "missing_flow", f.src_file, f.src_line, f.src_var,
                        f"{tag} has {rendered} with no counterpart under the "
                        "pairing",
                        side1=(rendered,) if is_code1 else (),
                        side2=() if is_code1 else (rendered,),
                    )
                )
        for f in sorted(here.def_with_expr):
            rendered = _use_repr(f, "defWithExpr")
            if f.var not in var_map:
                out.append(
                    Mismatch(
                        "unpaired_defexpr", f.file, f.line, f.var,
                        f"{tag} has {rendered} for a variable with no pair",
                        side1=(rendered,) if is_code1 else (),
                        side2=() if is_code1 else (rendered,),
                    )
                )
                continue
            other = SiteFact(var_map[f.var], *map_line((f.file, f.line)))
            if other not in there.def_with_expr:
                out.append(
                    Mismatch(
                        "missing_defexpr", f.file, f.line, f.var,
                        f"{tag} has {rendered} with no counterpart",
                        side1=(rendered,) if is_code1 else (),
                        side2=() if is_code1 else (rendered,),
                    )
                )
        for f in sorted(here.cond_with_expr):
            mapped = map_line((f.file, f.line))
            if not any((c.file, c.line) == mapped for c in there.cond_with_expr):
                rendered = f'condWithExpr("{f.file}", {f.line})'
                out.append(
                    Mismatch(
                        "missing_condexpr", f.file, f.line, "-",
                        f"{tag} marks a complex condition at {f.file}:{f.line} "
                        "with no counterpart",
                        side1=(rendered,) if is_code1 else (),
                        side2=() if is_code1 else (rendered,),
                    )
                )

    out.extend(_diff_expressions(bundle, pairing))
    out.extend(_diff_controldeps(bundle, pairing))
    out.extend(_diff_constants(bundle, pairing))
    return sorted(out, key=Mismatch.sort_key)


def _diff_expressions(bundle: EquivBundle, pairing: SitePairing) -> list[Mismatch]:
    # Grouped by the code1 site so the comparison matches the generated
    # Datalog exactly: all code2 sites paired with one code1 site contribute
    # to a single agreement check.
    targets: dict[Site, set[Site]] = {}
    subjects: dict[Site, set[str]] = {}
    for var1, s1, _, s2 in pairing.def_site_pairs:
        targets.setdefault(s1, set()).add(s2)
        subjects.setdefault(s1, set()).add(var1)
    for s1, s2 in pairing.cond_site_pairs:
        targets.setdefault(s1, set()).add(s2)
        subjects.setdefault(s1, set()).add("-")

    out = []
    for s1 in sorted(targets):
        s2_sites = targets[s1]
        u1 = sorted(f for f in bundle.code1.unary if (f.file, f.line) == s1)
        b1 = sorted(f for f in bundle.code1.binary if (f.file, f.line) == s1)
        u2 = sorted(
            f for f in bundle.code2.unary if (f.file, f.line) in s2_sites
        )
        b2 = sorted(
            f for f in bundle.code2.binary if (f.file, f.line) in s2_sites
        )
        if not (u1 or b1 or u2 or b2):
            continue

        def u_agrees_fwd(f) -> bool:
            return any(
                g.op == f.op and pairing.var_pairs.get(f.operand) == g.operand
                for g in u2
            )

        def u_agrees_rev(g) -> bool:
            return any(
                f.op == g.op and pairing.var_pairs.get(f.operand) == g.operand
                for f in u1
            )

        def b_agrees_fwd(f) -> bool:
            return any(
                g.op == f.op
                and pairing.var_pairs.get(f.left) == g.left
                and pairing.var_pairs.get(f.right) == g.right
                for g in b2
            )

        def b_agrees_rev(g) -> bool:
            return any(
                f.op == g.op
                and pairing.var_pairs.get(f.left) == g.left
                and pairing.var_pairs.get(f.right) == g.right
                for f in b1
            )

        differs = (
            any(not u_agrees_fwd(f) for f in u1)
            or any(not u_agrees_rev(g) for g in u2)
            or any(not b_agrees_fwd(f) for f in b1)
            or any(not b_agrees_rev(g) for g in b2)
        )
        if differs:
            render1 = tuple(
                f'unaryFun("{f.op}", "{f.operand}", "{f.file}", {f.line})' for f in u1
            ) + tuple(
                f'binaryFun("{f.op}", "{f.left}", "{f.right}", "{f.file}", {f.line})'
                for f in b1
            )
            render2 = tuple(
                f'unaryFun("{f.op}", "{f.operand}", "{f.file}", {f.line})' for f in u2
            ) + tuple(
                f'binaryFun("{f.op}", "{f.left}", "{f.right}", "{f.file}", {f.line})'
                for f in b2
            )
            for subject in sorted(subjects[s1]):
                out.append(
                    Mismatch(
                        "expr_mismatch", s1[0], s1[1], subject,
                        "expression structure differs at paired site "
                        f"{s1[0]}:{s1[1]}: "
                        f"{', '.join(render1) or 'nothing'} vs "
                        f"{', '.join(render2) or 'nothing'}",
                        side1=render1,
                        side2=render2,
                    )
                )
    return out


def _diff_controldeps(bundle: EquivBundle, pairing: SitePairing) -> list[Mismatch]:
    out = []
    for var1, s1, var2, s2 in pairing.def_site_pairs:
        cd1 = sorted(
            f
            for f in bundle.code1.controldeps
            if f.var == var1 and (f.file, f.line) == s1
        )
        cd2 = sorted(
            f
            for f in bundle.code2.controldeps
            if f.var == var2 and (f.file, f.line) == s2
        )
        if not cd1 and not cd2:
            continue

        def agrees_fwd(fact):
            return any(
                g.branch == fact.branch and pairing.cond_paired(fact.cond, g.cond)
                for g in cd2
            )

        def agrees_rev(fact):
            return any(
                f.branch == fact.branch and pairing.cond_paired(f.cond, fact.cond)
                for f in cd1
            )

        if all(agrees_fwd(f) for f in cd1) and all(agrees_rev(g) for g in cd2):
            continue

        def render(f):
            return (
                f'controldep("{f.var}", "{f.file}", {f.line}, "{f.cond}", '
                f'"{f.branch}", "{f.cond_file}", {f.cond_line})'
            )
        out.append(
            Mismatch(
                "controldep_mismatch", s1[0], s1[1], var1,
                f"control dependencies of {var1!r} at {s1[0]}:{s1[1]} and "
                f"{var2!r} at {s2[0]}:{s2[1]} disagree",
                side1=tuple(render(f) for f in cd1),
                side2=tuple(render(f) for f in cd2),
            )
        )
    return out


def _diff_constants(bundle: EquivBundle, pairing: SitePairing) -> list[Mismatch]:
    out = []

    def fact(name):
        return (f'isConstantValue("{name}")',)

    for name in sorted(bundle.code1.constants):
        paired = pairing.var_pairs.get(name)
        if paired is None:
            out.append(
                Mismatch(
                    "constant_mismatch", "-", 0, name,
                    f"{CODE1} constant {name!r} has no paired variable",
                    side1=fact(name),
                )
            )
        elif paired not in bundle.code2.constants:
            out.append(
                Mismatch(
                    "constant_mismatch", "-", 0, name,
                    f"{CODE1} constant {name!r} pairs with {paired!r}, which is "
                    "not a constant on the other side",
                    side1=fact(name),
                )
            )
        elif paired != name:
            out.append(
                Mismatch(
                    "constant_mismatch", "-", 0, name,
                    f"constants are compared by literal text: {name!r} vs "
                    f"{paired!r}",
                    side1=fact(name),
                    side2=fact(paired),
                )
            )
    for name in sorted(bundle.code2.constants):
        paired = pairing.var_pairs_rev.get(name)
        if paired is None:
            out.append(
                Mismatch(
                    "constant_mismatch", "-", 0, name,
                    f"{CODE2} constant {name!r} has no paired variable",
                    side2=fact(name),
                )
            )
        elif paired not in bundle.code1.constants:
            out.append(
                Mismatch(
                    "constant_mismatch", "-", 0, name,
                    f"{CODE2} constant {name!r} pairs with {paired!r}, which is "
                    "not a constant on the other side",
                    side2=fact(name),
                )
            )
    return out


def check_watchvars(bundle: EquivBundle, pairing: SitePairing) -> list[Mismatch]:
    """The two universally quantified watch-variable obligations.

    Every watch variable must have a paired watch variable on the other
    side, and each pair's reaching definitions at the mapped exits (the
    flows into the exit-line use) must correspond under the site pairing.
    """
    out: list[Mismatch] = []
    watched1 = {f.var for f in bundle.code1.watch_vars}
    watched2 = {f.var for f in bundle.code2.watch_vars}
    pairs: list[tuple[str, str]] = []
    for f in sorted(bundle.code1.watch_vars):
        counterpart = pairing.var_pairs.get(f.var)
        if counterpart is None or counterpart not in watched2:
            out.append(
                Mismatch(
                    "watchvar_unmatched", f.file, f.line, f.var,
                    f"{CODE1} watches {f.var!r} but the other side does not "
                    "watch its pair",
                    side1=(_use_repr(f, "watchVar"),),
                )
            )
        else:
            pairs.append((f.var, counterpart))
    for f in sorted(bundle.code2.watch_vars):
        counterpart = pairing.var_pairs_rev.get(f.var)
        if counterpart is None or counterpart not in watched1:
            out.append(
                Mismatch(
                    "watchvar_unmatched", f.file, f.line, f.var,
                    f"{CODE2} watches {f.var!r} but the other side does not "
                    "watch its pair",
                    side2=(_use_repr(f, "watchVar"),),
                )
            )

    for var1, var2 in sorted(dict.fromkeys(pairs).keys()):
        for (ef1, e1), (ef2, e2) in pairing.exit_pairs:
            reach1 = {
                (f.src_file, f.src_line)
                for f in bundle.code1.flows
                if f.src_var == var1 and f.dst_var == var1
                and (f.dst_file, f.dst_line) == (ef1, e1)
            }
            reach2 = {
                (f.src_file, f.src_line)
                for f in bundle.code2.flows
                if f.src_var == var2 and f.dst_var == var2
                and (f.dst_file, f.dst_line) == (ef2, e2)
            }
            for site in sorted(reach1):
                if pairing.map_line(site) not in reach2:
                    rendered = (
                        f'flow("{var1}", "{site[0]}", {site[1]}, '
                        f'"{var1}", "{ef1}", {e1})'
                    )
                    out.append(
                        Mismatch(
                            "reaching_defs_differ", site[0], site[1], var1,
                            f"definition of {var1!r} at {site[0]}:{site[1]} "
                            f"reaches the exit at {ef1}:{e1} with no paired "
                            "reaching definition on the other side",
                            side1=(rendered,),
                        )
                    )
            for site in sorted(reach2):
                if pairing.map_line_rev(site) not in reach1:
                    rendered = (
                        f'flow("{var2}", "{site[0]}", {site[1]}, '
                        f'"{var2}", "{ef2}", {e2})'
                    )
                    out.append(
                        Mismatch(
                            "reaching_defs_differ", site[0], site[1], var2,
                            f"definition of {var2!r} at {site[0]}:{site[1]} "
                            f"reaches the exit at {ef2}:{e2} with no paired "
                            "reaching definition on the other side",
                            side2=(rendered,),
                        )
                    )
    return sorted(out, key=Mismatch.sort_key)


# ---------------------------------------------------------------------------
# Verdict
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquivVerdict:
    outcome: str
    witness: Mismatch | None = None
    obligations: tuple[str, ...] = ()
    mismatches: tuple[Mismatch, ...] = ()
    lint: LintReport = field(default_factory=LintReport)

    def to_json(self) -> dict:
        return {
            "outcome": self.outcome,
            "witness": self.witness.to_json() if self.witness else None,
            "obligations": list(self.obligations),
            "mismatch_count": len(self.mismatches),
            "lint": self.lint.to_json(),
        }


def verify_equiv(bundle: EquivBundle) -> EquivVerdict:
    lint = lint_equiv(bundle)
    if lint.errors:
        return EquivVerdict(
            INCONCLUSIVE,
            obligations=tuple(issue.message for issue in lint.errors),
            lint=lint,
        )
    pairing = build_pairing(bundle)
    mismatches = tuple(diff_structure(bundle, pairing)) + tuple(
        check_watchvars(bundle, pairing)
    )
    if mismatches:
        return EquivVerdict(
            NOT_EQUIVALENT, witness=mismatches[0], mismatches=mismatches, lint=lint
        )
    return EquivVerdict(EQUIVALENT, lint=lint)


def all_mismatches(bundle: EquivBundle, pairing: SitePairing) -> list[Mismatch]:
    return list(diff_structure(bundle, pairing)) + list(
        check_watchvars(bundle, pairing)
    )


# ---------------------------------------------------------------------------
# The same diff as a stratified Datalog program
# ---------------------------------------------------------------------------

_EQUIV_RULES = """
// Helpers over pairing facts.
paired_def_site1(x, f, l) :- pair_def_site(x, f, l, _, _, _).
paired_def_site2(y, f, l) :- pair_def_site(_, _, _, y, f, l).
var_paired1(x) :- pair_var(x, _).
var_paired2(y) :- pair_var(_, y).

mismatch("unpaired_def", f, l, x) :- def_c1(x, f, l), !paired_def_site1(x, f, l).
mismatch("unpaired_def", f, l, y) :- def_c2(y, f, l), !paired_def_site2(y, f, l).

mismatch("unpaired_use", f, l, x) :- use_c1(x, f, l), !var_paired1(x).
mismatch("unpaired_use", f, l, y) :- use_c2(y, f, l), !var_paired2(y).
mismatch("missing_use", f, l, x) :-
    use_c1(x, f, l), pair_var(x, y), pair_line(f, l, f2, l2), !use_c2(y, f2, l2).
mismatch("missing_use", f, l, y) :-
    use_c2(y, f, l), pair_var(x, y), pair_line_rev(f, l, f1, l1), !use_c1(x, f1, l1).

mismatch("unpaired_flow", fa, la, x) :- flow_c1(x, fa, la, y, fb, lb), !var_paired1(x).
mismatch("unpaired_flow", fa, la, y) :- flow_c1(x, fa, la, y, fb, lb), !var_paired1(y).
mismatch("unpaired_flow", fa, la, x) :- flow_c2(x, fa, la, y, fb, lb), !var_paired2(x).
mismatch("unpaired_flow", fa, la, y) :- flow_c2(x, fa, la, y, fb, lb), !var_paired2(y).
mismatch("missing_flow", fa, la, x) :-
    flow_c1(x, fa, la, y, fb, lb), pair_var(x, x2), pair_var(y, y2),
    pair_line(fa, la, fa2, la2), pair_line(fb, lb, fb2, lb2),
    !flow_c2(x2, fa2, la2, y2, fb2, lb2).
mismatch("missing_flow", fa, la, x) :-
    flow_c2(x, fa, la, y, fb, lb), pair_var(x1, x), pair_var(y1, y),
    pair_line_rev(fa, la, fa1, la1), pair_line_rev(fb, lb, fb1, lb1),
    !flow_c1(x1, fa1, la1, y1, fb1, lb1).

mismatch("unpaired_defexpr", f, l, x) :- defexpr_c1(x, f, l), !var_paired1(x).
mismatch("unpaired_defexpr", f, l, y) :- defexpr_c2(y, f, l), !var_paired2(y).
mismatch("missing_defexpr", f, l, x) :-
    defexpr_c1(x, f, l), pair_var(x, y), pair_line(f, l, f2, l2),
    !defexpr_c2(y, f2, l2).
mismatch("missing_defexpr", f, l, y) :-
    defexpr_c2(y, f, l), pair_var(x, y), pair_line_rev(f, l, f1, l1),
    !defexpr_c1(x, f1, l1).

mismatch("missing_condexpr", f, l, "-") :-
    condexpr_c1(f, l), pair_line(f, l, f2, l2), !condexpr_c2(f2, l2).
mismatch("missing_condexpr", f, l, "-") :-
    condexpr_c2(f, l), pair_line_rev(f, l, f1, l1), !condexpr_c1(f1, l1).

// Expression comparison at paired sites: same operator, positional operands.
site_pair(f1, l1, f2, l2) :- pair_def_site(_, f1, l1, _, f2, l2).
site_pair(f1, l1, f2, l2) :- pair_cond_site(f1, l1, f2, l2).
agree_u1(f1, l1, op) :-
    site_pair(f1, l1, f2, l2), unary_c1(op, a, f1, l1), unary_c2(op, b, f2, l2),
    pair_var(a, b).
agree_u2(f2, l2, op) :-
    site_pair(f1, l1, f2, l2), unary_c2(op, b, f2, l2), unary_c1(op, a, f1, l1),
    pair_var(a, b).
agree_b1(f1, l1, op) :-
    site_pair(f1, l1, f2, l2), binary_c1(op, a1, a2, f1, l1),
    binary_c2(op, b1, b2, f2, l2), pair_var(a1, b1), pair_var(a2, b2).
agree_b2(f2, l2, op) :-
    site_pair(f1, l1, f2, l2), binary_c2(op, b1, b2, f2, l2),
    binary_c1(op, a1, a2, f1, l1), pair_var(a1, b1), pair_var(a2, b2).
expr_differs(f1, l1) :-
    site_pair(f1, l1, f2, l2), unary_c1(op, a, f1, l1), !agree_u1(f1, l1, op).
expr_differs(f1, l1) :-
    site_pair(f1, l1, f2, l2), unary_c2(op, b, f2, l2), !agree_u2(f2, l2, op).
expr_differs(f1, l1) :-
    site_pair(f1, l1, f2, l2), binary_c1(op, a1, a2, f1, l1), !agree_b1(f1, l1, op).
expr_differs(f1, l1) :-
    site_pair(f1, l1, f2, l2), binary_c2(op, b1, b2, f2, l2), !agree_b2(f2, l2, op).
mismatch("expr_mismatch", f1, l1, x) :-
    pair_def_site(x, f1, l1, _, _, _), expr_differs(f1, l1).
mismatch("expr_mismatch", f1, l1, "-") :-
    pair_cond_site(f1, l1, _, _), expr_differs(f1, l1).

// Control dependencies at paired definition sites: paired condition
// variable and identical branch flag.
agree_cd1(x, f1, l1, c, br) :-
    pair_def_site(x, f1, l1, y, f2, l2), cdep_c1(x, f1, l1, c, br, _, _),
    cdep_c2(y, f2, l2, c2, br, _, _), cond_pair(c, c2).
agree_cd2(y, f2, l2, c, br) :-
    pair_def_site(x, f1, l1, y, f2, l2), cdep_c2(y, f2, l2, c, br, _, _),
    cdep_c1(x, f1, l1, c1, br, _, _), cond_pair(c1, c).
mismatch("controldep_mismatch", f1, l1, x) :-
    pair_def_site(x, f1, l1, y, f2, l2), cdep_c1(x, f1, l1, c, br, _, _),
    !agree_cd1(x, f1, l1, c, br).
mismatch("controldep_mismatch", f1, l1, x) :-
    pair_def_site(x, f1, l1, y, f2, l2), cdep_c2(y, f2, l2, c, br, _, _),
    !agree_cd2(y, f2, l2, c, br).

// Constants: compared by literal text.
mismatch("constant_mismatch", "-", 0, x) :- const_c1(x), !var_paired1(x).
mismatch("constant_mismatch", "-", 0, x) :-
    const_c1(x), pair_var(x, y), !const_c2(y).
mismatch("constant_mismatch", "-", 0, x) :-
    const_c1(x), pair_var(x, y), const_c2(y), !pair_var_same(x, y).
mismatch("constant_mismatch", "-", 0, y) :- const_c2(y), !var_paired2(y).
mismatch("constant_mismatch", "-", 0, y) :-
    const_c2(y), pair_var(x, y), !const_c1(x).

// Watch variables and their reaching definitions at mapped exits.
watch_pair(x, y) :- watch_c1(x, f1, l1), watch_c2(y, f2, l2), pair_var(x, y).
watch_has_pair1(x) :- watch_pair(x, _).
watch_has_pair2(y) :- watch_pair(_, y).
mismatch("watchvar_unmatched", f, l, x) :- watch_c1(x, f, l), !watch_has_pair1(x).
mismatch("watchvar_unmatched", f, l, y) :- watch_c2(y, f, l), !watch_has_pair2(y).
mismatch("reaching_defs_differ", sf, sl, x) :-
    watch_pair(x, y), pair_exit(ef1, e1, ef2, e2), flow_c1(x, sf, sl, x, ef1, e1),
    pair_line(sf, sl, sf2, sl2), !flow_c2(y, sf2, sl2, y, ef2, e2).
mismatch("reaching_defs_differ", sf, sl, y) :-
    watch_pair(x, y), pair_exit(ef1, e1, ef2, e2), flow_c2(y, sf, sl, y, ef2, e2),
    pair_line_rev(sf, sl, sf1, sl1), !flow_c1(x, sf1, sl1, x, ef1, e1).

has_mismatch() :- mismatch(_, _, _, _).
equivalent() :- !has_mismatch().
"""

_DECLS = """
.decl def_c1(x: symbol, f: symbol, l: number)
.decl def_c2(x: symbol, f: symbol, l: number)
.decl use_c1(x: symbol, f: symbol, l: number)
.decl use_c2(x: symbol, f: symbol, l: number)
.decl flow_c1(x: symbol, f1: symbol, l1: number, y: symbol, f2: symbol, l2: number)
.decl flow_c2(x: symbol, f1: symbol, l1: number, y: symbol, f2: symbol, l2: number)
.decl cdep_c1(x: symbol, f1: symbol, l1: number, c: symbol, br: symbol, f2: symbol, l2: number)
.decl cdep_c2(x: symbol, f1: symbol, l1: number, c: symbol, br: symbol, f2: symbol, l2: number)
.decl defexpr_c1(x: symbol, f: symbol, l: number)
.decl defexpr_c2(x: symbol, f: symbol, l: number)
.decl condexpr_c1(f: symbol, l: number)
.decl condexpr_c2(f: symbol, l: number)
.decl unary_c1(op: symbol, a: symbol, f: symbol, l: number)
.decl unary_c2(op: symbol, a: symbol, f: symbol, l: number)
.decl binary_c1(op: symbol, a: symbol, b: symbol, f: symbol, l: number)
.decl binary_c2(op: symbol, a: symbol, b: symbol, f: symbol, l: number)
.decl const_c1(x: symbol)
.decl const_c2(x: symbol)
.decl watch_c1(x: symbol, f: symbol, l: number)
.decl watch_c2(x: symbol, f: symbol, l: number)
.decl entry_c1(fn: symbol, f: symbol, l: number)
.decl entry_c2(fn: symbol, f: symbol, l: number)
.decl exit_c1(f: symbol, l: number)
.decl exit_c2(f: symbol, l: number)
.decl pair_var(x: symbol, y: symbol)
.decl pair_var_same(x: symbol, y: symbol)
.decl cond_pair(x: symbol, y: symbol)
.decl pair_def_site(x: symbol, f1: symbol, l1: number, y: symbol, f2: symbol, l2: number)
.decl pair_cond_site(f1: symbol, l1: number, f2: symbol, l2: number)
.decl pair_line(f1: symbol, l1: number, f2: symbol, l2: number)
.decl pair_line_rev(f2: symbol, l2: number, f1: symbol, l1: number)
.decl pair_exit(f1: symbol, l1: number, f2: symbol, l2: number)
.decl mismatch(kind: symbol, f: symbol, l: number, subject: symbol)
.decl has_mismatch()
.decl equivalent()
"""


def _side_facts(side: EquivSide, suffix: str) -> Iterable[Atom]:
    s = lambda t: Sym(t)
    n = lambda v: Num(v)
    for f in sorted(side.defs):
        yield Atom(f"def_{suffix}", (s(f.var), s(f.file), n(f.line)))
    for f in sorted(side.uses):
        yield Atom(f"use_{suffix}", (s(f.var), s(f.file), n(f.line)))
    for f in sorted(side.flows):
        yield Atom(
            f"flow_{suffix}",
            (
                s(f.src_var), s(f.src_file), n(f.src_line),
                s(f.dst_var), s(f.dst_file), n(f.dst_line),
            ),
        )
    for f in sorted(side.controldeps):
        yield Atom(
            f"cdep_{suffix}",
            (
                s(f.var), s(f.file), n(f.line),
                s(f.cond), s(f.branch), s(f.cond_file), n(f.cond_line),
            ),
        )
    for f in sorted(side.def_with_expr):
        yield Atom(f"defexpr_{suffix}", (s(f.var), s(f.file), n(f.line)))
    for f in sorted(side.cond_with_expr):
        yield Atom(f"condexpr_{suffix}", (s(f.file), n(f.line)))
    for f in sorted(side.unary):
        yield Atom(f"unary_{suffix}", (s(f.op), s(f.operand), s(f.file), n(f.line)))
    for f in sorted(side.binary):
        yield Atom(
            f"binary_{suffix}", (s(f.op), s(f.left), s(f.right), s(f.file), n(f.line))
        )
    for name in sorted(side.constants):
        yield Atom(f"const_{suffix}", (s(name),))
    for f in sorted(side.watch_vars):
        yield Atom(f"watch_{suffix}", (s(f.var), s(f.file), n(f.line)))
    for f in sorted(side.entries):
        yield Atom(f"entry_{suffix}", (s(f.function), s(f.file), n(f.line)))
    for f in sorted(side.exits):
        yield Atom(f"exit_{suffix}", (s(f.file), n(f.line)))


def _fact_lines(side: EquivSide) -> set[Site]:
    lines: set[Site] = set()
    for f in side.uses | side.defs | side.def_with_expr | side.watch_vars:
        lines.add((f.file, f.line))
    for f in side.flows:
        lines.add((f.src_file, f.src_line))
        lines.add((f.dst_file, f.dst_line))
    for f in side.controldeps:
        lines.add((f.file, f.line))
        lines.add((f.cond_file, f.cond_line))
    for f in side.cond_with_expr:
        lines.add((f.file, f.line))
    for f in side.unary | side.binary:
        lines.add((f.file, f.line))
    for f in side.exits:
        lines.add((f.file, f.line))
    return lines


def equiv_rules(bundle: EquivBundle, pairing: SitePairing) -> Program:
    """The structural diff as Datalog over the bundle plus pairing facts.

    Evaluating the program derives one ``mismatch(kind, file, line, subject)``
    tuple per structural difference; the tuple set equals the projections of
    :func:`diff_structure` and :func:`check_watchvars`, and ``equivalent()``
    holds exactly when that union is empty.
    """
    program = parse_program(_DECLS + _EQUIV_RULES, validate=False)
    program.facts.extend(_side_facts(bundle.code1, "c1"))
    program.facts.extend(_side_facts(bundle.code2, "c2"))
    s = lambda t: Sym(t)
    n = lambda v: Num(v)
    for x in sorted(pairing.var_pairs):
        y = pairing.var_pairs[x]
        program.facts.append(Atom("pair_var", (s(x), s(y))))
        if x == y:
            program.facts.append(Atom("pair_var_same", (s(x), s(y))))
    conds1 = {f.cond for f in bundle.code1.controldeps}
    conds2 = {f.cond for f in bundle.code2.controldeps}
    cond_pairs = {
        (x, y) for x, y in pairing.var_pairs.items() if x in conds1 or y in conds2
    }
    for e1 in conds1:
        if _is_entry_cond(e1):
            for e2 in conds2:
                if _is_entry_cond(e2):
                    cond_pairs.add((e1, e2))
    for x, y in sorted(cond_pairs):
        program.facts.append(Atom("cond_pair", (s(x), s(y))))
    for var1, (f1, l1), var2, (f2, l2) in pairing.def_site_pairs:
        program.facts.append(
            Atom("pair_def_site", (s(var1), s(f1), n(l1), s(var2), s(f2), n(l2)))
        )
    for (f1, l1), (f2, l2) in pairing.cond_site_pairs:
        program.facts.append(Atom("pair_cond_site", (s(f1), n(l1), s(f2), n(l2))))
    for (f1, l1), (f2, l2) in pairing.exit_pairs:
        program.facts.append(Atom("pair_exit", (s(f1), n(l1), s(f2), n(l2))))
    for site in sorted(_fact_lines(bundle.code1)):
        mapped = pairing.map_line(site)
        program.facts.append(
            Atom("pair_line", (s(site[0]), n(site[1]), s(mapped[0]), n(mapped[1])))
        )
    for site in sorted(_fact_lines(bundle.code2)):
        mapped = pairing.map_line_rev(site)
        program.facts.append(
            Atom("pair_line_rev", (s(site[0]), n(site[1]), s(mapped[0]), n(mapped[1])))
        )
    from .datalog.engine import check_program

    check_program(program)
    return program
