"""Iterative fact acquisition from a pluggable source.

A fact source is asked repeatedly for predicate instances; responses are
parsed leniently (prose is ignored, malformed fact lines are logged) and
consolidated by set union, never replacement.  The loop stops at an
iteration cap or once a re-ask contributes no new facts; the first
iteration alone never counts as convergence evidence, since there is
nothing to compare it against.
"""

from __future__ import annotations

import json
import logging
import os
import random
import re
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Protocol

from .datalog.ast import Atom, Sym, print_atom
from .datalog.parser import parse_fact_lines
from .facts import (
    CODE1,
    CODE2,
    CORRESPONDENCE,
    CORRESPONDENCE_PREDICATES,
    EquivBundle,
    MsanFactSet,
    equiv_bundle_from_atoms,
    msan_facts_from_atoms,
)
from .prompts import render_template

logger = logging.getLogger("claimcheck.loop")

MSAN, EQUIV = "msan", "equiv"
DEFAULT_MAX_ITERS = 5
URL_ENV = "CLAIMCHECK_LLM_URL"
TOKEN_ENV = "CLAIMCHECK_LLM_TOKEN"

MSAN_SIGNATURES = (
    "uses(x: str, f: str, l: num)",
    "uninitialized(x: str, f: str, l: num)",
    "hasInitializer(x: str, m: str)",
    "hasMemberInitializer(x: str, m: str)",
    "allocated(x: str, f: str, l: num)",
    "declared(x: str, f: str, l: num)",
    "flow(x: str, f1: str, l1: num, y: str, f2: str, l2: num)",
    "memoryError(x: str, error_type: str, f: str, l: num)",
)
EQUIV_SIGNATURES = (
    "use(x: str, f: str, l: num)",
    "def(x: str, f: str, l: num)",
    "flow(x: str, f1: str, l1: num, y: str, f2: str, l2: num)",
    "controldep(x: str, f1: str, l1: num, cond: str, choice: bool, f2: str, l2: num)",
    "defWithExpr(x: str, f: str, l: num)",
    "condWithExpr(f: str, l: num)",
    "unaryFun(operator: str, operand: str, f: str, l: num)",
    "binaryFun(op: str, opd1: str, opd2: str, f: str, l: num)",
    "entry(fun: str, f: str, l: num)",
    "exit(f: str, l: num)",
    "isConstantValue(x: str)",
    "watchVar(x: str, f: str, l: num)",
    "varMap(x: str, f1: str, l1: num, y: str, f2: str, l2: num)",
    "entryMap(f1: str, l1: num, f2: str, l2: num)",
    "exitMap(f1: str, l1: num, f2: str, l2: num)",
)


class FactSource(Protocol):
    def __call__(
        self, task: str, snippets: str, vocabulary: tuple[str, ...], prior_facts: str
    ) -> str: ...


@dataclass
class IterationRecord:
    index: int
    raw_text: str
    parsed_facts: int
    new_facts: int
    failures: list[tuple[int, str]] = field(default_factory=list)
    wall_ms: float = 0.0

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "parsed_facts": self.parsed_facts,
            "new_facts": self.new_facts,
            "failures": [{"line": line, "reason": reason} for line, reason in self.failures],
            "wall_ms": round(self.wall_ms, 3),
        }


@dataclass
class IterationLog:
    records: list[IterationRecord] = field(default_factory=list)

    def new_fact_counts(self) -> list[int]:
        return [r.new_facts for r in self.records]

    def replay_key(self) -> tuple:
        """Everything except wall time; equal keys mean identical replays."""
        return tuple(
            (r.index, r.raw_text, r.parsed_facts, r.new_facts, tuple(r.failures))
            for r in self.records
        )

    def to_json(self) -> list[dict]:
        return [r.to_json() for r in self.records]


@dataclass
class LoopResult:
    task: str
    sections: dict[str, frozenset[Atom]]

    def fact_count(self) -> int:
        return sum(len(atoms) for atoms in self.sections.values())

    def all_atoms(self) -> set[tuple[str, Atom]]:
        return {
            (section, atom)
            for section, atoms in self.sections.items()
            for atom in atoms
        }

    def render(self) -> str:
        if self.task == MSAN:
            atoms = sorted(self.sections.get("facts", frozenset()), key=print_atom)
            return "".join(print_atom(a) + ".\n" for a in atoms)
        parts = []
        for section in (CODE1, CODE2, CORRESPONDENCE):
            parts.append(f"=== {section} ===")
            for atom in sorted(self.sections.get(section, frozenset()), key=print_atom):
                parts.append(print_atom(atom) + ".")
        return "\n".join(parts) + "\n"

    def to_msan_facts(self) -> MsanFactSet:
        return msan_facts_from_atoms(sorted(self.sections.get("facts", frozenset()), key=print_atom))

    def to_equiv_bundle(self) -> EquivBundle:
        return equiv_bundle_from_atoms(
            sorted(self.sections.get(CODE1, frozenset()), key=print_atom),
            sorted(self.sections.get(CODE2, frozenset()), key=print_atom),
            sorted(self.sections.get(CORRESPONDENCE, frozenset()), key=print_atom),
        )


_SECTION_MARKERS = {
    "=== code1 ===": CODE1,
    "=== code2 ===": CODE2,
    "=== correspondence ===": CORRESPONDENCE,
    "<code1 predicates>": CODE1,
    "<code2 predicates>": CODE2,
    "<common predicates>": CORRESPONDENCE,
}

_TAGS = {"Code1": CODE1, "Code2": CODE2}


def _strip_tags(atom: Atom) -> tuple[Atom, str | None]:
    """Remove inline Code1/Code2 tag arguments; returns (atom, tagged section)."""
    section = None
    args = []
    for term in atom.args:
        if isinstance(term, Sym) and term.text in _TAGS:
            section = section or _TAGS[term.text]
            continue
        args.append(term)
    return Atom(atom.predicate, tuple(args)), section


def parse_response(task: str, text: str) -> tuple[dict[str, set[Atom]], list[tuple[int, str]]]:
    """Lenient parse of a source response into per-section fact sets."""
    if task == MSAN:
        atoms, failures = parse_fact_lines(text)
        return {"facts": set(atoms)}, failures

    sections: dict[str, set[Atom]] = {CODE1: set(), CODE2: set(), CORRESPONDENCE: set()}
    failures: list[tuple[int, str]] = []
    current: str | None = None
    for idx, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip().lower()
        if stripped in _SECTION_MARKERS:
            current = _SECTION_MARKERS[stripped]
            continue
        atoms, line_failures = parse_fact_lines(raw)
        failures.extend((idx, reason) for _, reason in line_failures)
        for atom in atoms:
            bare, tagged = _strip_tags(atom)
            if bare.predicate in CORRESPONDENCE_PREDICATES:
                sections[CORRESPONDENCE].add(bare)
            elif tagged is not None:
                sections[tagged].add(bare)
            elif current is not None:
                sections[current].add(bare)
            else:
                failures.append((idx, f"{bare.predicate}: no Code1/Code2 attribution"))
    return sections, failures


def run_loop(
    source: FactSource,
    task: str,
    snippets: str,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> tuple[LoopResult, IterationLog]:
    """Union facts across source calls until a re-ask adds nothing.

    Source failures surface as an empty delta plus a log entry; they never
    abort the loop.
    """
    if task not in (MSAN, EQUIV):
        raise ValueError(f"unknown task {task!r}")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    vocabulary = MSAN_SIGNATURES if task == MSAN else EQUIV_SIGNATURES
    consolidated: dict[str, set[Atom]] = {}
    log = IterationLog()
    for index in range(1, max_iters + 1):
        start = time.perf_counter()
        result = LoopResult(
            task, {k: frozenset(v) for k, v in consolidated.items()}
        )
        try:
            text = source(task, snippets, vocabulary, result.render())
        except Exception as exc:  # a broken source must not kill the loop
            logger.warning("fact source failed on iteration %d: %s", index, exc)
            text = ""
            sections, failures = {}, [(0, f"source error: {exc}")]
        else:
            sections, failures = parse_response(task, text)
        new_facts = 0
        parsed = 0
        for section, atoms in sections.items():
            parsed += len(atoms)
            known = consolidated.setdefault(section, set())
            fresh = atoms - known
            new_facts += len(fresh)
            known |= fresh
        log.records.append(
            IterationRecord(
                index=index,
                raw_text=text,
                parsed_facts=parsed,
                new_facts=new_facts,
                failures=list(failures),
                wall_ms=(time.perf_counter() - start) * 1000.0,
            )
        )
        if index >= 2 and new_facts == 0:
            break
    result = LoopResult(task, {k: frozenset(v) for k, v in consolidated.items()})
    return result, log


# ---------------------------------------------------------------------------
# Sources
# ---------------------------------------------------------------------------


def mock_source(
    ground_truth: str, withhold_fraction: float = 0.0, seed: int = 0
) -> FactSource:
    """A source that knows the answer but forgets a random slice per call.

    Each call independently withholds every fact line with the given
    probability; section markers always survive.  Deterministic under the
    seed (call k draws from its own stream derived from ``seed`` and k).
    """
    if not 0.0 <= withhold_fraction < 1.0:
        raise ValueError("withhold fraction must be in [0, 1)")
    lines = ground_truth.splitlines()
    fact_line = re.compile(r"\s*[A-Za-z_][A-Za-z0-9_]*\s*\(")
    calls = {"n": 0}

    def source(task, snippets, vocabulary, prior_facts):
        calls["n"] += 1
        rng = random.Random(seed * 1_000_003 + calls["n"])
        kept = []
        for line in lines:
            if fact_line.match(line) and rng.random() < withhold_fraction:
                continue
            kept.append(line)
        return "\n".join(kept) + "\n"

    return source


@dataclass
class HttpSourceConfig:
    url: str | None = None
    url_env: str = URL_ENV
    token_env: str = TOKEN_ENV
    timeout_s: float = 30.0
    trace_template: str = "msan_trace_v1"
    msan_template: str = "msan_formalize_v1"
    equiv_template: str = "equiv_formalize_v1"
    debug: bool = False


def _split_marked(text: str, marker: str) -> str | None:
    pattern = re.compile(
        rf"^===\s*{marker}\s*===\s*$(.*?)(?=^===|\Z)", re.MULTILINE | re.DOTALL
    )
    m = pattern.search(text)
    return m.group(1).strip() if m else None


def http_source(config: HttpSourceConfig | None = None) -> FactSource:
    """A source backed by a completion endpoint.

    Each call posts ``{"system": ..., "user": ...}`` as JSON and reads the
    response's ``text`` field.  For the trace task two requests are made
    per iteration (trace extraction, then formalization); the equivalence
    task is a single request with the vocabulary prompt.  Transport errors
    yield an empty response, which the loop records as a failed iteration.
    """
    config = config or HttpSourceConfig()

    def post(system: str, user: str) -> str:
        url = config.url or os.environ.get(config.url_env)
        if not url:
            raise RuntimeError(
                f"no endpoint URL configured (set {config.url_env} or pass url=)"
            )
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(config.token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        body = json.dumps({"system": system, "user": user}).encode("utf-8")
        if config.debug:
            logger.debug("request to %s: %s", url, body.decode("utf-8"))
        request = urllib.request.Request(url, data=body, headers=headers)
        with urllib.request.urlopen(request, timeout=config.timeout_s) as response:
            payload = response.read().decode("utf-8")
        if config.debug:
            logger.debug("response: %s", payload)
        return json.loads(payload)["text"]

    def source(task, snippets, vocabulary, prior_facts):
        try:
            prior = prior_facts.strip() or "(none yet)"
            if task == MSAN:
                explanation = _split_marked(snippets, "explanation") or snippets
                context = _split_marked(snippets, "context") or snippets
                trace = post(
                    render_template(
                        config.trace_template,
                        file_context=context,
                        explanation=explanation,
                    ),
                    explanation,
                )
                return post(
                    render_template(
                        config.msan_template, trace=trace, prior_facts=prior
                    ),
                    trace,
                )
            code1 = _split_marked(snippets, "code1") or snippets
            code2 = _split_marked(snippets, "code2") or snippets
            return post(
                render_template(
                    config.equiv_template,
                    code1=code1,
                    code2=code2,
                    prior_facts=prior,
                ),
                snippets,
            )
        except (urllib.error.URLError, OSError, ValueError, KeyError, RuntimeError) as exc:
            logger.warning("http source call failed: %s", exc)
            return ""

    return source
