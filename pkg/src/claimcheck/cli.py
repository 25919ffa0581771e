"""Batch entry point: verify, lint, extract, formalize, export, corpus.

Exit codes: 0 when the verdict is Verified/Equivalent (or every corpus row
matches its expectation), 1 for DontKnow/NotEquivalent/Inconclusive (or a
corpus mismatch), 2 for unreadable, unparsable, or otherwise unusable
input.  Reports are JSON by default (``--pretty`` for humans).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .datalog.export import export_external
from .datalog.parser import parse_program
from .equivalence import EquivVerdict, verify_equiv, build_pairing, equiv_rules
from .errors import ClaimcheckError
from .facts import (
    lint_equiv,
    lint_msan,
    load_equiv_bundle,
    load_equiv_bundle_text,
    load_msan_facts,
)
from .loop import (
    DEFAULT_MAX_ITERS,
    EQUIV,
    MSAN,
    HttpSourceConfig,
    http_source,
    mock_source,
    run_loop,
)
from .msan import MsanVerdict, msan_program, verify_msan
from .toy import extract_equiv_facts, extract_msan_facts, normalize, parse_toy

OK, NOT_PROVEN, USAGE_ERROR = 0, 1, 2

_EXIT_BY_VERDICT = {
    "Verified": OK,
    "Equivalent": OK,
    "DontKnow": NOT_PROVEN,
    "NotEquivalent": NOT_PROVEN,
    "Inconclusive": NOT_PROVEN,
}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _inputs(paths: list[Path]) -> list[dict]:
    return [{"path": str(p), "sha256": _sha256(p)} for p in paths]


def _report(
    task: str,
    verdict: str | None,
    witness,
    lint,
    paths: list[Path],
    started: float,
    iterations=None,
    error: str | None = None,
) -> dict:
    report = {
        "task": task,
        "verdict": verdict,
        "witness": witness,
        "lint": lint if lint is not None else {"errors": [], "warnings": []},
        "iterations": iterations or [],
        "version": __version__,
        "inputs": _inputs(paths),
        "timing_ms": round((time.perf_counter() - started) * 1000.0, 3),
    }
    if error is not None:
        report["error"] = error
    return report


def _emit(report: dict, pretty: bool) -> None:
    if not pretty:
        print(json.dumps(report, indent=2, sort_keys=True))
        return
    print(f"task:    {report['task']}")
    print(f"verdict: {report.get('verdict')}")
    if report.get("error"):
        print(f"error:   {report['error']}")
    witness = report.get("witness")
    if witness:
        print("witness:")
        print("  " + json.dumps(witness, indent=2).replace("\n", "\n  "))
    lint = report.get("lint") or {}
    for level in ("errors", "warnings"):
        for issue in lint.get(level, []):
            print(f"lint {level[:-1]}: [{issue['code']}] {issue['message']}")
    for record in report.get("iterations", []):
        print(
            f"iteration {record['index']}: parsed={record['parsed_facts']} "
            f"new={record['new_facts']} failures={len(record['failures'])}"
        )


def _msan_witness(verdict: MsanVerdict):
    if verdict.witness is None:
        return None
    return {
        "chain": [
            {"var": var, "file": file, "line": line}
            for var, file, line in verdict.witness
        ]
    }


def _equiv_witness(verdict: EquivVerdict):
    if verdict.outcome == "Inconclusive":
        return {"missing_obligations": list(verdict.obligations)}
    if verdict.witness is not None:
        return verdict.witness.to_json()
    return None


def cmd_verify_msan(args) -> int:
    started = time.perf_counter()
    path = Path(args.facts)
    try:
        facts = load_msan_facts(path.read_text(encoding="utf-8"))
    except (OSError, ClaimcheckError) as exc:
        _emit(_report(MSAN, None, None, None, [path] if path.exists() else [], started, error=str(exc)), args.pretty)
        return USAGE_ERROR
    verdict = verify_msan(facts)
    report = _report(
        MSAN, verdict.outcome, _msan_witness(verdict), verdict.lint.to_json(), [path], started
    )
    _emit(report, args.pretty)
    return _EXIT_BY_VERDICT[verdict.outcome]


def _load_bundle_args(args):
    if args.bundle:
        path = Path(args.bundle)
        return load_equiv_bundle_text(path.read_text(encoding="utf-8")), [path]
    if not (args.code1 and args.code2 and args.correspondence is not None):
        raise ClaimcheckError(
            "provide a sectioned bundle file or all of --code1/--code2/--correspondence"
        )
    paths = [Path(args.code1), Path(args.code2), Path(args.correspondence)]
    bundle = load_equiv_bundle(*(p.read_text(encoding="utf-8") for p in paths))
    return bundle, paths


def cmd_verify_equiv(args) -> int:
    started = time.perf_counter()
    try:
        bundle, paths = _load_bundle_args(args)
        verdict = verify_equiv(bundle)
    except (OSError, ClaimcheckError) as exc:
        _emit(_report(EQUIV, None, None, None, [], started, error=str(exc)), args.pretty)
        return USAGE_ERROR
    report = _report(
        EQUIV, verdict.outcome, _equiv_witness(verdict), verdict.lint.to_json(), paths, started
    )
    _emit(report, args.pretty)
    return _EXIT_BY_VERDICT[verdict.outcome]


def cmd_lint(args) -> int:
    started = time.perf_counter()
    try:
        if args.task == MSAN:
            if not args.input:
                raise ClaimcheckError("lint --task msan needs a fact file")
            path = Path(args.input)
            report = lint_msan(load_msan_facts(path.read_text(encoding="utf-8")))
            paths = [path]
        else:
            args.bundle = args.input
            bundle, paths = _load_bundle_args(args)
            report = lint_equiv(bundle)
    except (OSError, ClaimcheckError) as exc:
        _emit(_report(args.task, None, None, None, [], started, error=str(exc)), args.pretty)
        return USAGE_ERROR
    _emit(_report(args.task, None, None, report.to_json(), paths, started), args.pretty)
    return OK if report.ok else NOT_PROVEN


def cmd_extract(args) -> int:
    started = time.perf_counter()
    try:
        program = normalize(parse_toy(Path(args.toy).read_text(encoding="utf-8")))
        if args.task == MSAN:
            marked = set(filter(None, (args.uninit or "").split(",")))
            facts = extract_msan_facts(program, marked, file=args.file_name)
            text = facts.render()
        else:
            if not args.toy2:
                raise ClaimcheckError("equivalence extraction needs two toy programs")
            other = normalize(parse_toy(Path(args.toy2).read_text(encoding="utf-8")))
            var_map = {}
            for pair in filter(None, (args.var_map or "").split(",")):
                left, _, right = pair.partition("=")
                if not right:
                    raise ClaimcheckError(f"bad --var-map entry {pair!r}")
                var_map[left.strip()] = right.strip()
            text = extract_equiv_facts(program, other, var_map, file=args.file_name).render()
    except (OSError, ClaimcheckError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {args.output} ({(time.perf_counter() - started) * 1000.0:.1f} ms)")
    else:
        print(text, end="")
    return OK


def cmd_formalize(args) -> int:
    started = time.perf_counter()
    try:
        snippets = Path(args.snippets).read_text(encoding="utf-8")
        if args.source == "mock":
            if not args.ground_truth:
                raise ClaimcheckError("--source mock needs --ground-truth FILE")
            ground_truth = Path(args.ground_truth).read_text(encoding="utf-8")
            source = mock_source(ground_truth, args.withhold, args.seed)
        else:
            source = http_source(HttpSourceConfig(url=args.url, debug=args.debug))
        result, log = run_loop(source, args.task, snippets, max_iters=args.iters)
    except (OSError, ClaimcheckError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    text = result.render()
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")

    verdict = None
    witness = None
    lint = None
    status = OK
    if args.verify:
        try:
            if args.task == MSAN:
                v = verify_msan(result.to_msan_facts())
                verdict, witness, lint = v.outcome, _msan_witness(v), v.lint.to_json()
            else:
                v = verify_equiv(result.to_equiv_bundle())
                verdict, witness, lint = v.outcome, _equiv_witness(v), v.lint.to_json()
            status = _EXIT_BY_VERDICT[verdict]
        except ClaimcheckError as exc:
            _emit(
                _report(args.task, None, None, None, [Path(args.snippets)], started,
                        iterations=log.to_json(), error=str(exc)),
                args.pretty,
            )
            return USAGE_ERROR
    report = _report(
        args.task, verdict, witness, lint, [Path(args.snippets)], started,
        iterations=log.to_json(),
    )
    report["consolidated_facts"] = result.fact_count()
    _emit(report, args.pretty)
    return status


def cmd_export(args) -> int:
    try:
        if args.task == "datalog":
            program = parse_program(Path(args.input).read_text(encoding="utf-8"))
        elif args.task == MSAN:
            facts = load_msan_facts(Path(args.input).read_text(encoding="utf-8"))
            program = msan_program(facts)
        else:
            bundle = load_equiv_bundle_text(Path(args.input).read_text(encoding="utf-8"))
            program = equiv_rules(bundle, build_pairing(bundle))
        rules_path = export_external(program, args.output)
    except (OSError, ClaimcheckError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    print(f"wrote {rules_path.parent}")
    return OK


def _corpus_row(entry: dict, base: Path) -> dict:
    name = entry.get("name", "<unnamed>")
    task = entry["task"]
    try:
        if task == MSAN:
            facts = load_msan_facts((base / entry["path"]).read_text(encoding="utf-8"))
            actual = verify_msan(facts).outcome
        else:
            bundle = load_equiv_bundle_text(
                (base / entry["path"]).read_text(encoding="utf-8")
            )
            actual = verify_equiv(bundle).outcome
    except (OSError, ClaimcheckError) as exc:
        actual = f"error: {exc}"
    return {
        "name": name,
        "task": task,
        "expected": entry["expected"],
        "actual": actual,
        "ok": actual == entry["expected"],
    }


def cmd_corpus(args) -> int:
    path = Path(args.manifest)
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
        entries = manifest["fixtures"]
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot read manifest: {exc}", file=sys.stderr)
        return USAGE_ERROR
    base = path.parent
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        rows = list(pool.map(lambda e: _corpus_row(e, base), entries))
    if args.pretty:
        width = max((len(r["name"]) for r in rows), default=4)
        for row in rows:
            mark = "ok " if row["ok"] else "FAIL"
            print(f"{mark} {row['name']:<{width}} expected={row['expected']} actual={row['actual']}")
        print(f"{sum(r['ok'] for r in rows)}/{len(rows)} matched")
    else:
        print(json.dumps({"results": rows, "version": __version__}, indent=2))
    return OK if all(r["ok"] for r in rows) else NOT_PROVEN


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="claimcheck",
        description="Check formalized code-reasoning claims against executable "
        "verification conditions.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_pretty(p):
        p.add_argument("--pretty", action="store_true", help="human-readable output")
        p.add_argument("--json", dest="pretty", action="store_false",
                       help="JSON output (default)")

    p = sub.add_parser("verify-msan", help="verify an uninitialized-value fact file")
    p.add_argument("facts")
    add_pretty(p)
    p.set_defaults(func=cmd_verify_msan)

    def add_bundle_args(p):
        p.add_argument("bundle", nargs="?", help="sectioned bundle file")
        p.add_argument("--code1")
        p.add_argument("--code2")
        p.add_argument("--correspondence")

    p = sub.add_parser("verify-equiv", help="verify a two-program fact bundle")
    add_bundle_args(p)
    add_pretty(p)
    p.set_defaults(func=cmd_verify_equiv)

    p = sub.add_parser("lint", help="run the well-formedness checks only")
    p.add_argument("--task", choices=(MSAN, EQUIV), required=True)
    p.add_argument("input", nargs="?")
    p.add_argument("--code1")
    p.add_argument("--code2")
    p.add_argument("--correspondence")
    add_pretty(p)
    p.set_defaults(func=cmd_lint, bundle=None)

    p = sub.add_parser("extract", help="extract ground-truth facts from toy programs")
    p.add_argument("toy")
    p.add_argument("toy2", nargs="?")
    p.add_argument("--task", choices=(MSAN, EQUIV), required=True)
    p.add_argument("--uninit", help="comma-separated variables claimed uninitialized")
    p.add_argument("--var-map", help="comma-separated x=y variable pairs")
    p.add_argument("--file-name", default="main.cpp", help="file name used in facts")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("formalize", help="run the iterative fact-acquisition loop")
    p.add_argument("snippets", help="code snippets / explanation file")
    p.add_argument("--task", choices=(MSAN, EQUIV), required=True)
    p.add_argument("--source", choices=("mock", "http"), default="mock")
    p.add_argument("--iters", type=int, default=DEFAULT_MAX_ITERS)
    p.add_argument("--withhold", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ground-truth", help="fact file the mock source draws from")
    p.add_argument("--url", help="endpoint URL (default: $CLAIMCHECK_LLM_URL)")
    p.add_argument("--debug", action="store_true", help="log request/response bodies")
    p.add_argument("--verify", action="store_true", help="verify the consolidated facts")
    p.add_argument("-o", "--output", help="write consolidated facts here")
    add_pretty(p)
    p.set_defaults(func=cmd_formalize)

    p = sub.add_parser("export", help="write solver-dialect rules and fact files")
    p.add_argument("input")
    p.add_argument("--task", choices=(MSAN, EQUIV, "datalog"), default="datalog")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("corpus", help="verify a manifest of fixtures")
    p.add_argument("manifest")
    p.add_argument("--jobs", type=int, default=4)
    add_pretty(p)
    p.set_defaults(func=cmd_corpus)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
