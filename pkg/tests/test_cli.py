import json

from claimcheck.cli import main

FIXTURES = "fixtures"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


# ---------------------------------------------------------------------------
# verify-msan
# ---------------------------------------------------------------------------


def test_verify_msan_fixture(capsys):
    code, report = run_json(capsys, "verify-msan", f"{FIXTURES}/msan/audio_buffer_trace.facts")
    assert code == 0
    assert report["verdict"] == "Verified"
    chain = report["witness"]["chain"]
    assert chain[-1] == {"var": "buffer", "file": "utils/encoders/stream_encoder.c", "line": 2538}


def test_verify_msan_empty_file(capsys, tmp_path):
    empty = tmp_path / "empty.facts"
    empty.write_text("")
    code, report = run_json(capsys, "verify-msan", str(empty))
    assert code == 1
    assert report["verdict"] == "DontKnow"
    assert report["witness"] is None


def test_verify_msan_corrupted_line_is_usage_error(capsys, tmp_path):
    lines = open(f"{FIXTURES}/msan/audio_buffer_trace.facts").read().splitlines()
    lines[5] = 'uses("sample_ptr", "internal/client/encoders/audio_encoder.cc" 218).'
    bad = tmp_path / "bad.facts"
    bad.write_text("\n".join(lines))
    code, report = run_json(capsys, "verify-msan", str(bad))
    assert code == 2
    assert report["verdict"] is None
    assert "line 6" in report["error"]


# ---------------------------------------------------------------------------
# verify-equiv
# ---------------------------------------------------------------------------


def test_verify_equiv_fixture(capsys):
    code, report = run_json(
        capsys, "verify-equiv", f"{FIXTURES}/equiv/guarded_call_renamed_fn.bundle"
    )
    assert code == 1
    assert report["verdict"] == "NotEquivalent"
    assert report["witness"]["kind"] == "expr_mismatch"
    assert 'unaryFun("foo", "a", "main.cpp", 6)' in report["witness"]["code1_facts"]


def test_verify_equiv_self_pair(capsys):
    code, report = run_json(
        capsys, "verify-equiv", f"{FIXTURES}/equiv/guarded_call_self_pair.bundle"
    )
    assert code == 0 and report["verdict"] == "Equivalent"


def test_verify_equiv_inconclusive(capsys):
    code, report = run_json(
        capsys, "verify-equiv", f"{FIXTURES}/equiv/guarded_call_onesided_watch.bundle"
    )
    assert code == 1 and report["verdict"] == "Inconclusive"
    assert report["witness"]["missing_obligations"]


def test_verify_equiv_three_files(capsys, tmp_path):
    (tmp_path / "c1").write_text('def("a", "main.cpp", 1).\nexit(2).\nflow("a", 0, "a", 1).\nentry("main", 0).\n')
    (tmp_path / "c2").write_text('def("a", "main.cpp", 1).\nexit(2).\nflow("a", 0, "a", 1).\nentry("main", 0).\n')
    (tmp_path / "corr").write_text("")
    code, report = run_json(
        capsys, "verify-equiv",
        "--code1", str(tmp_path / "c1"),
        "--code2", str(tmp_path / "c2"),
        "--correspondence", str(tmp_path / "corr"),
    )
    assert code == 0 and report["verdict"] == "Equivalent"


# ---------------------------------------------------------------------------
# report schema
# ---------------------------------------------------------------------------


def test_report_json_schema(capsys):
    _, report = run_json(
        capsys, "verify-equiv", f"{FIXTURES}/equiv/guarded_call_renamed_fn.bundle"
    )
    assert set(report) >= {"task", "verdict", "witness", "lint", "iterations", "version", "inputs"}
    assert report["task"] == "equiv"
    assert {"errors", "warnings"} == set(report["lint"])
    assert report["iterations"] == []
    for entry in report["inputs"]:
        assert set(entry) == {"path", "sha256"}
        assert len(entry["sha256"]) == 64


def test_reports_are_stable_across_runs(capsys):
    def snapshot():
        _, report = run_json(
            capsys, "verify-msan", f"{FIXTURES}/msan/audio_buffer_trace.facts"
        )
        report.pop("timing_ms")
        return json.dumps(report, sort_keys=True)

    assert snapshot() == snapshot()


# ---------------------------------------------------------------------------
# lint / extract
# ---------------------------------------------------------------------------


def test_lint_msan_fixture(capsys):
    code, report = run_json(
        capsys, "lint", "--task", "msan", f"{FIXTURES}/msan/audio_buffer_trace.facts"
    )
    assert code == 0
    assert report["lint"] == {"errors": [], "warnings": []}


def test_extract_msan_then_verify(capsys, tmp_path):
    out = tmp_path / "facts"
    code, _ = run(
        capsys, "extract", f"{FIXTURES}/toy/copy_chain.toy",
        "--task", "msan", "--uninit", "a", "-o", str(out),
    )
    assert code == 0
    code, report = run_json(capsys, "verify-msan", str(out))
    assert code == 0 and report["verdict"] == "Verified"


def test_extract_empty_toy_bundle(capsys, tmp_path):
    empty = tmp_path / "empty.toy"
    empty.write_text("")
    code, out = run(capsys, "extract", str(empty), str(empty), "--task", "equiv")
    assert code == 0
    assert "entry(" in out and "exit(" in out


def test_extract_pair_matches_fixture_verdict(capsys, tmp_path):
    out = tmp_path / "pair.bundle"
    code, _ = run(
        capsys, "extract",
        f"{FIXTURES}/toy/guarded_call_a.toy", f"{FIXTURES}/toy/guarded_call_b.toy",
        "--task", "equiv", "-o", str(out),
    )
    assert code == 0
    code, report = run_json(capsys, "verify-equiv", str(out))
    assert code == 1
    assert report["verdict"] == "NotEquivalent"
    assert report["witness"]["kind"] == "expr_mismatch"


def test_extract_equiv_needs_two_programs(capsys):
    code = main(["extract", f"{FIXTURES}/toy/copy_chain.toy", "--task", "equiv"])
    assert code == 2


def test_lint_equiv_accepts_positional_bundle(capsys):
    code, report = run_json(
        capsys, "lint", "--task", "equiv",
        f"{FIXTURES}/equiv/guarded_call_renamed_fn.bundle",
    )
    assert code == 0 and report["lint"]["errors"] == []


def test_verify_equiv_without_inputs_is_usage_error(capsys):
    code, report = run_json(capsys, "verify-equiv")
    assert code == 2 and "provide" in report["error"]


# ---------------------------------------------------------------------------
# formalize
# ---------------------------------------------------------------------------


def test_formalize_mock_reaches_fixpoint(capsys, tmp_path):
    snippets = tmp_path / "snips"
    snippets.write_text("irrelevant for the mock")
    code, report = run_json(
        capsys, "formalize", str(snippets),
        "--task", "msan", "--source", "mock",
        "--ground-truth", f"{FIXTURES}/msan/audio_buffer_trace.facts",
        "--withhold", "0.4", "--seed", "7", "--verify",
    )
    assert code == 0
    counts = [record["new_facts"] for record in report["iterations"]]
    assert counts == sorted(counts, reverse=True)
    assert counts[-1] == 0
    assert report["verdict"] == "Verified"
    assert report["consolidated_facts"] == 11


def test_formalize_single_iteration_recovers_less(capsys, tmp_path):
    snippets = tmp_path / "snips"
    snippets.write_text("x")

    def consolidated(iters):
        _, report = run_json(
            capsys, "formalize", str(snippets),
            "--task", "equiv", "--source", "mock",
            "--ground-truth", f"{FIXTURES}/equiv/guarded_call_renamed_fn.bundle",
            "--withhold", "0.4", "--seed", "7", "--iters", str(iters),
        )
        return report["consolidated_facts"]

    assert consolidated(1) < consolidated(5)


def test_formalize_mock_needs_ground_truth(capsys, tmp_path):
    snippets = tmp_path / "s"
    snippets.write_text("x")
    assert main(["formalize", str(snippets), "--task", "msan", "--source", "mock"]) == 2


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def test_export_datalog_round_trip(capsys, tmp_path):
    from claimcheck.datalog import import_external, evaluate

    out = tmp_path / "exported"
    code, _ = run(
        capsys, "export", f"{FIXTURES}/datalog/nonzero_output_check.dl", "-o", str(out),
    )
    assert code == 0
    assert evaluate(import_external(out))["isUnsafe"] == {()}


def test_export_msan_task(capsys, tmp_path):
    out = tmp_path / "exported"
    code, _ = run(
        capsys, "export", f"{FIXTURES}/msan/audio_buffer_trace.facts",
        "--task", "msan", "-o", str(out),
    )
    assert code == 0
    assert (out / "program.dl").exists()
    assert (out / "uninitialized.facts").exists()


# ---------------------------------------------------------------------------
# corpus
# ---------------------------------------------------------------------------


def test_corpus_manifest_all_match(capsys):
    code, report = run_json(capsys, "corpus", f"{FIXTURES}/corpus.json")
    assert code == 0
    assert all(row["ok"] for row in report["results"])
    assert len(report["results"]) == 7


def test_corpus_report_order_follows_manifest(capsys):
    manifest = json.loads(open(f"{FIXTURES}/corpus.json").read())
    _, report = run_json(capsys, "corpus", f"{FIXTURES}/corpus.json")
    assert [row["name"] for row in report["results"]] == [
        entry["name"] for entry in manifest["fixtures"]
    ]


def test_corpus_empty_manifest(capsys, tmp_path):
    manifest = tmp_path / "m.json"
    manifest.write_text('{"fixtures": []}')
    code, report = run_json(capsys, "corpus", str(manifest))
    assert code == 0 and report["results"] == []


def test_corpus_flags_wrong_expectation(capsys, tmp_path):
    manifest = {
        "fixtures": [
            {
                "name": "deliberately-wrong",
                "task": "msan",
                "path": "trace.facts",
                "expected": "DontKnow",
            }
        ]
    }
    (tmp_path / "trace.facts").write_text(
        open(f"{FIXTURES}/msan/audio_buffer_trace.facts").read()
    )
    path = tmp_path / "m.json"
    path.write_text(json.dumps(manifest))
    code, report = run_json(capsys, "corpus", str(path))
    assert code == 1
    assert report["results"][0]["ok"] is False
    assert report["results"][0]["actual"] == "Verified"


def test_corpus_unreadable_manifest(capsys, tmp_path):
    assert main(["corpus", str(tmp_path / "missing.json")]) == 2
