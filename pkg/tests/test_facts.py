import dataclasses

import pytest

from claimcheck.errors import (
    ArityMismatchError,
    DanglingMapReferenceError,
    UnknownPredicateError,
)
from claimcheck.facts import (
    EquivBundle,
    EquivSide,
    InitFact,
    SiteFact,
    lint_equiv,
    lint_msan,
    load_equiv_bundle,
    load_equiv_bundle_text,
    load_msan_facts,
)


# ---------------------------------------------------------------------------
# Trace fact sets
# ---------------------------------------------------------------------------


def test_trace_fixture_counts(trace_facts_text):
    fs = load_msan_facts(trace_facts_text)
    assert len(fs.uses) == 4
    assert len(fs.flow) == 4
    assert len(fs.uninitialized) == 1
    assert len(fs.allocated) == 1
    assert len(fs.memory_error) == 1
    assert len(fs) == 11


def test_trace_paths_are_normalized(trace_facts_text):
    fs = load_msan_facts(trace_facts_text)
    files = {f.dst_file for f in fs.flow} | {f.file for f in fs.memory_error}
    assert all("//" not in path for path in files)


def test_empty_text_gives_empty_set():
    fs = load_msan_facts("")
    assert len(fs) == 0


def test_wrong_vocabulary_is_rejected():
    with pytest.raises(UnknownPredicateError) as info:
        load_msan_facts('watchVar("x", "f", 1).')
    assert "watchVar" in str(info.value)


def test_msan_arity_is_checked():
    with pytest.raises(ArityMismatchError):
        load_msan_facts('uses("x", 1).')


def test_msan_round_trip(trace_facts_text):
    fs = load_msan_facts(trace_facts_text)
    assert load_msan_facts(fs.render()) == fs


def test_lint_trace_fixture_is_clean(trace_facts_text):
    report = lint_msan(load_msan_facts(trace_facts_text))
    assert report.errors == [] and report.warnings == []


def test_lint_empty_set_is_clean():
    report = lint_msan(load_msan_facts(""))
    assert report.errors == [] and report.warnings == []


def test_lint_warns_on_initializer_for_uninitialized_var(trace_facts_text):
    fs = load_msan_facts(trace_facts_text)
    mutated = dataclasses.replace(
        fs,
        has_initializer=frozenset({InitFact("data_", "AudioBuffer::AudioBuffer")}),
    )
    report = lint_msan(mutated)
    assert report.errors == []
    assert [w.code for w in report.warnings] == ["initializer-conflicts-uninitialized"]


def test_lint_flags_unsupported_flow_destination(trace_facts_text):
    fs = load_msan_facts(
        trace_facts_text + '\nflow("data_", "audio/base/audio_buffer.cc", 375, "ghost", "nowhere.cc", 9).'
    )
    report = lint_msan(fs)
    assert [e.code for e in report.errors] == ["flow-endpoint-unsupported"]


def test_lint_flags_memory_error_without_use(trace_facts_text):
    fs = load_msan_facts(
        trace_facts_text + '\nmemoryError("x", "uninitialized_data", "other.cc", 1).'
    )
    assert [e.code for e in lint_msan(fs).errors] == ["memory-error-without-use"]


# ---------------------------------------------------------------------------
# Equivalence bundles
# ---------------------------------------------------------------------------


def test_bundle_fixture_counts(renamed_fn_bundle_text):
    bundle = load_equiv_bundle_text(renamed_fn_bundle_text)
    assert len(bundle.code1) == 38
    assert len(bundle.code2) == 38
    assert len(bundle.var_maps) + len(bundle.entry_maps) + len(bundle.exit_maps) == 2


def test_abbreviated_forms_get_default_file(renamed_fn_bundle_text):
    bundle = load_equiv_bundle_text(renamed_fn_bundle_text)
    assert {f.file for f in bundle.code1.defs} == {"main.cpp"}
    assert {f.cond_file for f in bundle.code1.controldeps} == {"main.cpp"}


def test_output_var_is_watch_var_synonym():
    bundle = load_equiv_bundle(
        'outputVar("a", "main.cpp", 3).', 'watchVar("a", "main.cpp", 3).', ""
    )
    assert bundle.code1.watch_vars == bundle.code2.watch_vars


def test_single_fact_sides_load_without_maps():
    bundle = load_equiv_bundle(
        'def("a", "main.cpp", 1).', 'def("a", "main.cpp", 1).', ""
    )
    assert len(bundle.code1.defs) == 1
    # sufficiency problems (no entry/exit) belong to lint, not loading
    report = lint_equiv(bundle)
    assert {e.code for e in report.errors} >= {"entry-missing", "exit-missing"}


def test_dangling_exit_map_is_rejected(renamed_fn_bundle_text):
    mutated = renamed_fn_bundle_text.replace("exitMap(8, 8).", "exitMap(9, 9).")
    with pytest.raises(DanglingMapReferenceError):
        load_equiv_bundle_text(mutated)


def test_correspondence_predicates_rejected_in_code_sections():
    with pytest.raises(UnknownPredicateError):
        load_equiv_bundle('varMap("a", 1, "b", 1).', "", "")


def test_side_predicates_rejected_in_correspondence():
    with pytest.raises(UnknownPredicateError):
        load_equiv_bundle("", "", 'def("a", "f", 1).')


def test_bundle_round_trip(renamed_fn_bundle_text):
    bundle = load_equiv_bundle_text(renamed_fn_bundle_text)
    assert load_equiv_bundle_text(bundle.render()) == bundle


def test_lint_bundle_fixture_is_clean(renamed_fn_bundle_text):
    report = lint_equiv(load_equiv_bundle_text(renamed_fn_bundle_text))
    assert report.errors == []


def test_lint_def_without_source(renamed_fn_bundle_text):
    bundle = load_equiv_bundle_text(renamed_fn_bundle_text)
    mutated = dataclasses.replace(
        bundle,
        code1=dataclasses.replace(
            bundle.code1,
            defs=bundle.code1.defs | {SiteFact("z", "main.cpp", 6)},
        ),
    )
    assert [e.code for e in lint_equiv(mutated).errors] == ["def-without-source"]


def test_lint_expr_without_operator(renamed_fn_bundle_text):
    bundle = load_equiv_bundle_text(renamed_fn_bundle_text)
    unary = {f for f in bundle.code1.unary if f.line != 6}
    mutated = dataclasses.replace(
        bundle, code1=dataclasses.replace(bundle.code1, unary=frozenset(unary))
    )
    assert [e.code for e in lint_equiv(mutated).errors] == ["expr-without-operator"]


def test_lint_use_without_def(renamed_fn_bundle_text):
    bundle = load_equiv_bundle_text(renamed_fn_bundle_text)
    mutated = dataclasses.replace(
        bundle,
        code2=dataclasses.replace(
            bundle.code2, uses=bundle.code2.uses | {SiteFact("phantom", "main.cpp", 5)}
        ),
    )
    assert [e.code for e in lint_equiv(mutated).errors] == ["use-without-def"]


def test_lint_empty_bundle_misses_entry_and_exit_on_both_sides():
    bundle = EquivBundle(EquivSide(), EquivSide())
    codes = sorted(e.code for e in lint_equiv(bundle).errors)
    assert codes == ["entry-missing", "entry-missing", "exit-missing", "exit-missing"]
