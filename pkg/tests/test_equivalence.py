import dataclasses
import random

import pytest

from claimcheck.datalog import evaluate
from claimcheck.equivalence import (
    EQUIVALENT,
    INCONCLUSIVE,
    NOT_EQUIVALENT,
    all_mismatches,
    build_pairing,
    check_watchvars,
    diff_structure,
    equiv_rules,
    verify_equiv,
)
from claimcheck.errors import ConflictingVarMapError
from claimcheck.facts import (
    EquivBundle,
    EquivSide,
    SiteFact,
    VarMapFact,
    load_equiv_bundle,
    load_equiv_bundle_text,
)
from claimcheck.toy import extract_equiv_facts, normalize

from generators import mutate_toy, random_toy


def _load(fixtures_dir, name):
    return load_equiv_bundle_text((fixtures_dir / "equiv" / name).read_text())


def _with_watchvars(bundle, names, line=8):
    watch = frozenset(SiteFact(v, "main.cpp", line) for v in names)
    return dataclasses.replace(
        bundle,
        code1=dataclasses.replace(bundle.code1, watch_vars=watch),
        code2=dataclasses.replace(bundle.code2, watch_vars=watch),
    )


# ---------------------------------------------------------------------------
# Pairing
# ---------------------------------------------------------------------------


def test_fixture_pairs_completely(renamed_fn_bundle_text):
    bundle = load_equiv_bundle_text(renamed_fn_bundle_text)
    pairing = build_pairing(bundle)
    assert pairing.var_pairs == {v: v for v in ("0", "2", "a", "b", "c", "d")}
    assert len(pairing.def_site_pairs) == 7
    assert pairing.residue_defs_1 == [] and pairing.residue_defs_2 == []
    assert pairing.residue_vars_1 == [] and pairing.residue_vars_2 == []


def test_empty_bundle_pairs_to_nothing():
    pairing = build_pairing(EquivBundle(EquivSide(), EquivSide()))
    assert pairing.is_empty()
    assert pairing.residue_defs_1 == [] and pairing.residue_defs_2 == []


def test_reordered_defs_pair_by_ordinal_across_lines(fixtures_dir):
    bundle = _load(fixtures_dir, "field_assign_reorder.bundle")
    pairing = build_pairing(bundle)
    pairs = {
        (var1, site1[1], site2[1])
        for var1, site1, _, site2 in pairing.def_site_pairs
    }
    assert ("cache->size", 32, 27) in pairs
    assert ("cache->arr", 27, 28) in pairs


def test_var_map_pairs_before_identical_names():
    bundle = load_equiv_bundle(
        'def("x", "f", 1).', 'def("y", "f", 1).', 'varMap("x", "f", 1, "y", "f", 1).'
    )
    pairing = build_pairing(bundle)
    assert pairing.var_pairs == {"x": "y"}


def test_conflicting_var_map_is_rejected():
    bundle = load_equiv_bundle(
        'def("x", "f", 1).',
        'def("y", "f", 1). def("z", "f", 2).',
        'varMap("x", "f", 1, "y", "f", 1). varMap("x", "f", 1, "z", "f", 2).',
    )
    with pytest.raises(ConflictingVarMapError):
        build_pairing(bundle)


# ---------------------------------------------------------------------------
# Structural diff
# ---------------------------------------------------------------------------


def test_fixture_diff_is_exactly_the_renamed_call(renamed_fn_bundle_text):
    bundle = load_equiv_bundle_text(renamed_fn_bundle_text)
    mismatches = diff_structure(bundle, build_pairing(bundle))
    assert len(mismatches) == 1
    only = mismatches[0]
    assert only.kind == "expr_mismatch" and only.line == 6
    assert 'unaryFun("foo", "a", "main.cpp", 6)' in only.side1
    assert 'unaryFun("bar", "a", "main.cpp", 6)' in only.side2


def test_identical_sides_have_empty_diff(renamed_fn_bundle_text):
    bundle = load_equiv_bundle_text(renamed_fn_bundle_text)
    identical = dataclasses.replace(bundle, code2=bundle.code1)
    assert diff_structure(identical, build_pairing(identical)) == []


def test_reordered_assignment_yields_controldep_mismatch(fixtures_dir):
    bundle = _load(fixtures_dir, "field_assign_reorder.bundle")
    mismatches = diff_structure(bundle, build_pairing(bundle))
    assert [m.kind for m in mismatches] == ["controldep_mismatch"]
    assert mismatches[0].subject == "cache->size"


def test_operand_order_is_significant(renamed_fn_bundle_text):
    bundle = load_equiv_bundle_text(renamed_fn_bundle_text)
    swapped_binary = {
        f._replace(left=f.right, right=f.left) for f in bundle.code2.binary
    }
    mutated = dataclasses.replace(
        bundle,
        code2=dataclasses.replace(bundle.code2, binary=frozenset(swapped_binary)),
    )
    kinds = {m.kind for m in diff_structure(mutated, build_pairing(mutated))}
    assert "expr_mismatch" in kinds
    sites = {
        (m.line, m.kind) for m in diff_structure(mutated, build_pairing(mutated))
    }
    assert (3, "expr_mismatch") in sites  # the a == b comparison site


# ---------------------------------------------------------------------------
# Watch variables
# ---------------------------------------------------------------------------


def test_watchvar_reaching_defs_pair(renamed_fn_bundle_text):
    bundle = _with_watchvars(
        load_equiv_bundle_text(renamed_fn_bundle_text), ("a", "b", "c", "d")
    )
    mismatches = check_watchvars(bundle, build_pairing(bundle))
    assert mismatches == []


def test_zero_watchvars_is_vacuous(renamed_fn_bundle_text):
    bundle = load_equiv_bundle_text(renamed_fn_bundle_text)
    assert check_watchvars(bundle, build_pairing(bundle)) == []


def test_deleted_watchvar_is_reported(renamed_fn_bundle_text):
    bundle = _with_watchvars(
        load_equiv_bundle_text(renamed_fn_bundle_text), ("a", "b", "c", "d")
    )
    mutated = dataclasses.replace(
        bundle,
        code2=dataclasses.replace(
            bundle.code2,
            watch_vars=frozenset(
                f for f in bundle.code2.watch_vars if f.var != "d"
            ),
        ),
    )
    mismatches = check_watchvars(mutated, build_pairing(mutated))
    assert [m.kind for m in mismatches] == ["watchvar_unmatched"]
    assert mismatches[0].subject == "d"


def test_changed_reaching_def_is_reported(renamed_fn_bundle_text):
    bundle = _with_watchvars(
        load_equiv_bundle_text(renamed_fn_bundle_text), ("a", "b", "c", "d")
    )
    pruned = frozenset(
        f
        for f in bundle.code2.flows
        if not (f.src_var == "d" and f.src_line == 6 and f.dst_line == 8)
    )
    mutated = dataclasses.replace(
        bundle, code2=dataclasses.replace(bundle.code2, flows=pruned)
    )
    kinds = {m.kind for m in check_watchvars(mutated, build_pairing(mutated))}
    assert "reaching_defs_differ" in kinds


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


def test_fixture_verdicts(fixtures_dir, renamed_fn_bundle_text):
    assert verify_equiv(load_equiv_bundle_text(renamed_fn_bundle_text)).outcome == NOT_EQUIVALENT
    assert verify_equiv(_load(fixtures_dir, "field_assign_reorder.bundle")).outcome == NOT_EQUIVALENT
    assert verify_equiv(_load(fixtures_dir, "loop_cond_swap.bundle")).outcome == NOT_EQUIVALENT
    assert verify_equiv(_load(fixtures_dir, "switch_vs_ifelse.bundle")).outcome == NOT_EQUIVALENT
    assert verify_equiv(_load(fixtures_dir, "guarded_call_self_pair.bundle")).outcome == EQUIVALENT
    assert verify_equiv(_load(fixtures_dir, "guarded_call_onesided_watch.bundle")).outcome == INCONCLUSIVE


def test_identity_is_equivalent(renamed_fn_bundle_text):
    bundle = load_equiv_bundle_text(renamed_fn_bundle_text)
    identical = dataclasses.replace(bundle, code2=bundle.code1)
    assert verify_equiv(identical).outcome == EQUIVALENT


def test_all_watchvars_deleted_from_one_side_is_inconclusive(renamed_fn_bundle_text):
    bundle = _with_watchvars(
        load_equiv_bundle_text(renamed_fn_bundle_text), ("a", "b", "c", "d")
    )
    mutated = dataclasses.replace(
        bundle, code1=dataclasses.replace(bundle.code1, watch_vars=frozenset())
    )
    verdict = verify_equiv(mutated)
    assert verdict.outcome == INCONCLUSIVE
    assert any("watch" in message for message in verdict.obligations)


def test_symmetry_of_verdicts(fixtures_dir, renamed_fn_bundle_text):
    for name in (
        "guarded_call_renamed_fn.bundle",
        "field_assign_reorder.bundle",
        "loop_cond_swap.bundle",
        "switch_vs_ifelse.bundle",
        "guarded_call_self_pair.bundle",
        "guarded_call_onesided_watch.bundle",
    ):
        bundle = _load(fixtures_dir, name)
        forward = verify_equiv(bundle)
        backward = verify_equiv(bundle.swapped())
        assert forward.outcome == backward.outcome
        if forward.outcome == NOT_EQUIVALENT:
            assert forward.witness.kind == backward.witness.kind


def test_every_mismatch_names_concrete_facts():
    rng = random.Random(31337)
    seen_kinds = set()
    for _ in range(120):
        base = normalize(random_toy(rng))
        mutation = mutate_toy(rng, base)
        bundle = extract_equiv_facts(base, mutation.program, mutation.var_map)
        verdict = verify_equiv(bundle)
        for mismatch in verdict.mismatches:
            seen_kinds.add(mismatch.kind)
            assert mismatch.side1 or mismatch.side2, mismatch
    assert "expr_mismatch" in seen_kinds


def test_witness_is_deterministic(renamed_fn_bundle_text):
    runs = {
        verify_equiv(load_equiv_bundle_text(renamed_fn_bundle_text)).witness.detail
        for _ in range(3)
    }
    assert len(runs) == 1


def test_loop_cond_swap_witness_names_controldep(fixtures_dir):
    verdict = verify_equiv(_load(fixtures_dir, "loop_cond_swap.bundle"))
    assert verdict.witness.kind == "controldep_mismatch"
    assert all(m.kind == "controldep_mismatch" for m in verdict.mismatches)


def test_renaming_invariance(renamed_fn_bundle_text):
    bundle = load_equiv_bundle_text(renamed_fn_bundle_text)
    renamed_side = EquivSide(
        uses=frozenset(f._replace(var=f.var + "_r") for f in bundle.code2.uses),
        defs=frozenset(f._replace(var=f.var + "_r") for f in bundle.code2.defs),
        flows=frozenset(
            f._replace(src_var=f.src_var + "_r", dst_var=f.dst_var + "_r")
            for f in bundle.code2.flows
        ),
        controldeps=frozenset(
            f._replace(var=f.var + "_r", cond=f.cond + "_r")
            for f in bundle.code2.controldeps
        ),
        def_with_expr=frozenset(
            f._replace(var=f.var + "_r") for f in bundle.code2.def_with_expr
        ),
        unary=frozenset(
            f._replace(operand=f.operand + "_r") for f in bundle.code2.unary
        ),
        binary=frozenset(
            f._replace(left=f.left + "_r", right=f.right + "_r")
            for f in bundle.code2.binary
        ),
        entries=bundle.code2.entries,
        exits=bundle.code2.exits,
        constants=frozenset(c + "_r" for c in bundle.code2.constants),
        watch_vars=frozenset(
            f._replace(var=f.var + "_r") for f in bundle.code2.watch_vars
        ),
    )
    var_maps = frozenset(
        VarMapFact(v, "main.cpp", 0, v + "_r", "main.cpp", 0)
        for v in ("0", "2", "a", "b", "c", "d")
    )
    renamed = dataclasses.replace(bundle, code2=renamed_side, var_maps=var_maps)
    verdict = verify_equiv(renamed)
    # still exactly the foo/bar call difference, nothing about the renaming
    assert verdict.outcome == NOT_EQUIVALENT
    assert {m.kind for m in verdict.mismatches} == {"expr_mismatch"}
    assert len(verdict.mismatches) == 1


# ---------------------------------------------------------------------------
# The generated Datalog program
# ---------------------------------------------------------------------------


def test_rules_path_on_fixture(renamed_fn_bundle_text):
    bundle = load_equiv_bundle_text(renamed_fn_bundle_text)
    pairing = build_pairing(bundle)
    db = evaluate(equiv_rules(bundle, pairing))
    assert len(db["mismatch"]) == 1
    assert db["equivalent"] == frozenset()
    identical = dataclasses.replace(bundle, code2=bundle.code1)
    db = evaluate(equiv_rules(identical, build_pairing(identical)))
    assert db["mismatch"] == frozenset()
    assert db["equivalent"] == {()}


def test_rules_path_agrees_on_all_fixtures(fixtures_dir):
    for name in (
        "guarded_call_renamed_fn.bundle",
        "field_assign_reorder.bundle",
        "loop_cond_swap.bundle",
        "switch_vs_ifelse.bundle",
        "guarded_call_self_pair.bundle",
    ):
        bundle = _load(fixtures_dir, name)
        pairing = build_pairing(bundle)
        direct = {m.project() for m in all_mismatches(bundle, pairing)}
        db = evaluate(equiv_rules(bundle, pairing))
        assert set(db["mismatch"]) == direct, name
        assert bool(db["equivalent"]) == (not direct), name


def test_rules_path_agrees_on_random_toy_pairs():
    rng = random.Random(2024)
    for _ in range(100):
        program = normalize(random_toy(rng))
        mutation = mutate_toy(rng, program)
        bundle = extract_equiv_facts(program, mutation.program, mutation.var_map)
        pairing = build_pairing(bundle)
        direct = {m.project() for m in all_mismatches(bundle, pairing)}
        db = evaluate(equiv_rules(bundle, pairing))
        assert set(db["mismatch"]) == direct, mutation.kind
        assert bool(db["equivalent"]) == (not direct)
