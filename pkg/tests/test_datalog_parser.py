import pytest
from hypothesis import given, settings, strategies as st

from claimcheck.datalog import (
    Atom,
    Num,
    Program,
    Sym,
    parse_facts,
    parse_fact_lines,
    parse_program,
    print_atom,
    print_program,
)
from claimcheck.errors import (
    ArityMismatchError,
    DatalogSyntaxError,
    RangeRestrictionError,
    SortError,
    UnstratifiableNegationError,
)


def test_fixture_program_shape(nonzero_output_program_text):
    program = parse_program(nonzero_output_program_text)
    assert len(program.declarations) == 6
    assert len(program.rules) == 4
    assert len(program.facts) == 5


def test_empty_source():
    program = parse_program("")
    assert program.declarations == {}
    assert program.rules == []
    assert program.facts == []


def test_auto_declaration_infers_number_sort():
    program = parse_program("p(1). q(x) :- p(x), x < 2.")
    assert program.declarations["p"] == ("number",)
    assert program.declarations["q"] == ("number",)
    assert len(program.rules) == 1
    # pretty-print round trip preserves the program
    reparsed = parse_program(print_program(program))
    assert reparsed.declarations == program.declarations
    assert reparsed.rules == program.rules
    assert reparsed.facts == program.facts


def test_symbols_escape_round_trip():
    source = 'p("quo\\"te", "back\\\\slash").'
    program = parse_program(source)
    assert program.facts[0].args[0] == Sym('quo"te')
    assert parse_program(print_program(program)).facts == program.facts


def test_true_false_are_symbols():
    facts = parse_facts('p("d", 6, "c", true, 5).')
    assert facts[0].args[3] == Sym("true")


def test_comments_and_wildcards():
    program = parse_program(
        "// header\np(1). // trailing\nq() :- p(_).\n"
    )
    assert len(program.facts) == 1 and len(program.rules) == 1


def test_syntax_error_carries_position():
    with pytest.raises(DatalogSyntaxError) as info:
        parse_program("p(1)\nq(2).")
    assert info.value.line == 2


def test_arity_mismatch():
    with pytest.raises(ArityMismatchError):
        parse_program(".decl p(x: symbol)\np(\"a\", \"b\").")


def test_sort_error_on_symbol_comparison():
    with pytest.raises(SortError):
        parse_program('p("a"). q(x) :- p(x), x < 2.')


def test_range_restriction_rejected():
    with pytest.raises(RangeRestrictionError):
        parse_program("q(y) :- p(x).")
    with pytest.raises(RangeRestrictionError):
        parse_program("q(x) :- p(x), !r(y).")


def test_unstratifiable_negation_rejected():
    source = "p(x) :- base(x), !q(x). q(x) :- base(x), !p(x). base(1)."
    with pytest.raises(UnstratifiableNegationError):
        parse_program(source)


def test_facts_only_parser_rejects_rules():
    with pytest.raises(DatalogSyntaxError):
        parse_facts("p(x) :- q(x).")
    with pytest.raises(DatalogSyntaxError):
        parse_facts("p(x).")  # not ground


def test_lenient_line_parse_skips_prose():
    text = "Here are the facts:\nuses(\"x\", \"f\", 1).\nbroken(\"x\", .\nnot a fact\n"
    atoms, failures = parse_fact_lines(text)
    assert [a.predicate for a in atoms] == ["uses"]
    assert len(failures) == 1 and failures[0][0] == 3


_term = st.one_of(
    st.integers(min_value=-99, max_value=99).map(Num),
    st.text(
        alphabet=st.characters(blacklist_categories=("Cs",), blacklist_characters="\x00"),
        max_size=12,
    ).map(Sym),
)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.sampled_from(["p", "q", "rel_3"]),
            st.lists(_term, min_size=0, max_size=4),
        ),
        max_size=12,
    )
)
def test_fact_print_parse_round_trip(raw_facts):
    # one declaration per (name, arity, sorts) signature to keep it well-formed
    atoms = []
    signatures: dict[str, tuple] = {}
    for name, args in raw_facts:
        sorts = tuple("number" if isinstance(a, Num) else "symbol" for a in args)
        key = f"{name}_{len(args)}_{abs(hash(sorts)) % 997}"
        signatures[key] = sorts
        atoms.append(Atom(key, tuple(args)))
    program = Program(declarations=signatures, facts=atoms)
    reparsed = parse_program(print_program(program))
    assert set(map(print_atom, reparsed.facts)) == set(map(print_atom, atoms))
