import random

from claimcheck.datalog import (
    evaluate,
    export_external,
    import_external,
    parse_program,
    print_atom,
    print_rule,
)

from generators import random_positive_program
from oracles import naive_evaluate


def _fact_set(program):
    return {print_atom(f) for f in program.facts}


def test_fixture_export_layout(tmp_path, nonzero_output_program_text):
    program = parse_program(nonzero_output_program_text)
    export_external(program, tmp_path)
    assert (tmp_path / "program.dl").exists()
    fact_files = sorted(p.name for p in tmp_path.glob("*.facts"))
    assert fact_files == [
        "copy.facts",
        "defNonZero.facts",
        "defZero.facts",
        "outputFn.facts",
    ]
    rows = sum(
        len((tmp_path / name).read_text().splitlines()) for name in fact_files
    )
    assert rows == 5
    # symbols are written unquoted, tab-separated
    assert (tmp_path / "copy.facts").read_text() == "c\ta\t4\n"


def test_fixture_round_trip(tmp_path, nonzero_output_program_text):
    program = parse_program(nonzero_output_program_text)
    export_external(program, tmp_path)
    back = import_external(tmp_path)
    assert back.declarations == program.declarations
    assert [print_rule(r) for r in back.rules] == [print_rule(r) for r in program.rules]
    assert _fact_set(back) == _fact_set(program)
    assert dict(evaluate(back).relations) == dict(evaluate(program).relations)


def test_empty_program_export(tmp_path):
    export_external(parse_program(""), tmp_path)
    assert (tmp_path / "program.dl").read_text() == ""
    assert list(tmp_path.glob("*.facts")) == []
    back = import_external(tmp_path)
    assert back.facts == [] and back.rules == []


def test_random_round_trips(tmp_path):
    rng = random.Random(3)
    for index in range(20):
        program = random_positive_program(rng)
        target = tmp_path / f"case{index}"
        export_external(program, target)
        back = import_external(target)
        assert _fact_set(back) == _fact_set(program)
        assert [print_rule(r) for r in back.rules] == [
            print_rule(r) for r in program.rules
        ]
        assert dict(evaluate(back).relations) == naive_evaluate(program)
