"""Walk through the Datalog engine on the bundled copy-chain claims.

A five-line straight-line program copies constants between variables and
passes two of them to output().  The claims about it (which variable is
zero/non-zero, which copies happen, which calls occur) are plain facts;
three rules propagate zero-ness along copies and flag any output() call
that can receive a non-zero value.

Run:  python demos/01_datalog_engine.py
"""

from pathlib import Path

from claimcheck.datalog import Atom, evaluate, explain, parse_program, print_atom, query, Var

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "datalog" / "nonzero_output_check.dl"

source = FIXTURE.read_text()
print("--- program ---")
print(source)

program = parse_program(source)
print(f"{len(program.declarations)} declarations, "
      f"{len(program.rules)} rules, {len(program.facts)} facts")

db = evaluate(program)
print("\n--- minimal model ---")
for relation in sorted(db):
    for values in sorted(db[relation], key=repr):
        print(f"  {relation}{values!r}")

print("\n--- queries ---")
print("isUnsafe()? ->", "provable" if query(db, Atom("isUnsafe", ())) else "not provable")
print("which variables feed output() with non-zero values?")
for substitution in query(db, Atom("nonZeroInputToOutputFn", (Var("x"),))):
    print("  x =", substitution["x"])

print("\n--- why is it unsafe? ---")
tree = explain(db, Atom("isUnsafe", ()))


def show(node, depth=0):
    origin = "fact" if node.rule is None else "rule"
    print("  " * depth + f"{print_atom(node.fact)}   [{origin}]")
    for child in node.children:
        show(child, depth + 1)


show(tree)
