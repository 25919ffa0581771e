"""Verify a use-of-uninitialized-value claim set end to end.

The bundled trace says a member buffer is allocated-but-uninitialized in
an audio helper and that its value flows into a streaming encoder where a
sanitizer flagged the read.  Verification asks: do the claimed flows
actually connect the claimed uninitialized site to a claimed use at the
claimed error site?  If yes, the verdict is Verified with the chain as a
witness; anything less is DontKnow.

Run:  python demos/02_verify_uninit_trace.py
"""

from pathlib import Path

from claimcheck.datalog import evaluate
from claimcheck.facts import lint_msan, load_msan_facts
from claimcheck.msan import msan_program, verify_msan

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "msan" / "audio_buffer_trace.facts"

facts = load_msan_facts(FIXTURE.read_text())
print(f"loaded {len(facts)} facts "
      f"({len(facts.flow)} flows, {len(facts.uses)} uses, "
      f"{len(facts.uninitialized)} uninitialized, {len(facts.memory_error)} memoryError)")

report = lint_msan(facts)
print("lint:", "clean" if report.ok else [issue.code for issue in report.errors])

verdict = verify_msan(facts)
print("\nverdict:", verdict.outcome)
print("witness chain:")
for var, file, line in verdict.witness:
    print(f"  {var:<12} {file}:{line}")

# The same condition as Datalog rules, evaluated by the engine: both code
# paths must agree, and the rule set can be exported for an external solver.
db = evaluate(msan_program(facts))
print("\nrule-set cross-check: satisfied() derived ->", bool(db["satisfied"]))
