"""claimcheck: deterministic verification of formalized code-reasoning claims.

The package turns predicate instances extracted from a code-reasoning
assistant's explanation into Datalog and checks them against an executable
verification condition.  Two conditions ship in the box: reachability of a
use site from an uninitialized-value site along claimed dataflow, and
structural equivalence of two programs over a dependence-graph abstraction.

Most callers need only the loaders and the two verifiers:

    from claimcheck import load_msan_facts, verify_msan
    from claimcheck import load_equiv_bundle_text, verify_equiv
"""

__version__ = "0.1.0"

from .equivalence import verify_equiv
from .facts import (
    lint_equiv,
    lint_msan,
    load_equiv_bundle,
    load_equiv_bundle_text,
    load_msan_facts,
)
from .loop import http_source, mock_source, run_loop
from .msan import verify_msan

__all__ = [
    "__version__",
    "http_source",
    "lint_equiv",
    "lint_msan",
    "load_equiv_bundle",
    "load_equiv_bundle_text",
    "load_msan_facts",
    "mock_source",
    "run_loop",
    "verify_equiv",
    "verify_msan",
]
