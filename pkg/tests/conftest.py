from __future__ import annotations

from pathlib import Path

import pytest

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def nonzero_output_program_text() -> str:
    return (FIXTURES / "datalog" / "nonzero_output_check.dl").read_text()


@pytest.fixture(scope="session")
def trace_facts_text() -> str:
    return (FIXTURES / "msan" / "audio_buffer_trace.facts").read_text()


@pytest.fixture(scope="session")
def renamed_fn_bundle_text() -> str:
    return (FIXTURES / "equiv" / "guarded_call_renamed_fn.bundle").read_text()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    seen: dict[str, str] = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            name = getattr(report, "nodeid", "")
            if "test_acceptance.py::test_criterion_" in name:
                label = name.split("::")[-1].replace("test_", "")
                seen[label] = "PASS" if status == "passed" else "FAIL"
    if not seen:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(seen, key=lambda s: int(s.split("_")[1])):
        terminalreporter.write_line(f"{seen[label]}  {label}")
