"""Shared pytest hooks.

The acceptance module records one entry per criterion in its RESULTS list;
the hook below prints them as a compact pass/fail table after the test run.
"""

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None) if mod else None
    if not results:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria")
    for num, label, ok in sorted(results):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {num:2d} {status}  {label}")
