"""Collects one line per acceptance criterion and prints them after the run."""

ACCEPTANCE: dict[int, tuple[bool, str]] = {}
STARTED: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not STARTED:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(STARTED):
        if n in ACCEPTANCE:
            ok, detail = ACCEPTANCE[n]
        else:
            ok, detail = False, f"{STARTED[n]}: raised before producing a result"
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}  {detail}")
