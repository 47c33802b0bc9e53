"""Print one PASS/FAIL line per acceptance criterion at the end of the run."""

_acceptance_results = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if name.startswith("test_"):
        name = name[len("test_"):]
    _acceptance_results.append((name, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed in _acceptance_results:
        terminalreporter.write_line(f"ACCEPTANCE {name}: {'PASS' if passed else 'FAIL'}")
