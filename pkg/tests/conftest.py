"""Shared test plumbing: acceptance-criterion result reporting."""

# name -> True (pass) / False (fail) / None (not run)
criterion_results: dict[str, bool | None] = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not criterion_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, result in criterion_results.items():
        status = {True: "PASS", False: "FAIL", None: "NOT RUN"}[result]
        terminalreporter.write_line(f"{status:7s} {name}")
