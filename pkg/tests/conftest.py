"""Shared fixtures and the acceptance-criteria terminal summary."""

_CRITERIA = []


def record_criterion(number, description, passed, detail=""):
    """Log one acceptance-criterion outcome for the end-of-run summary."""
    _CRITERIA.append((number, description, bool(passed), detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, description, passed, detail in sorted(_CRITERIA):
        status = "PASS" if passed else "FAIL"
        line = f"[criterion {number}] {status:4s} {description}"
        if detail:
            line += f"  -- {detail}"
        terminalreporter.write_line(line)
