import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Reprint the one-line acceptance results collected during the run."""
    mod = sys.modules.get("test_acceptance")
    lines = list(getattr(mod, "RESULTS", ())) if mod else []
    if not lines:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
