"""Shared pytest plumbing: the acceptance suite records one verdict line per
criterion here, printed after the capture-safe terminal summary."""

CRITERION_LINES: list[str] = []


def record_criterion(number: int, name: str, ok: bool, detail: str = "") -> None:
    verdict = "PASS" if ok else "FAIL"
    suffix = f" — {detail}" if detail else ""
    CRITERION_LINES.append(f"criterion {number:>2} ({name}): {verdict}{suffix}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(CRITERION_LINES):
        terminalreporter.write_line(line)
