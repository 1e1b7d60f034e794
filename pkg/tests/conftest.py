import re

# Per-criterion verdicts recorded by test_acceptance.py, printed after the run.
VERDICTS: dict[int, tuple[bool, str]] = {}
_ERRORED: set[int] = set()


def pytest_runtest_logreport(report):
    m = re.search(r"test_criterion_(\d+)", report.nodeid)
    if m and report.failed:
        _ERRORED.add(int(m.group(1)))


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS and not _ERRORED:
        return
    terminalreporter.section("acceptance criteria")
    for num in range(1, 12):
        if num in VERDICTS:
            ok, detail = VERDICTS[num]
            terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        elif num in _ERRORED:
            terminalreporter.write_line(f"criterion {num:2d}: FAIL  (errored before a verdict)")
        else:
            terminalreporter.write_line(f"criterion {num:2d}: not run")
