import re

_AC = re.compile(r"test_acceptance\.py::test_ac(\d+)_")
_results: dict[int, tuple[str, float]] = {}


def pytest_runtest_logreport(report):
    m = _AC.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call" or report.outcome == "failed":
        prev = _results.get(n, ("PASS", 0.0))
        ok = report.passed and prev[0] == "PASS"
        _results[n] = ("PASS" if ok else "FAIL", prev[1] + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        status, dt = _results[n]
        terminalreporter.write_line(f"AC{n} {status}  [{dt:.2f} s]")
