import re

_RESULTS = {}
_TITLES = {}
_PAT = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_collection_modifyitems(items):
    for item in items:
        m = _PAT.search(item.nodeid)
        if m:
            doc = (item.function.__doc__ or "").strip().splitlines()
            _TITLES[int(m.group(1))] = doc[0] if doc else ""


def pytest_runtest_logreport(report):
    m = _PAT.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call" or report.outcome != "passed":
        _RESULTS[n] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_RESULTS):
        terminalreporter.write_line(f"criterion {n:2d}: {_RESULTS[n]}  {_TITLES.get(n, '')}")
