"""Prints one PASS/FAIL line per acceptance criterion after the run."""
import re

_titles: dict = {}
_outcomes: dict = {}
_CRITERION = re.compile(r"test_criterion_(\d+)_")


def pytest_collection_modifyitems(items):
    for item in items:
        m = _CRITERION.match(item.name)
        if m:
            doc = (item.function.__doc__ or "").strip().splitlines()
            _titles[item.nodeid] = (int(m.group(1)), doc[0] if doc else item.name)


def pytest_runtest_logreport(report):
    if report.nodeid not in _titles:
        return
    if report.when == "call" or report.failed or report.skipped:
        # a setup or teardown failure overrides a passing call
        if _outcomes.get(report.nodeid) != "FAIL":
            _outcomes[report.nodeid] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    by_number: dict = {}
    for nodeid, (num, title) in _titles.items():
        if nodeid in _outcomes:
            entry = by_number.setdefault(num, {"titles": [], "passed": 0, "failed": []})
            if title not in entry["titles"]:
                entry["titles"].append(title)
            if _outcomes[nodeid] == "PASS":
                entry["passed"] += 1
            else:
                entry["failed"].append(nodeid.split("::")[-1])
    terminalreporter.section("acceptance criteria")
    for num in sorted(by_number):
        entry = by_number[num]
        total = entry["passed"] + len(entry["failed"])
        verdict = "PASS" if not entry["failed"] else "FAIL"
        line = f"criterion {num:2d}: {verdict} ({entry['passed']}/{total} checks)  {' / '.join(entry['titles'])}"
        terminalreporter.write_line(line)
        for name in entry["failed"]:
            terminalreporter.write_line(f"    failed: {name}")
