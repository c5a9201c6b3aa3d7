"""Per-criterion PASS/FAIL summary for the acceptance tests.

Tests carry ``@pytest.mark.criterion(n)``.  A criterion passes only when every
test tagged with it passed; an xfail (a documented, known miss) counts as FAIL.
"""
from collections import defaultdict

_results = defaultdict(list)
_labels = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, label): acceptance criterion this test checks")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m:
            item.user_properties.append(("criterion", m.args[0]))
            if len(m.args) > 1:
                _labels[m.args[0]] = m.args[1]


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        ok = report.outcome == "passed" and not hasattr(report, "wasxfail")
        _results[crit].append((report.nodeid.split("::")[-1], ok))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_results):
        parts = _results[crit]
        status = "PASS" if all(ok for _, ok in parts) else "FAIL"
        failed = [name for name, ok in parts if not ok]
        extra = f"  (failing: {', '.join(failed)})" if failed else ""
        tr.write_line(f"criterion {crit:>2} {status}  {_labels.get(crit, '')}{extra}")
