import sys
from collections import defaultdict
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_TITLES = {
    1: "weight-sum law",
    2: "Gram PSD and self-adjointness",
    3: "quadrature error bound",
    4: "resolvent estimates",
    5: "solver oracle equivalence",
    6: "closed-form transforms",
    7: "table-band reproduction",
    8: "noise-convergence monotonicity",
    9: "stopping-rule bracketing",
    10: "example 13",
    11: "determinism",
}
_outcomes = defaultdict(list)


def pytest_runtest_logreport(report):
    marks = getattr(report, "acceptance_ids", None)
    if marks is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        for cid in marks:
            _outcomes[cid].append((report.nodeid, report.passed))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        report.acceptance_ids = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_outcomes):
        results = _outcomes[cid]
        failed = [nid for nid, ok in results if not ok]
        status = "PASS" if not failed else "FAIL"
        line = (f"ACCEPTANCE C{cid:<2d} {status}  {_TITLES.get(cid, '')} "
                f"({len(results) - len(failed)}/{len(results)} checks)")
        terminalreporter.write_line(line)
        for nid in failed:
            terminalreporter.write_line(f"    failed: {nid}")
