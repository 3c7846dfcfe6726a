import sys
from collections import defaultdict
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_criteria = defaultdict(list)


def pytest_runtest_logreport(report):
    # acceptance tests tag themselves with a criterion number and a detail line
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _criteria[props["criterion"]].append((report.nodeid.split("::")[-1], report.passed, props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_criteria):
        results = _criteria[key]
        ok = all(passed for _, passed, _ in results)
        failed = [name for name, passed, _ in results if not passed]
        details = "; ".join(d for _, _, d in results if d)
        line = f"ACCEPTANCE {key}: {'PASS' if ok else 'FAIL'}"
        if failed:
            line += f" (failed: {', '.join(failed)})"
        if details:
            line += f" | {details}"
        terminalreporter.write_line(line)
