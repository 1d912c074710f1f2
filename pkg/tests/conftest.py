import shlex
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
EXAMPLES = ROOT / "examples"


def golden_cases():
    """(stem, argv, expected stdout, expected exit) for every block of every .expected file."""
    cases = []
    for path in sorted(EXAMPLES.glob("*.expected")):
        block = None
        for line in path.read_text().splitlines(keepends=True):
            if line.startswith("$ rlam "):
                block = {"argv": shlex.split(line[len("$ rlam "):]), "out": []}
            elif line.startswith("[exit ") and block is not None:
                cases.append((path.stem, block["argv"], "".join(block["out"]),
                              int(line[len("[exit "):-2])))
                block = None
            elif block is not None:
                block["out"].append(line)
    return cases


@pytest.fixture(autouse=True)
def _repo_cwd(monkeypatch):
    # golden commands use repo-relative paths
    monkeypatch.chdir(ROOT)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call" and not (report.when == "setup" and report.failed):
        return
    number, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    item.config._criteria[number] = (title, report.passed, detail)


def pytest_terminal_summary(terminalreporter, config):
    crit = getattr(config, "_criteria", {})
    if not crit:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(crit):
        title, ok, detail = crit[number]
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
