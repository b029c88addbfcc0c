from __future__ import annotations

import sys
from pathlib import Path

import pytest

from situated import DefeasibleConditional, parse_formula, parse_kb

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).resolve().parent.parent / "data"

_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    n, title = marker.args
    if report.when == "setup" and report.passed:
        return
    status = "PASS" if report.passed else "FAIL"
    if _criteria.get(n, ("", "PASS"))[1] == "PASS":
        _criteria[n] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, status = _criteria[n]
        terminalreporter.write_line(f"criterion {n:2d} {status}: {title}")


def conditionals(text: str) -> list[DefeasibleConditional]:
    """Plain defeasible conditionals from ``A |~ B`` lines."""
    out = []
    for line in text.strip().splitlines():
        a, b = line.split("|~")
        out.append(DefeasibleConditional(parse_formula(a), parse_formula(b)))
    return out


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def birds():
    return conditionals("b |~ f\np |~ ~f\np & ~b |~ false")


@pytest.fixture
def dodo_kb():
    return parse_kb((DATA / "dodo.kb").read_text())


@pytest.fixture
def kitchen_kb():
    return parse_kb((DATA / "kitchen.kb").read_text())


@pytest.fixture
def inconsistent_kb():
    return parse_kb((DATA / "inconsistent.kb").read_text())
